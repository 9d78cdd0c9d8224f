use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::functions::TestFunction;
use crate::bounds::{
    bound_clamped, bound_r_approximate, bound_q_spline, convergence_order, derivative_sup_norm,
    sup_error, BoundReport, DEFAULT_SAMPLES_PER_INTERVAL,
};
use crate::conditioning::{
    exact_eigenform, propagate, ConditioningTrace, Direction, Seed, SQRT3,
};
use crate::end_conditions::{build_spline, EndConditionKind};
use crate::error::{Result, SplineError};
use crate::mesh::{fmt17, Mesh};
use crate::spline::CubicSpline;

/// Knot counts of the standard tables.
pub const TABLE_KNOTS: [usize; 5] = [6, 12, 24, 48, 96];
pub const DEFAULT_SEED: u64 = 1;

const TABLE_CONDITIONS: [EndConditionKind; 4] = [
    EndConditionKind::Natural,
    EndConditionKind::NotAKnot,
    EndConditionKind::QSpline,
    EndConditionKind::Rnak,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MeshKind {
    Equidistant,
    Random { seed: u64 },
}

impl MeshKind {
    /// Mesh with `knots` knots on `[a, b]`.
    pub fn build(&self, a: f64, b: f64, knots: usize) -> Result<Mesh> {
        let n = knots.checked_sub(1).ok_or(SplineError::ZeroIntervals)?;
        match *self {
            MeshKind::Equidistant => Mesh::equidistant(a, b, n),
            MeshKind::Random { seed } => Mesh::random_uniform(a, b, n, seed),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match *self {
            MeshKind::Equidistant => None,
            MeshKind::Random { seed } => Some(seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub function: String,
    pub interval: (f64, f64),
    pub knots: Vec<usize>,
    pub mesh: MeshKind,
    pub end_conditions: Vec<EndConditionKind>,
    pub samples_per_interval: usize,
}

impl ExperimentSpec {
    /// One of the five standard error tables. Tables 3 and 4 use random meshes
    /// drawn with `seed` (default [`DEFAULT_SEED`]); the others ignore it.
    pub fn standard_table(id: u8, seed: Option<u64>) -> Result<Self> {
        let random = MeshKind::Random {
            seed: seed.unwrap_or(DEFAULT_SEED),
        };
        let (function, interval, mesh) = match id {
            1 => ("sin", (0.0, PI), MeshKind::Equidistant),
            2 => ("sin", (PI / 4.0, 5.0 * PI / 4.0), MeshKind::Equidistant),
            3 => ("sin", (PI / 4.0, 5.0 * PI / 4.0), random),
            4 => ("runge", (-1.0, 3.0), random),
            5 => ("logistic", (-1.0, 4.0), MeshKind::Equidistant),
            _ => {
                return Err(SplineError::InvalidParameter(format!(
                    "table id {id} is not in 1..=5"
                )))
            }
        };
        Ok(Self {
            function: function.into(),
            interval,
            knots: TABLE_KNOTS.to_vec(),
            mesh,
            end_conditions: TABLE_CONDITIONS.to_vec(),
            samples_per_interval: DEFAULT_SAMPLES_PER_INTERVAL,
        })
    }

    pub fn validate(&self) -> Result<TestFunction> {
        let f = TestFunction::lookup(&self.function)?;
        let (a, b) = self.interval;
        if a >= b || !a.is_finite() || !b.is_finite() {
            return Err(SplineError::DegenerateInterval { a, b });
        }
        if self.knots.is_empty() || self.end_conditions.is_empty() {
            return Err(SplineError::InvalidParameter(
                "need at least one knot count and one end condition".into(),
            ));
        }
        if let Some(&k) = self.knots.iter().find(|&&k| k < 6) {
            return Err(SplineError::InvalidParameter(format!(
                "knot count {k} is below the minimum of 6"
            )));
        }
        if self.samples_per_interval < 2 {
            return Err(SplineError::InvalidParameter(
                "samples per interval must be at least 2".into(),
            ));
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshFingerprint {
    pub knots: usize,
    pub seed: Option<u64>,
    pub hash: String,
    pub h_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    /// `errors[e][k]` for end condition `e` and knot count `k`.
    pub errors: Vec<Vec<f64>>,
    /// A-priori bound for the same cell, where one is known.
    pub bounds: Vec<Vec<Option<BoundReport>>>,
    pub meshes: Vec<MeshFingerprint>,
}

impl ExperimentResult {
    pub fn error(&self, ec: EndConditionKind, knots: usize) -> Option<f64> {
        let e = self.spec.end_conditions.iter().position(|k| *k == ec)?;
        let k = self.spec.knots.iter().position(|k| *k == knots)?;
        Some(self.errors[e][k])
    }

    /// Wide layout: one row per end condition, one column per knot count.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("end_condition");
        for k in &self.spec.knots {
            let _ = write!(out, ",{k}");
        }
        out.push('\n');
        for (ec, row) in self.spec.end_conditions.iter().zip(&self.errors) {
            out.push_str(ec.as_str());
            for e in row {
                let _ = write!(out, ",{}", fmt17(*e));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

/// Builds the spline of `f` on `mesh`; clamped kinds take exact end derivatives.
pub fn build_for(f: &TestFunction, mesh: &Mesh, kind: EndConditionKind) -> Result<CubicSpline> {
    let ends = match kind {
        EndConditionKind::ClampedFirst => f.end_values(1, mesh.first(), mesh.last()),
        EndConditionKind::ClampedSecond => f.end_values(2, mesh.first(), mesh.last()),
        _ => None,
    };
    build_spline(mesh, &f.sample(mesh.knots()), kind.with_ends(ends)?)
}

/// A-priori bound for a cell, where one applies: clamped kinds use the
/// clamped bound, the natural spline is treated as R-approximate with the
/// exact `R = max|f''(end)| / (M4 h^2)`, and the Q-spline uses its own `R`.
pub fn cell_bound(f: &TestFunction, mesh: &Mesh, kind: EndConditionKind) -> Option<BoundReport> {
    let h = mesh.stats().h_max;
    let m4 = derivative_sup_norm(f.derivative(4), &[(mesh.first(), mesh.last())]);
    if !m4.is_finite() {
        return None;
    }
    match kind {
        EndConditionKind::ClampedFirst | EndConditionKind::ClampedSecond => {
            Some(bound_clamped(h, m4))
        }
        EndConditionKind::Natural => {
            let (l, r) = f.end_values(2, mesh.first(), mesh.last())?;
            let gap = l.abs().max(r.abs());
            let rr = if gap == 0.0 { 0.0 } else { gap / (m4 * h * h) };
            rr.is_finite().then(|| bound_r_approximate(h, m4, rr))
        }
        EndConditionKind::QSpline => {
            let x = mesh.knots();
            let n = x.len() - 1;
            let m5 = derivative_sup_norm(f.derivative(5), &[(x[0], x[4]), (x[n - 4], x[n])]);
            Some(bound_q_spline(h, m4, m5.is_finite().then_some(m5)))
        }
        _ => None,
    }
}

/// Fills the error matrix. Cells run in parallel; the result order follows the spec.
pub fn run_table(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let f = spec.validate()?;
    let (a, b) = spec.interval;
    type Column = (MeshFingerprint, Vec<f64>, Vec<Option<BoundReport>>);
    let columns: Vec<Column> = spec
        .knots
        .par_iter()
        .map(|&knots| -> Result<Column> {
            let mesh = spec.mesh.build(a, b, knots)?;
            let fp = MeshFingerprint {
                knots,
                seed: spec.mesh.seed(),
                hash: mesh.fingerprint(),
                h_max: mesh.stats().h_max,
            };
            let mut errs = Vec::with_capacity(spec.end_conditions.len());
            let mut bnds = Vec::with_capacity(spec.end_conditions.len());
            for &kind in &spec.end_conditions {
                let s = build_for(&f, &mesh, kind).map_err(|e| SplineError::Cell {
                    end_condition: kind.to_string(),
                    knots,
                    source: Box::new(e),
                })?;
                errs.push(sup_error(&s, |x| f.value(x), spec.samples_per_interval));
                bnds.push(cell_bound(&f, &mesh, kind));
            }
            Ok((fp, errs, bnds))
        })
        .collect::<Result<_>>()?;

    let rows = spec.end_conditions.len();
    let mut errors = vec![Vec::with_capacity(columns.len()); rows];
    let mut bounds = vec![Vec::with_capacity(columns.len()); rows];
    let mut meshes = Vec::with_capacity(columns.len());
    for (fp, errs, bnds) in columns {
        meshes.push(fp);
        for (e, (err, bnd)) in errs.into_iter().zip(bnds).enumerate() {
            errors[e].push(err);
            bounds[e].push(bnd);
        }
    }
    Ok(ExperimentResult {
        spec: spec.clone(),
        errors,
        bounds,
        meshes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceResult {
    pub function: String,
    pub interval: (f64, f64),
    pub end_condition: EndConditionKind,
    pub knots: Vec<usize>,
    pub h: Vec<f64>,
    pub errors: Vec<f64>,
    pub order: f64,
}

/// Errors on equidistant meshes and the fitted order.
pub fn run_convergence(
    function: &str,
    interval: (f64, f64),
    kind: EndConditionKind,
    knots: &[usize],
) -> Result<ConvergenceResult> {
    if knots.len() < 3 {
        return Err(SplineError::InvalidParameter(
            "need at least three knot counts".into(),
        ));
    }
    let spec = ExperimentSpec {
        function: function.into(),
        interval,
        knots: knots.to_vec(),
        mesh: MeshKind::Equidistant,
        end_conditions: vec![kind],
        samples_per_interval: DEFAULT_SAMPLES_PER_INTERVAL,
    };
    let table = run_table(&spec)?;
    let h: Vec<f64> = table.meshes.iter().map(|m| m.h_max).collect();
    let errors = table.errors[0].clone();
    let order = convergence_order(&errors, &h)?;
    Ok(ConvergenceResult {
        function: function.into(),
        interval,
        end_condition: kind,
        knots: knots.to_vec(),
        h,
        errors,
        order,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Figure {
    /// Exact eigen-solutions on the unit mesh.
    Fig1,
    /// Floating forward propagation of the decaying seed on the unit mesh.
    Fig2,
    /// Growing seeds on an irregular mesh, one from each end.
    Fig3,
}

impl Figure {
    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Figure::Fig1),
            2 => Ok(Figure::Fig2),
            3 => Ok(Figure::Fig3),
            _ => Err(SplineError::InvalidParameter(format!(
                "figure id {id} is not in 1..=3"
            ))),
        }
    }

    /// Additive floor inside the logarithm of the plotted magnitude.
    pub fn log_floor(&self) -> f64 {
        match self {
            Figure::Fig2 => f64::EPSILON,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditioningDataset {
    pub figure: Figure,
    pub series: Vec<(String, ConditioningTrace)>,
}

impl ConditioningDataset {
    pub fn trace(&self, name: &str) -> Option<&ConditioningTrace> {
        self.series.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    /// Long layout: `series,i,x_i,b_i,c_i,d_i,log_abs_b`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("series,i,x_i,b_i,c_i,d_i,log_abs_b\n");
        for (name, t) in &self.series {
            for line in t.to_csv_with_floor(self.figure.log_floor()).lines().skip(1) {
                let _ = writeln!(out, "{name},{line}");
            }
        }
        out
    }
}

/// Traces for one of the three conditioning figures on `n` intervals.
/// The irregular mesh of `Fig3` is drawn on `[0, n]` from `seed`.
pub fn run_conditioning(figure: Figure, n: usize, seed: Option<u64>) -> Result<ConditioningDataset> {
    if n < 1 {
        return Err(SplineError::ZeroIntervals);
    }
    let unit = || Mesh::equidistant(0.0, n as f64, n);
    let series = match figure {
        Figure::Fig1 => vec![
            ("s1".to_string(), exact_eigenform(n, Seed::S1)),
            ("s2".to_string(), exact_eigenform(n, Seed::S2)),
        ],
        Figure::Fig2 => {
            let (b, c) = Seed::S2.initial();
            vec![("s2".to_string(), propagate(&unit()?, b, c, Direction::Forward))]
        }
        Figure::Fig3 => {
            let mesh = Mesh::random_uniform(0.0, n as f64, n, seed.unwrap_or(DEFAULT_SEED))?;
            // s'(end) = 1 and s''(end) = 2 sqrt 3 in the coordinate pointing into the mesh.
            vec![
                ("s1".to_string(), propagate(&mesh, 1.0, SQRT3, Direction::Forward)),
                ("s2".to_string(), propagate(&mesh, -1.0, SQRT3, Direction::Backward)),
            ]
        }
    };
    Ok(ConditioningDataset { figure, series })
}
