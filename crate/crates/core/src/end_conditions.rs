//! End conditions and the builders that realise them.
//!
//! Everything expressible through end moments or third-derivative jumps goes
//! through [`BasisTriple`]: the final spline is `s_nat + alpha*s1 + beta*s2`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::divdiff::{estimate_f2_cubic, estimate_f2_quartic, DividedDiffTable, End};
use crate::error::{Result, SplineError};
use crate::mesh::Mesh;
use crate::spline::{BasisTriple, CubicSpline};

/// End condition with its payload.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EndCondition {
    Natural,
    /// Prescribed `s'(x_0)` and `s'(x_n)`.
    ClampedFirst { d0: f64, dn: f64 },
    /// Prescribed `s''(x_0)` and `s''(x_n)`.
    ClampedSecond { k0: f64, kn: f64 },
    NotAKnot,
    QSpline,
    Rnak { safeguard: bool },
}

impl EndCondition {
    pub fn kind(&self) -> EndConditionKind {
        match self {
            EndCondition::Natural => EndConditionKind::Natural,
            EndCondition::ClampedFirst { .. } => EndConditionKind::ClampedFirst,
            EndCondition::ClampedSecond { .. } => EndConditionKind::ClampedSecond,
            EndCondition::NotAKnot => EndConditionKind::NotAKnot,
            EndCondition::QSpline => EndConditionKind::QSpline,
            EndCondition::Rnak { safeguard: true } => EndConditionKind::Rnak,
            EndCondition::Rnak { safeguard: false } => EndConditionKind::RnakUnsafe,
        }
    }

    /// Smallest admissible interval count.
    pub fn min_intervals(&self) -> usize {
        match self {
            EndCondition::Natural
            | EndCondition::ClampedFirst { .. }
            | EndCondition::ClampedSecond { .. } => 1,
            EndCondition::NotAKnot => 3,
            EndCondition::QSpline | EndCondition::Rnak { .. } => 4,
        }
    }
}

/// End condition without payload, as named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndConditionKind {
    Natural,
    ClampedFirst,
    ClampedSecond,
    #[serde(rename = "nak")]
    NotAKnot,
    #[serde(rename = "q")]
    QSpline,
    Rnak,
    RnakUnsafe,
}

impl EndConditionKind {
    pub const ALL: [EndConditionKind; 7] = [
        EndConditionKind::Natural,
        EndConditionKind::ClampedFirst,
        EndConditionKind::ClampedSecond,
        EndConditionKind::NotAKnot,
        EndConditionKind::QSpline,
        EndConditionKind::Rnak,
        EndConditionKind::RnakUnsafe,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EndConditionKind::Natural => "natural",
            EndConditionKind::ClampedFirst => "clamped-first",
            EndConditionKind::ClampedSecond => "clamped-second",
            EndConditionKind::NotAKnot => "nak",
            EndConditionKind::QSpline => "q",
            EndConditionKind::Rnak => "rnak",
            EndConditionKind::RnakUnsafe => "rnak-unsafe",
        }
    }

    /// Row label used in error tables.
    pub fn label(&self) -> &'static str {
        match self {
            EndConditionKind::Natural => "NAT",
            EndConditionKind::ClampedFirst => "CLAMP1",
            EndConditionKind::ClampedSecond => "CLAMP2",
            EndConditionKind::NotAKnot => "NAK",
            EndConditionKind::QSpline => "Q",
            EndConditionKind::Rnak => "RNAK",
            EndConditionKind::RnakUnsafe => "RNAK0",
        }
    }

    pub fn needs_end_values(&self) -> bool {
        matches!(
            self,
            EndConditionKind::ClampedFirst | EndConditionKind::ClampedSecond
        )
    }

    /// Attaches the payload. Clamped kinds require `ends`; other kinds ignore it.
    pub fn with_ends(self, ends: Option<(f64, f64)>) -> Result<EndCondition> {
        let need = || {
            ends.ok_or_else(|| {
                SplineError::InvalidParameter(format!("`{self}` needs values at both ends"))
            })
        };
        Ok(match self {
            EndConditionKind::Natural => EndCondition::Natural,
            EndConditionKind::ClampedFirst => {
                let (d0, dn) = need()?;
                EndCondition::ClampedFirst { d0, dn }
            }
            EndConditionKind::ClampedSecond => {
                let (k0, kn) = need()?;
                EndCondition::ClampedSecond { k0, kn }
            }
            EndConditionKind::NotAKnot => EndCondition::NotAKnot,
            EndConditionKind::QSpline => EndCondition::QSpline,
            EndConditionKind::Rnak => EndCondition::Rnak { safeguard: true },
            EndConditionKind::RnakUnsafe => EndCondition::Rnak { safeguard: false },
        })
    }
}

impl fmt::Display for EndConditionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EndConditionKind {
    type Err = SplineError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == key)
            .ok_or_else(|| {
                SplineError::InvalidParameter(format!(
                    "unknown end condition `{s}` (expected one of natural, clamped-first, \
                     clamped-second, nak, q, rnak, rnak-unsafe)"
                ))
            })
    }
}

/// Builds the interpolating cubic spline of `ys` on `mesh` under `ec`.
pub fn build_spline(mesh: &Mesh, ys: &[f64], ec: EndCondition) -> Result<CubicSpline> {
    check_len(mesh, ys)?;
    require_intervals(mesh, ec.min_intervals())?;
    match ec {
        EndCondition::ClampedFirst { d0, dn } => CubicSpline::clamped_first(mesh, ys, d0, dn),
        EndCondition::Natural => CubicSpline::clamped_second(mesh, ys, 0.0, 0.0),
        EndCondition::ClampedSecond { k0, kn } => CubicSpline::clamped_second(mesh, ys, k0, kn),
        EndCondition::QSpline => {
            let (k0, kn) = q_end_values(mesh, ys)?;
            build_r_approximate(mesh, ys, k0, kn)
        }
        EndCondition::NotAKnot => build_with_jumps(mesh, ys, 0.0, 0.0),
        EndCondition::Rnak { safeguard } => {
            let left = rnak_jump(mesh, ys, End::Left, safeguard)?;
            let right = rnak_jump(mesh, ys, End::Right, safeguard)?;
            build_with_jumps(mesh, ys, left.delta, right.delta)
        }
    }
}

/// Clamped-second build with approximate end moments.
pub fn build_r_approximate(mesh: &Mesh, ys: &[f64], k0: f64, kn: f64) -> Result<CubicSpline> {
    if mesh.len() < 3 {
        return CubicSpline::clamped_second(mesh, ys, k0, kn);
    }
    BasisTriple::build(mesh, ys)?.combine(k0, kn)
}

/// End moments from the quartic through the first and the last five knots.
pub fn q_end_values(mesh: &Mesh, ys: &[f64]) -> Result<(f64, f64)> {
    end_estimates(mesh, ys, 5, estimate_f2_quartic)
}

/// End moments from the cubic through the first and the last four knots.
pub fn cubic_end_values(mesh: &Mesh, ys: &[f64]) -> Result<(f64, f64)> {
    end_estimates(mesh, ys, 4, estimate_f2_cubic)
}

fn end_estimates(
    mesh: &Mesh,
    ys: &[f64],
    points: usize,
    estimate: fn(&[f64], &[f64], End) -> Result<f64>,
) -> Result<(f64, f64)> {
    check_len(mesh, ys)?;
    require_intervals(mesh, points - 1)?;
    let x = mesh.knots();
    let m = x.len();
    let k0 = estimate(&x[..points], &ys[..points], End::Left)?;
    let kn = estimate(&x[m - points..], &ys[m - points..], End::Right)?;
    Ok((k0, kn))
}

/// Target third-derivative jump at `x_1` (left) or `x_{n-1}` (right).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RnakJumpReport {
    pub end: End,
    /// Fourth divided difference over the five end knots.
    pub rho_raw: f64,
    /// Fifth divided difference over the six end knots; `None` when fewer exist
    /// or the safeguard is off.
    pub f5: Option<f64>,
    /// True when the reduction step `f4 - 5 f5 (x_2 - x_1)` was applied.
    pub reduced: bool,
    pub rho_adjusted: f64,
    /// In `[0, 1]`; applied whether or not `reduced` holds.
    pub damping: f64,
    pub delta: f64,
}

/// RNAK jump target. The right end is the left rule applied to the mirrored
/// data `x -> -x`, under which the jump (right minus left limit) is invariant.
pub fn rnak_jump(mesh: &Mesh, ys: &[f64], end: End, safeguard: bool) -> Result<RnakJumpReport> {
    check_len(mesh, ys)?;
    require_intervals(mesh, 4)?;
    let take = mesh.len().min(6);
    let (xs, vs): (Vec<f64>, Vec<f64>) = match end {
        End::Left => (mesh.knots()[..take].to_vec(), ys[..take].to_vec()),
        End::Right => mesh
            .knots()
            .iter()
            .zip(ys)
            .rev()
            .take(take)
            .map(|(x, y)| (-x, *y))
            .unzip(),
    };
    let mut report = rnak_left(&xs, &vs, safeguard)?;
    report.end = end;
    Ok(report)
}

fn rnak_left(xs: &[f64], ys: &[f64], safeguard: bool) -> Result<RnakJumpReport> {
    let table = DividedDiffTable::new(xs, ys)?;
    let f4 = table.leading(4);
    let f5 = (safeguard && xs.len() >= 6).then(|| table.leading(5));

    let mut rho = f4;
    let mut reduced = false;
    let mut damping = 1.0;
    if let Some(f5) = f5 {
        if f4 * f5 > 0.0 {
            reduced = true;
            rho = f4 - 5.0 * f5 * (xs[2] - xs[1]);
            if rho * f4 < 0.0 {
                rho = 0.0;
            }
        }
        if f5 != 0.0 {
            damping = (f4.abs() / (5.0 * f5.abs() * (xs[4] - xs[0]))).min(1.0);
        }
    }
    Ok(RnakJumpReport {
        end: End::Left,
        rho_raw: f4,
        f5,
        reduced,
        rho_adjusted: rho,
        damping,
        delta: 12.0 * rho * (xs[2] - xs[0]) * damping,
    })
}

/// Spline whose third-derivative jumps at `x_1` and `x_{n-1}` equal the targets.
pub fn build_with_jumps(
    mesh: &Mesh,
    ys: &[f64],
    delta_left: f64,
    delta_right: f64,
) -> Result<CubicSpline> {
    check_len(mesh, ys)?;
    require_intervals(mesh, 3)?;
    let triple = BasisTriple::build(mesh, ys)?;
    let last = mesh.intervals() - 1;
    let jumps = |s: &CubicSpline| -> Result<[f64; 2]> {
        Ok([s.third_derivative_jump(1)?, s.third_derivative_jump(last)?])
    };
    let g0 = jumps(&triple.natural)?;
    let g1 = jumps(&triple.left)?;
    let g2 = jumps(&triple.right)?;
    let (alpha, beta) = solve_2x2(
        [[g1[0], g2[0]], [g1[1], g2[1]]],
        [delta_left - g0[0], delta_right - g0[1]],
    )?;
    triple.combine(alpha, beta)
}

/// Gaussian elimination with partial pivoting on a 2x2 system.
fn solve_2x2(a: [[f64; 2]; 2], r: [f64; 2]) -> Result<(f64, f64)> {
    let scale = a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    let (p, q) = if a[0][0].abs() >= a[1][0].abs() { (0, 1) } else { (1, 0) };
    if a[p][0] == 0.0 || !scale.is_finite() {
        return Err(SplineError::Singular);
    }
    let l = a[q][0] / a[p][0];
    let u = a[q][1] - l * a[p][1];
    if u.abs() <= 1e-13 * scale {
        return Err(SplineError::Singular);
    }
    let y = (r[q] - l * r[p]) / u;
    let x = (r[p] - a[p][1] * y) / a[p][0];
    Ok((x, y))
}

fn check_len(mesh: &Mesh, ys: &[f64]) -> Result<()> {
    if ys.len() != mesh.len() {
        return Err(SplineError::LengthMismatch {
            expected: mesh.len(),
            got: ys.len(),
        });
    }
    Ok(())
}

fn require_intervals(mesh: &Mesh, n: usize) -> Result<()> {
    if mesh.intervals() < n {
        return Err(SplineError::TooFewKnots {
            needed: n + 1,
            got: mesh.len(),
        });
    }
    Ok(())
}
