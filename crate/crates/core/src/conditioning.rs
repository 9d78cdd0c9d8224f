//! Propagation of zero-interpolating spline coefficients across intervals.
//!
//! On `[x_i, x_{i+1}]` a spline that vanishes at both knots has the form
//! `b_i t + c_i t^2 + d_i t^3`. Vanishing at `x_{i+1}` and C1/C2 continuity give
//! `d_i = -(b_i/h^2 + c_i/h)` and the step
//! `(b_{i+1}, c_{i+1}) = (-2 b_i - c_i h, -3 b_i / h - 2 c_i)`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mesh::{fmt17, Mesh};
use crate::spline::{BasisTriple, CubicSpline};

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

/// One interval of the transfer recurrence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferStep {
    pub h: f64,
}

impl TransferStep {
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[-2.0, -self.h], [-3.0 / self.h, -2.0]]
    }

    pub fn inverse(&self) -> [[f64; 2]; 2] {
        [[-2.0, self.h], [3.0 / self.h, -2.0]]
    }

    pub fn det(&self) -> f64 {
        let m = self.matrix();
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn forward(&self, b: f64, c: f64) -> (f64, f64) {
        apply(self.matrix(), b, c)
    }

    pub fn backward(&self, b: f64, c: f64) -> (f64, f64) {
        apply(self.inverse(), b, c)
    }

    /// Cubic coefficient forced by vanishing at the right end of the interval.
    pub fn closure_d(&self, b: f64, c: f64) -> f64 {
        -(b / (self.h * self.h) + c / self.h)
    }
}

fn apply(m: [[f64; 2]; 2], b: f64, c: f64) -> (f64, f64) {
    (m[0][0] * b + m[0][1] * c, m[1][0] * b + m[1][1] * c)
}

/// `[[-2, -1], [-3, -2]]`.
pub fn transfer_matrix_unit() -> [[f64; 2]; 2] {
    TransferStep { h: 1.0 }.matrix()
}

/// Eigenvalues of a real 2x2 matrix with real spectrum, ascending.
pub fn eigenvalues(m: [[f64; 2]; 2]) -> [f64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    // Larger-magnitude root first, then the other from the product to avoid cancellation.
    let big = tr / 2.0 + disc.copysign(tr);
    let small = if big != 0.0 { det / big } else { tr / 2.0 - disc };
    if big < small {
        [big, small]
    } else {
        [small, big]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arithmetic {
    Float,
    ExactEigenform,
}

/// Eigen-seeds on the unit mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Seed {
    /// `(b, c) = (1, sqrt 3)`, growing by `-(2 + sqrt 3)` per step.
    S1,
    /// `(b, c) = (1, -sqrt 3)`, decaying by `sqrt 3 - 2` per step.
    S2,
}

impl Seed {
    pub fn eigenvalue(&self) -> f64 {
        match self {
            Seed::S1 => -(2.0 + SQRT3),
            Seed::S2 => SQRT3 - 2.0,
        }
    }

    pub fn initial(&self) -> (f64, f64) {
        match self {
            Seed::S1 => (1.0, SQRT3),
            Seed::S2 => (1.0, -SQRT3),
        }
    }
}

/// Coefficients at every knot; `d` has one entry per interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditioningTrace {
    pub xs: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub direction: Direction,
    pub arithmetic: Arithmetic,
}

/// Runs the recurrence in floating point. For `Backward`, `(b0, c0)` are the
/// coefficients at the last knot.
pub fn propagate(mesh: &Mesh, b0: f64, c0: f64, direction: Direction) -> ConditioningTrace {
    let n = mesh.intervals();
    let mut b = vec![0.0; n + 1];
    let mut c = vec![0.0; n + 1];
    match direction {
        Direction::Forward => {
            (b[0], c[0]) = (b0, c0);
            for i in 0..n {
                (b[i + 1], c[i + 1]) = TransferStep { h: mesh.gap(i) }.forward(b[i], c[i]);
            }
        }
        Direction::Backward => {
            (b[n], c[n]) = (b0, c0);
            for i in (0..n).rev() {
                (b[i], c[i]) = TransferStep { h: mesh.gap(i) }.backward(b[i + 1], c[i + 1]);
            }
        }
    }
    let d = (0..n)
        .map(|i| TransferStep { h: mesh.gap(i) }.closure_d(b[i], c[i]))
        .collect();
    ConditioningTrace {
        xs: mesh.knots().to_vec(),
        b,
        c,
        d,
        direction,
        arithmetic: Arithmetic::Float,
    }
}

/// Closed-form eigen-powers on the unit mesh `0, 1, ..., n`.
pub fn exact_eigenform(n: usize, seed: Seed) -> ConditioningTrace {
    let lambda = seed.eigenvalue();
    let (_, c_ratio) = seed.initial();
    let b: Vec<f64> = (0..=n).map(|i| lambda.powi(i as i32)).collect();
    let c: Vec<f64> = b.iter().map(|v| c_ratio * v).collect();
    let d = b[..n].iter().zip(&c).map(|(b, c)| -(b + c)).collect();
    ConditioningTrace {
        xs: (0..=n).map(|i| i as f64).collect(),
        b,
        c,
        d,
        direction: Direction::Forward,
        arithmetic: Arithmetic::ExactEigenform,
    }
}

/// Per-step growth of the coefficient magnitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRates {
    /// Step numbers counted along the direction of travel.
    pub indices: Vec<usize>,
    pub ratios: Vec<f64>,
    /// Steps dropped because a magnitude was zero.
    pub skipped: usize,
    pub geometric_mean: Option<f64>,
}

impl GrowthRates {
    /// Geometric mean of the ratios at indices `>= from`.
    pub fn tail_geometric_mean(&self, from: usize) -> Option<f64> {
        geometric_mean(
            self.indices
                .iter()
                .zip(&self.ratios)
                .filter(|(i, _)| **i >= from)
                .map(|(_, r)| *r),
        )
    }
}

fn geometric_mean(it: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, k) = it.fold((0.0, 0usize), |(s, k), r| (s + r.ln(), k + 1));
    (k > 0).then(|| (sum / k as f64).exp())
}

impl ConditioningTrace {
    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    /// `max(|b_i|, |c_i|)`.
    pub fn magnitude(&self, i: usize) -> f64 {
        self.b[i].abs().max(self.c[i].abs())
    }

    /// Ratios of successive magnitudes in the direction of travel.
    pub fn growth_rates(&self) -> GrowthRates {
        let n = self.len();
        let order: Vec<usize> = match self.direction {
            Direction::Forward => (0..n).collect(),
            Direction::Backward => (0..n).rev().collect(),
        };
        let mut indices = Vec::new();
        let mut ratios = Vec::new();
        let mut skipped = 0;
        for (k, w) in order.windows(2).enumerate() {
            let (m0, m1) = (self.magnitude(w[0]), self.magnitude(w[1]));
            if m0 == 0.0 || m1 == 0.0 {
                skipped += 1;
                continue;
            }
            indices.push(k);
            ratios.push(m1 / m0);
        }
        let geometric_mean = geometric_mean(ratios.iter().copied());
        GrowthRates {
            indices,
            ratios,
            skipped,
            geometric_mean,
        }
    }

    /// Index of the smallest `|b_i|`.
    pub fn argmin_abs_b(&self) -> usize {
        self.b
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map_or(0, |(i, _)| i)
    }

    /// First index after which `|b_i|` increases for three consecutive steps.
    pub fn onset(&self) -> Option<usize> {
        let a: Vec<f64> = self.b.iter().map(|v| v.abs()).collect();
        (0..a.len().saturating_sub(3))
            .find(|&i| a[i + 1] > a[i] && a[i + 2] > a[i + 1] && a[i + 3] > a[i + 2])
    }

    /// `ln(|b_i| + floor)`; `floor = 1` and `floor = eps` give the two usual plots.
    pub fn log_abs_b(&self, floor: f64) -> Vec<f64> {
        self.b.iter().map(|v| (v.abs() + floor).ln()).collect()
    }

    /// Columns `i,x_i,b_i,c_i,d_i,log_abs_b` with `log_abs_b = ln|b_i|`;
    /// `d` is empty on the last row.
    pub fn to_csv(&self) -> String {
        self.to_csv_with_floor(0.0)
    }

    /// As [`Self::to_csv`] with `log_abs_b = ln(|b_i| + floor)`.
    pub fn to_csv_with_floor(&self, floor: f64) -> String {
        let mut out = String::from("i,x_i,b_i,c_i,d_i,log_abs_b\n");
        for i in 0..self.len() {
            let d = self.d.get(i).map_or(String::new(), |v| fmt17(*v));
            let _ = writeln!(
                out,
                "{i},{},{},{},{d},{}",
                fmt17(self.xs[i]),
                fmt17(self.b[i]),
                fmt17(self.c[i]),
                fmt17((self.b[i].abs() + floor).ln())
            );
        }
        out
    }
}

/// Coefficients `(b, c)` of the zero-data spline with end moments `(m0, mn)`
/// at the first and the last knot.
pub fn zero_spline_ends(mesh: &Mesh, m0: f64, mn: f64) -> Result<((f64, f64), (f64, f64))> {
    let zeros = vec![0.0; mesh.len()];
    let s = CubicSpline::clamped_second(mesh, &zeros, m0, mn)?;
    let n = mesh.intervals();
    let p0 = s.piece(0);
    let last = s.piece(n - 1);
    let h = mesh.gap(n - 1);
    Ok(((p0.b, p0.c), (last.eval(h, 1), last.eval(h, 2) / 2.0)))
}

/// Adds a multiple of the left zero-data spline to the natural spline so the
/// result still interpolates `ys` but exceeds `bound` in sup norm on the
/// sample grid. Returns the spline and the multiple used.
pub fn unbounded_witness(mesh: &Mesh, ys: &[f64], bound: f64) -> Result<(CubicSpline, f64)> {
    let t = BasisTriple::build(mesh, ys)?;
    let grid = sample_grid(mesh, 64);
    let sup = |s: &CubicSpline| grid.iter().map(|&x| s.value(x).abs()).fold(0.0, f64::max);
    let w = (bound.abs() + sup(&t.natural) + 1.0) / sup(&t.left);
    Ok((t.natural.add_scaled(&t.left, w)?, w))
}

fn sample_grid(mesh: &Mesh, per_interval: usize) -> Vec<f64> {
    let x = mesh.knots();
    let mut g: Vec<f64> = (0..mesh.intervals())
        .flat_map(|i| {
            (0..per_interval).map(move |j| x[i] + (x[i + 1] - x[i]) * j as f64 / per_interval as f64)
        })
        .collect();
    g.push(mesh.last());
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_matrix_spectrum() {
        let a = transfer_matrix_unit();
        assert_eq!(a, [[-2.0, -1.0], [-3.0, -2.0]]);
        let [l0, l1] = eigenvalues(a);
        assert!((l0 + 2.0 + SQRT3).abs() < 1e-12);
        assert!((l1 - (SQRT3 - 2.0)).abs() < 1e-12);
        assert!((l0 * l1 - 1.0).abs() < 1e-12);
        assert_eq!(SQRT3, 3.0_f64.sqrt());

        let (b, c) = TransferStep { h: 1.0 }.forward(1.0, SQRT3);
        assert!((b - l0).abs() < 1e-14 && (c - l0 * SQRT3).abs() < 1e-13);
    }

    #[test]
    fn steps_are_unimodular_and_invertible() {
        for h in [0.01, 0.3, 1.0, 2.5, 40.0] {
            let s = TransferStep { h };
            assert!((s.det() - 1.0).abs() < 1e-12);
            let (b, c) = s.backward(0.7, -1.3);
            let (b2, c2) = s.forward(b, c);
            assert!((b2 - 0.7).abs() < 1e-12 && (c2 + 1.3).abs() < 1e-12);
        }
    }

    #[test]
    fn step_matches_two_knot_spline() {
        for (h, b0, c0) in [(0.4, 1.0, -0.3), (2.0, -0.5, 0.25), (1.0, 1.0, SQRT3)] {
            let step = TransferStep { h };
            let (b1, c1) = step.forward(b0, c0);
            let d = step.closure_d(b0, c0);
            let mesh = Mesh::new(vec![0.0, h]).unwrap();
            let s = CubicSpline::clamped_second(&mesh, &[0.0, 0.0], 2.0 * c0, 2.0 * c0 + 6.0 * d * h)
                .unwrap();
            assert!((s.piece(0).b - b0).abs() < 1e-12);
            assert!((s.eval(h, 1).unwrap() - b1).abs() < 1e-12);
            assert!((s.eval(h, 2).unwrap() / 2.0 - c1).abs() < 1e-12);
        }
    }

    #[test]
    fn s1_first_derivative_at_x1() {
        let t = propagate(&Mesh::equidistant(0.0, 3.0, 3).unwrap(), 1.0, SQRT3, Direction::Forward);
        assert!((t.b[1] + 2.0 + SQRT3).abs() < 1e-14);
        assert!((t.b[1] - (1.0 + 2.0 * SQRT3 - 3.0 * (1.0 + SQRT3))).abs() < 1e-14);
    }

    #[test]
    fn forward_s1_tracks_eigenpowers() {
        let mesh = Mesh::equidistant(0.0, 20.0, 20).unwrap();
        let t = propagate(&mesh, 1.0, SQRT3, Direction::Forward);
        let lam = -(2.0 + SQRT3);
        for i in 0..=20 {
            let want = lam.powi(i as i32);
            assert!((t.b[i] - want).abs() <= 1e-10 * want.abs(), "{i}");
        }
        for i in 0..20 {
            assert!((t.d[i] + t.b[i] + t.c[i]).abs() <= 1e-12 * t.magnitude(i));
        }
    }

    #[test]
    fn exact_forms() {
        let s1 = exact_eigenform(50, Seed::S1);
        assert!((s1.b[50].abs().ln() - 50.0 * (2.0 + SQRT3).ln()).abs() < 1e-10);
        assert!((s1.b[50].abs() / (2.0 + SQRT3).powi(50) - 1.0).abs() < 1e-8);
        assert!((s1.b[50].abs() / 4.0e28 - 1.0).abs() < 0.02);
        let s2 = exact_eigenform(50, Seed::S2);
        assert!((s2.b[50] * s1.b[50] - 1.0).abs() < 1e-10);
        assert_eq!((s1.b[0], s1.c[0]), Seed::S1.initial());
        for r in s1.growth_rates().ratios {
            assert!((r - (2.0 + SQRT3)).abs() < 1e-10);
        }
    }

    #[test]
    fn s2_forward_is_unstable_backward_is_not() {
        let mesh = Mesh::equidistant(0.0, 50.0, 50).unwrap();
        let fwd = propagate(&mesh, 1.0, -SQRT3, Direction::Forward);
        let k = fwd.argmin_abs_b();
        assert!((13..=22).contains(&k), "argmin {k}");
        let onset = fwd.onset().unwrap();
        assert!(onset.abs_diff(k) <= 2);
        let g = fwd.growth_rates().tail_geometric_mean(k).unwrap();
        assert!((3.0..=4.5).contains(&g), "{g}");

        let exact = exact_eigenform(50, Seed::S2);
        let back = propagate(&mesh, exact.b[50], exact.c[50], Direction::Backward);
        for i in 0..=50 {
            assert!((back.b[i] - exact.b[i]).abs() <= 1e-9 * exact.b[i].abs(), "{i}");
        }
    }

    #[test]
    fn zero_trace_is_flagged() {
        let t = propagate(&Mesh::equidistant(0.0, 5.0, 5).unwrap(), 0.0, 0.0, Direction::Forward);
        let g = t.growth_rates();
        assert!(g.ratios.is_empty() && g.skipped == 5 && g.geometric_mean.is_none());
    }

    #[test]
    fn zero_spline_end_values_agree_with_propagation() {
        let mesh = Mesh::new(vec![0.0, 0.6, 1.1, 2.0, 2.3, 3.1, 4.0]).unwrap();
        let (left, right) = zero_spline_ends(&mesh, 0.0, 1.0).unwrap();
        let back = propagate(&mesh, right.0, right.1, Direction::Backward);
        assert!((back.b[0] - left.0).abs() < 1e-10);
        assert!((back.c[0] - left.1).abs() < 1e-10);
    }

    #[test]
    fn witness_exceeds_bound_and_interpolates() {
        let mesh = Mesh::equidistant(0.0, 1.0, 8).unwrap();
        let ys: Vec<f64> = mesh.knots().iter().map(|x| x.sin()).collect();
        for bound in [1.0, 1e3, 1e8] {
            let (s, _) = unbounded_witness(&mesh, &ys, bound).unwrap();
            let sup = sample_grid(&mesh, 64).iter().map(|&x| s.value(x).abs()).fold(0.0, f64::max);
            assert!(sup > bound);
            for (x, y) in mesh.knots().iter().zip(&ys) {
                assert!((s.value(*x) - y).abs() <= 1e-9 * bound.max(1.0));
            }
        }
    }

    #[test]
    fn csv_layout() {
        let t = exact_eigenform(3, Seed::S2);
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "i,x_i,b_i,c_i,d_i,log_abs_b");
        assert_eq!(lines.len(), 5);
        assert!(lines[4].split(',').nth(4).unwrap().is_empty());
    }
}
