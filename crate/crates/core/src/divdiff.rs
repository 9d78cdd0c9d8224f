//! Newton divided differences and the second-derivative estimators built on them.

use std::fmt::Write as _;

use crate::error::{Result, SplineError};
use crate::mesh::{fmt17, Mesh};

/// Which end of a point set an estimate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum End {
    Left,
    Right,
}

/// Triangular table; `columns[k][i]` holds `f[x_i, ..., x_{i+k}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DividedDiffTable {
    points: Vec<f64>,
    columns: Vec<Vec<f64>>,
}

impl DividedDiffTable {
    pub fn new(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(SplineError::LengthMismatch {
                expected: xs.len(),
                got: ys.len(),
            });
        }
        if xs.is_empty() {
            return Err(SplineError::TooFewKnots { needed: 1, got: 0 });
        }
        for (i, &a) in xs.iter().enumerate() {
            if xs[i + 1..].contains(&a) {
                return Err(SplineError::DuplicateAbscissa(a));
            }
        }

        let mut columns = Vec::with_capacity(xs.len());
        columns.push(ys.to_vec());
        for k in 1..xs.len() {
            let prev = &columns[k - 1];
            let col: Vec<f64> = (0..prev.len() - 1)
                .map(|i| (prev[i + 1] - prev[i]) / (xs[i + k] - xs[i]))
                .collect();
            columns.push(col);
        }
        Ok(Self {
            points: xs.to_vec(),
            columns,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Highest available order.
    pub fn order(&self) -> usize {
        self.columns.len() - 1
    }

    /// `f[x_i, ..., x_{i+k}]`.
    pub fn entry(&self, i: usize, k: usize) -> f64 {
        self.columns[k][i]
    }

    /// `f[x_0, ..., x_k]`.
    pub fn leading(&self, k: usize) -> f64 {
        self.columns[k][0]
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.columns[k]
    }

    /// Re-derives every entry from its two parents and compares bitwise.
    pub fn verify_recurrence(&self) -> bool {
        (1..self.columns.len()).all(|k| {
            let prev = &self.columns[k - 1];
            self.columns[k].iter().enumerate().all(|(i, &v)| {
                let again = (prev[i + 1] - prev[i]) / (self.points[i + k] - self.points[i]);
                again.to_bits() == v.to_bits()
            })
        })
    }

    pub fn newton_poly(&self) -> NewtonPoly {
        NewtonPoly {
            centers: self.points.clone(),
            coeffs: self.columns.iter().map(|c| c[0]).collect(),
        }
    }

    /// Debug dump: one row per point, columns are the table orders.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x");
        for k in 0..self.columns.len() {
            let _ = write!(out, ",order{k}");
        }
        out.push('\n');
        for (i, x) in self.points.iter().enumerate() {
            out.push_str(&fmt17(*x));
            for col in &self.columns {
                out.push(',');
                if let Some(v) = col.get(i) {
                    out.push_str(&fmt17(*v));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Polynomial in Newton form
/// `c_0 + c_1 (x - x_0) + c_2 (x - x_0)(x - x_1) + ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonPoly {
    centers: Vec<f64>,
    coeffs: Vec<f64>,
}

impl NewtonPoly {
    pub fn interpolate(xs: &[f64], ys: &[f64]) -> Result<Self> {
        Ok(DividedDiffTable::new(xs, ys)?.newton_poly())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_derivatives(x)[0]
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        self.eval_with_derivatives(x)[2]
    }

    /// `[p(x), p'(x), p''(x)]`, accumulated by the product rule through the
    /// nested Newton form.
    pub fn eval_with_derivatives(&self, x: f64) -> [f64; 3] {
        let k = self.coeffs.len() - 1;
        let (mut p0, mut p1, mut p2) = (self.coeffs[k], 0.0, 0.0);
        for j in (0..k).rev() {
            let t = x - self.centers[j];
            p2 = p2 * t + 2.0 * p1;
            p1 = p1 * t + p0;
            p0 = p0 * t + self.coeffs[j];
        }
        [p0, p1, p2]
    }
}

/// `prod_j (x - x_j)`.
pub fn omega(xs: &[f64], x: f64) -> f64 {
    xs.iter().map(|xj| x - xj).product()
}

/// Second derivative at one end of the interpolating polynomial through
/// exactly `arity` points. Points are re-ordered so that the evaluation
/// abscissa is the first Newton center.
fn end_second_derivative(xs: &[f64], ys: &[f64], end: End, arity: usize) -> Result<f64> {
    if xs.len() != arity || ys.len() != arity {
        return Err(SplineError::LengthMismatch {
            expected: arity,
            got: xs.len().max(ys.len()),
        });
    }
    if let Some(i) = xs.windows(2).position(|w| w[0] >= w[1]) {
        return Err(SplineError::NotIncreasing { index: i + 1 });
    }
    let (px, py, at): (Vec<f64>, Vec<f64>, f64) = match end {
        End::Left => (xs.to_vec(), ys.to_vec(), xs[0]),
        End::Right => (
            xs.iter().rev().copied().collect(),
            ys.iter().rev().copied().collect(),
            xs[arity - 1],
        ),
    };
    Ok(NewtonPoly::interpolate(&px, &py)?.second_derivative(at))
}

/// `p''` at the chosen end of the cubic through four points.
pub fn estimate_f2_cubic(xs: &[f64], ys: &[f64], end: End) -> Result<f64> {
    end_second_derivative(xs, ys, end, 4)
}

/// `p''` at the chosen end of the quartic through five points.
pub fn estimate_f2_quartic(xs: &[f64], ys: &[f64], end: End) -> Result<f64> {
    end_second_derivative(xs, ys, end, 5)
}

/// Local cubic interpolation: on interior intervals the cubic through
/// `x_{i-1}..x_{i+2}`, on the first/last interval the cubic through the
/// first/last four knots.
pub fn piecewise_cubic_eval(mesh: &Mesh, ys: &[f64], x: f64) -> Result<f64> {
    let n = mesh.intervals();
    if mesh.len() < 4 {
        return Err(SplineError::TooFewKnots {
            needed: 4,
            got: mesh.len(),
        });
    }
    if ys.len() != mesh.len() {
        return Err(SplineError::LengthMismatch {
            expected: mesh.len(),
            got: ys.len(),
        });
    }
    let xs = mesh.knots();
    let i = mesh.locate(x).ok_or(SplineError::OutOfDomain {
        x,
        lo: mesh.first(),
        hi: mesh.last(),
    })?;
    if x == xs[i] {
        return Ok(ys[i]);
    }
    if x == xs[i + 1] {
        return Ok(ys[i + 1]);
    }
    let start = i.saturating_sub(1).min(n - 3);
    let poly = NewtonPoly::interpolate(&xs[start..start + 4], &ys[start..start + 4])?;
    Ok(poly.eval(x))
}
