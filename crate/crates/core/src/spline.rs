//! Moment-based cubic splines.
//!
//! A spline is stored in local power form per interval,
//! `s(x) = a_i + b_i t + c_i t^2 + d_i t^3` with `t = x - x_i`,
//! and is usually constructed from its moments `M_i = s''(x_i)`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SplineError};
use crate::mesh::{fmt17, Mesh};

/// Coefficients of one cubic piece in local power form.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Piece {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Piece {
    /// k-th derivative at local offset `t`.
    #[inline]
    pub fn eval(&self, t: f64, k: usize) -> f64 {
        let Piece { a, b, c, d } = *self;
        match k {
            0 => a + t * (b + t * (c + t * d)),
            1 => b + t * (2.0 * c + 3.0 * d * t),
            2 => 2.0 * c + 6.0 * d * t,
            3 => 6.0 * d,
            _ => 0.0,
        }
    }

    fn scaled_add(&self, other: &Piece, w: f64) -> Piece {
        Piece {
            a: self.a + w * other.a,
            b: self.b + w * other.b,
            c: self.c + w * other.c,
            d: self.d + w * other.d,
        }
    }

    fn magnitude(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }
}

/// Second derivatives of a spline at its knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentVector(pub Vec<f64>);

impl MomentVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Solves a tridiagonal system by forward elimination and back substitution.
///
/// `sub[i]` multiplies `x[i-1]` in row `i` (so `sub[0]` is ignored) and
/// `sup[i]` multiplies `x[i+1]` (so the last entry is ignored).
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    debug_assert!(sub.len() == n && sup.len() == n && rhs.len() == n);
    if n == 0 {
        return Vec::new();
    }
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    x[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / m;
        x[i] = (rhs[i] - sub[i] * x[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

/// Interior rows `mu_i M_{i-1} + 2 M_i + lambda_i M_{i+1} = 6 f[x_{i-1}, x_i, x_{i+1}]`
/// for `i = 1..n-1`. Boundary rows are supplied at solve time.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSystem {
    mu: Vec<f64>,
    lambda: Vec<f64>,
    rhs: Vec<f64>,
}

impl MomentSystem {
    pub fn assemble(mesh: &Mesh, ys: &[f64]) -> Result<Self> {
        check_data(mesh, ys)?;
        if mesh.len() < 3 {
            return Err(SplineError::TooFewKnots {
                needed: 3,
                got: mesh.len(),
            });
        }
        let x = mesh.knots();
        let n = mesh.intervals();
        let mut mu = Vec::with_capacity(n - 1);
        let mut lambda = Vec::with_capacity(n - 1);
        let mut rhs = Vec::with_capacity(n - 1);
        for i in 1..n {
            let hl = x[i] - x[i - 1];
            let hr = x[i + 1] - x[i];
            let span = x[i + 1] - x[i - 1];
            mu.push(hl / span);
            lambda.push(hr / span);
            let dd2 = ((ys[i + 1] - ys[i]) / hr - (ys[i] - ys[i - 1]) / hl) / span;
            rhs.push(6.0 * dd2);
        }
        Ok(Self { mu, lambda, rhs })
    }

    /// Number of interior rows, `n - 1`.
    pub fn rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Solves with the boundary rows `M_0 = kappa_0`, `M_n = kappa_n`.
    pub fn solve(&self, kappa_0: f64, kappa_n: f64) -> MomentVector {
        let m = self.rows();
        let mut r = self.rhs.clone();
        r[0] -= self.mu[0] * kappa_0;
        r[m - 1] -= self.lambda[m - 1] * kappa_n;
        let inner = solve_tridiagonal(&self.mu, &vec![2.0; m], &self.lambda, &r);
        let mut moments = Vec::with_capacity(m + 2);
        moments.push(kappa_0);
        moments.extend(inner);
        moments.push(kappa_n);
        MomentVector(moments)
    }

    /// Product of the reduced square matrix (unknowns `M_1..M_{n-1}`) with `z`.
    pub fn apply_reduced(&self, z: &[f64]) -> Vec<f64> {
        let m = self.rows();
        assert_eq!(z.len(), m, "vector length must equal the number of interior rows");
        (0..m)
            .map(|i| {
                let mut v = 2.0 * z[i];
                if i > 0 {
                    v += self.mu[i] * z[i - 1];
                }
                if i + 1 < m {
                    v += self.lambda[i] * z[i + 1];
                }
                v
            })
            .collect()
    }

    /// Max-norm residual of a full moment vector against the interior rows.
    pub fn residual(&self, moments: &MomentVector) -> f64 {
        let m = moments.as_slice();
        (0..self.rows())
            .map(|i| {
                let lhs = self.mu[i] * m[i] + 2.0 * m[i + 1] + self.lambda[i] * m[i + 2];
                (lhs - self.rhs[i]).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Piecewise cubic on a mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicSpline {
    mesh: Mesh,
    pieces: Vec<Piece>,
    /// Value at the last knot, which no piece stores as its `a`.
    last_value: f64,
}

impl CubicSpline {
    pub fn from_pieces(mesh: Mesh, pieces: Vec<Piece>) -> Result<Self> {
        if pieces.len() != mesh.intervals() {
            return Err(SplineError::LengthMismatch {
                expected: mesh.intervals(),
                got: pieces.len(),
            });
        }
        let h = mesh.gap(pieces.len() - 1);
        let last_value = pieces[pieces.len() - 1].eval(h, 0);
        Ok(Self {
            mesh,
            pieces,
            last_value,
        })
    }

    /// Standard moment-to-coefficient conversion.
    pub fn from_moments(mesh: &Mesh, ys: &[f64], moments: &MomentVector) -> Result<Self> {
        check_data(mesh, ys)?;
        let m = moments.as_slice();
        if m.len() != mesh.len() {
            return Err(SplineError::LengthMismatch {
                expected: mesh.len(),
                got: m.len(),
            });
        }
        let pieces = (0..mesh.intervals())
            .map(|i| {
                let h = mesh.gap(i);
                Piece {
                    a: ys[i],
                    b: (ys[i + 1] - ys[i]) / h - h * (2.0 * m[i] + m[i + 1]) / 6.0,
                    c: m[i] / 2.0,
                    d: (m[i + 1] - m[i]) / (6.0 * h),
                }
            })
            .collect();
        Ok(Self {
            mesh: mesh.clone(),
            pieces,
            last_value: ys[ys.len() - 1],
        })
    }

    /// Interpolant with prescribed end second derivatives, solved directly.
    pub fn clamped_second(mesh: &Mesh, ys: &[f64], kappa_0: f64, kappa_n: f64) -> Result<Self> {
        if mesh.len() == 2 {
            check_data(mesh, ys)?;
            return Self::from_moments(mesh, ys, &MomentVector(vec![kappa_0, kappa_n]));
        }
        let sys = MomentSystem::assemble(mesh, ys)?;
        Self::from_moments(mesh, ys, &sys.solve(kappa_0, kappa_n))
    }

    /// Interpolant with prescribed end first derivatives. The first and last
    /// rows of the moment system come from the derivative conditions.
    pub fn clamped_first(mesh: &Mesh, ys: &[f64], slope_0: f64, slope_n: f64) -> Result<Self> {
        check_data(mesh, ys)?;
        let x = mesh.knots();
        let n = mesh.intervals();
        let mut sub = vec![0.0; n + 1];
        let mut diag = vec![2.0; n + 1];
        let mut sup = vec![0.0; n + 1];
        let mut rhs = vec![0.0; n + 1];

        let h0 = x[1] - x[0];
        sup[0] = 1.0;
        rhs[0] = 6.0 / h0 * ((ys[1] - ys[0]) / h0 - slope_0);
        for i in 1..n {
            let hl = x[i] - x[i - 1];
            let hr = x[i + 1] - x[i];
            let span = x[i + 1] - x[i - 1];
            sub[i] = hl / span;
            sup[i] = hr / span;
            rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / hr - (ys[i] - ys[i - 1]) / hl) / span;
        }
        let hn = x[n] - x[n - 1];
        sub[n] = 1.0;
        diag[n] = 2.0;
        rhs[n] = 6.0 / hn * (slope_n - (ys[n] - ys[n - 1]) / hn);

        let moments = solve_tridiagonal(&sub, &diag, &sup, &rhs);
        Self::from_moments(mesh, ys, &MomentVector(moments))
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn piece(&self, i: usize) -> &Piece {
        &self.pieces[i]
    }

    pub fn last_value(&self) -> f64 {
        self.last_value
    }

    /// k-th derivative at `x`; interior knots belong to the interval on their right.
    pub fn eval(&self, x: f64, k: usize) -> Result<f64> {
        if k > 3 {
            return Err(SplineError::DerivativeOrder(k));
        }
        if k == 0 && x == self.mesh.last() {
            return Ok(self.last_value);
        }
        let i = self.mesh.locate(x).ok_or(SplineError::OutOfDomain {
            x,
            lo: self.mesh.first(),
            hi: self.mesh.last(),
        })?;
        Ok(self.pieces[i].eval(x - self.mesh.knots()[i], k))
    }

    /// Value at `x`, clamped into the domain. Used on sample grids known to be in range.
    pub fn value(&self, x: f64) -> f64 {
        let xs = self.mesh.knots();
        let x = x.clamp(xs[0], xs[xs.len() - 1]);
        if x == xs[xs.len() - 1] {
            return self.last_value;
        }
        let i = self.mesh.locate(x).unwrap_or(0);
        self.pieces[i].eval(x - xs[i], 0)
    }

    /// Moments reconstructed from the pieces; `M_n` comes from the last piece.
    pub fn moments(&self) -> MomentVector {
        let n = self.pieces.len();
        let mut m: Vec<f64> = self.pieces.iter().map(|p| 2.0 * p.c).collect();
        m.push(self.pieces[n - 1].eval(self.mesh.gap(n - 1), 2));
        MomentVector(m)
    }

    /// Jump of `s'''` at interior knot `i`, right limit minus left limit.
    pub fn third_derivative_jump(&self, i: usize) -> Result<f64> {
        let n = self.mesh.intervals();
        if i == 0 || i >= n {
            return Err(SplineError::NotInterior {
                index: i,
                max: n.saturating_sub(1),
            });
        }
        Ok(6.0 * self.pieces[i].d - 6.0 * self.pieces[i - 1].d)
    }

    /// `integral of s''(x)^2`, exact since `s''` is linear on each piece.
    pub fn curvature_energy(&self) -> f64 {
        self.pieces
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let h = self.mesh.gap(i);
                let m0 = p.eval(0.0, 2);
                let m1 = p.eval(h, 2);
                h * (m0 * m0 + m0 * m1 + m1 * m1) / 3.0
            })
            .sum()
    }

    /// Largest relative mismatch of value, slope and curvature across interior
    /// knots, each scaled by the magnitude of the coefficients involved.
    pub fn continuity_defects(&self) -> [f64; 3] {
        let mut worst = [0.0_f64; 3];
        for i in 1..self.pieces.len() {
            let h = self.mesh.gap(i - 1);
            let (left, right) = (&self.pieces[i - 1], &self.pieces[i]);
            let scale = left.magnitude().max(right.magnitude()).max(f64::MIN_POSITIVE);
            let hs = 1.0_f64.max(h).powi(3);
            for (k, w) in worst.iter_mut().enumerate() {
                let gap = (left.eval(h, k) - right.eval(0.0, k)).abs();
                *w = w.max(gap / (scale * hs));
            }
        }
        worst
    }

    /// `self + w * other`, coefficient-wise.
    pub fn add_scaled(&self, other: &CubicSpline, w: f64) -> Result<CubicSpline> {
        if self.mesh != other.mesh {
            return Err(SplineError::MeshMismatch);
        }
        Ok(CubicSpline {
            mesh: self.mesh.clone(),
            pieces: self
                .pieces
                .iter()
                .zip(&other.pieces)
                .map(|(p, q)| p.scaled_add(q, w))
                .collect(),
            last_value: self.last_value + w * other.last_value,
        })
    }

    /// One row per interval: `x_i,a_i,b_i,c_i,d_i`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,a,b,c,d\n");
        for (x, p) in self.mesh.knots().iter().zip(&self.pieces) {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt17(*x),
                fmt17(p.a),
                fmt17(p.b),
                fmt17(p.c),
                fmt17(p.d)
            );
        }
        out
    }
}

/// Natural spline of the data plus the two zero-data splines with unit end moments.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisTriple {
    /// Natural spline of the data.
    pub natural: CubicSpline,
    /// Zero data, `M_0 = 1`, `M_n = 0`.
    pub left: CubicSpline,
    /// Zero data, `M_0 = 0`, `M_n = 1`.
    pub right: CubicSpline,
}

impl BasisTriple {
    pub fn build(mesh: &Mesh, ys: &[f64]) -> Result<Self> {
        check_data(mesh, ys)?;
        if mesh.len() < 3 {
            return Err(SplineError::TooFewKnots {
                needed: 3,
                got: mesh.len(),
            });
        }
        let sys = MomentSystem::assemble(mesh, ys)?;
        let zeros = vec![0.0; mesh.len()];
        let zero_sys = MomentSystem::assemble(mesh, &zeros)?;
        Ok(Self {
            natural: CubicSpline::from_moments(mesh, ys, &sys.solve(0.0, 0.0))?,
            left: CubicSpline::from_moments(mesh, &zeros, &zero_sys.solve(1.0, 0.0))?,
            right: CubicSpline::from_moments(mesh, &zeros, &zero_sys.solve(0.0, 1.0))?,
        })
    }

    /// `natural + alpha * left + beta * right`.
    pub fn combine(&self, alpha: f64, beta: f64) -> Result<CubicSpline> {
        combine(&self.natural, &self.left, &self.right, alpha, beta)
    }
}

/// `s_nat + alpha * s1 + beta * s2`, coefficient-wise.
pub fn combine(
    natural: &CubicSpline,
    s1: &CubicSpline,
    s2: &CubicSpline,
    alpha: f64,
    beta: f64,
) -> Result<CubicSpline> {
    natural.add_scaled(s1, alpha)?.add_scaled(s2, beta)
}

fn check_data(mesh: &Mesh, ys: &[f64]) -> Result<()> {
    if ys.len() != mesh.len() {
        return Err(SplineError::LengthMismatch {
            expected: mesh.len(),
            got: ys.len(),
        });
    }
    Ok(())
}
