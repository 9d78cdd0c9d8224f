//! A-priori error bounds and measured-error utilities.

use serde::{Deserialize, Serialize};

use crate::divdiff::DividedDiffTable;
use crate::error::{Result, SplineError};
use crate::spline::CubicSpline;

/// Upper limit on `R` in the fourth-order bounds.
pub const R_CAP: f64 = 11.0 / 6.0;
/// `R` for end moments from the four-point cubic estimate.
pub const R_CUBIC_ESTIMATE: f64 = 11.0 / 12.0;
pub const CLAMPED_CONSTANT: f64 = 5.0 / 384.0;
pub const DEFAULT_SAMPLES_PER_INTERVAL: usize = 256;
pub const DERIVATIVE_SAMPLES: usize = 2048;

/// Which arm of a `min{...}` produced `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundBranch {
    /// No minimum involved.
    Fixed,
    /// The `11/6` cap was smaller.
    Cap,
    /// The derivative-ratio arm was smaller (or equal).
    Ratio,
    /// `M5` unavailable, cap used.
    NoFifthDerivative,
    /// `M4 = 0`, so `R = 0`.
    ZeroFourthDerivative,
}

/// Interior or boundary interval of the piecewise-cubic approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Interior,
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub constant: f64,
    #[serde(rename = "R")]
    pub r: Option<f64>,
    pub h: f64,
    #[serde(rename = "M4")]
    pub m4: f64,
    /// `None` means unavailable, read as infinite.
    #[serde(rename = "M5")]
    pub m5: Option<f64>,
    pub value: f64,
    pub branch: BoundBranch,
}

impl BoundReport {
    fn fixed(constant: f64, h: f64, m4: f64) -> Self {
        Self {
            constant,
            r: None,
            h,
            m4,
            m5: None,
            value: constant * m4 * h.powi(4),
            branch: BoundBranch::Fixed,
        }
    }

    fn with_r(h: f64, m4: f64, r: f64, m5: Option<f64>, branch: BoundBranch) -> Self {
        Self {
            constant: CLAMPED_CONSTANT,
            r: Some(r),
            h,
            m4,
            m5,
            value: (CLAMPED_CONSTANT + r / 8.0) * m4 * h.powi(4),
            branch,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bound report serializes")
    }
}

/// `(5/384) M4 h^4`, for clamped and clamped natural splines.
pub fn bound_clamped(h: f64, m4: f64) -> BoundReport {
    BoundReport::fixed(CLAMPED_CONSTANT, h, m4)
}

/// `3/128` (interior) or `1/24` (boundary) times `M4 h^4`.
pub fn bound_piecewise_cubic(h: f64, m4: f64, region: Region) -> BoundReport {
    let constant = match region {
        Region::Interior => 3.0 / 128.0,
        Region::Boundary => 1.0 / 24.0,
    };
    BoundReport::fixed(constant, h, m4)
}

/// `(5/384 + R/8) M4 h^4` for an R-approximate clamped natural spline.
pub fn bound_r_approximate(h: f64, m4: f64, r: f64) -> BoundReport {
    BoundReport::with_r(h, m4, r, None, BoundBranch::Fixed)
}

/// `min{11/6, 5 h M5 / (12 M4)}` with the active arm.
pub fn r_quartic_branch(h: f64, m4: f64, m5: Option<f64>) -> (f64, BoundBranch) {
    if m4 == 0.0 {
        return (0.0, BoundBranch::ZeroFourthDerivative);
    }
    match m5.filter(|v| v.is_finite()) {
        None => (R_CAP, BoundBranch::NoFifthDerivative),
        Some(m5) => {
            let ratio = 5.0 * h * m5 / (12.0 * m4);
            if ratio <= R_CAP {
                (ratio, BoundBranch::Ratio)
            } else {
                (R_CAP, BoundBranch::Cap)
            }
        }
    }
}

pub fn r_quartic(h: f64, m4: f64, m5: Option<f64>) -> f64 {
    r_quartic_branch(h, m4, m5).0
}

/// Bound for the Q-spline. `m5` is taken over the end regions
/// `[x_0, x_4]` and `[x_{n-4}, x_n]`.
pub fn bound_q_spline(h: f64, m4: f64, m5: Option<f64>) -> BoundReport {
    let (r, branch) = r_quartic_branch(h, m4, m5);
    BoundReport::with_r(h, m4, r, m5.filter(|v| v.is_finite()), branch)
}

/// `R` estimated from the fourth and fifth divided differences over `x_0..x_5`.
pub fn r_heuristic_branch(table: &DividedDiffTable) -> Result<(f64, BoundBranch)> {
    let pts = table.points();
    if pts.len() < 6 {
        return Err(SplineError::TooFewKnots {
            needed: 6,
            got: pts.len(),
        });
    }
    let f4 = table.leading(4).abs();
    let f5 = table.leading(5).abs();
    if f4 == 0.0 {
        return Ok((R_CAP, BoundBranch::Cap));
    }
    let h = pts[..6]
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    let ratio = 25.0 * h * f5 / (12.0 * f4);
    Ok(if ratio <= R_CAP {
        (ratio, BoundBranch::Ratio)
    } else {
        (R_CAP, BoundBranch::Cap)
    })
}

pub fn r_heuristic(table: &DividedDiffTable) -> Result<f64> {
    Ok(r_heuristic_branch(table)?.0)
}

/// `max |s - f|` over the knots and `samples_per_interval` equispaced points
/// per interval.
pub fn sup_error(s: &CubicSpline, f: impl Fn(f64) -> f64, samples_per_interval: usize) -> f64 {
    let m = samples_per_interval.max(2);
    let xs = s.mesh().knots();
    let mut worst = 0.0_f64;
    for (i, p) in s.pieces().iter().enumerate() {
        let h = xs[i + 1] - xs[i];
        for j in 0..m {
            let t = h * j as f64 / m as f64;
            worst = worst.max((p.eval(t, 0) - f(xs[i] + t)).abs());
        }
    }
    worst.max((s.last_value() - f(xs[xs.len() - 1])).abs())
}

/// Least-squares slope of `ln(error)` against `ln(h)`.
pub fn convergence_order(errors: &[f64], hs: &[f64]) -> Result<f64> {
    if errors.len() != hs.len() {
        return Err(SplineError::LengthMismatch {
            expected: hs.len(),
            got: errors.len(),
        });
    }
    if errors.len() < 2 {
        return Err(SplineError::InvalidParameter(
            "need at least two (h, error) pairs".into(),
        ));
    }
    if let Some(&e) = errors.iter().find(|e| e.is_nan() || **e <= 0.0) {
        return Err(SplineError::NonPositiveError(e));
    }
    if let Some(&h) = hs.iter().find(|h| h.is_nan() || **h <= 0.0) {
        return Err(SplineError::InvalidParameter(format!("mesh size {h} must be positive")));
    }
    let n = errors.len() as f64;
    let lx: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(SplineError::InvalidParameter("all mesh sizes are equal".into()));
    }
    Ok(sxy / sxx)
}

/// `max |g|` over `DERIVATIVE_SAMPLES + 1` equispaced points of each domain.
/// An unavailable derivative yields infinity.
pub fn derivative_sup_norm(g: Option<fn(f64) -> f64>, domains: &[(f64, f64)]) -> f64 {
    derivative_sup_norm_with(g, domains, DERIVATIVE_SAMPLES)
}

pub fn derivative_sup_norm_with(
    g: Option<fn(f64) -> f64>,
    domains: &[(f64, f64)],
    samples: usize,
) -> f64 {
    let Some(g) = g else {
        return f64::INFINITY;
    };
    let samples = samples.max(1);
    domains
        .iter()
        .flat_map(|&(a, b)| (0..=samples).map(move |j| a + (b - a) * j as f64 / samples as f64))
        .map(|x| g(x).abs())
        .fold(0.0, f64::max)
}
