//! Shared fixtures for the criterion benches.
use qspline_core::{Mesh, Result};

/// Knot counts swept by the build and eval benches.
pub const SIZES: [usize; 3] = [16, 256, 4096];

/// Random mesh on `[0, 1]` with `sin(2πx)` ordinates.
pub fn fixture(intervals: usize, seed: u64) -> Result<(Mesh, Vec<f64>)> {
    let mesh = Mesh::random_uniform(0.0, 1.0, intervals, seed)?;
    let ys = mesh
        .knots()
        .iter()
        .map(|x| (std::f64::consts::TAU * x).sin())
        .collect();
    Ok((mesh, ys))
}

/// `count` evaluation points spread over `[0, 1]`, endpoints included.
pub fn eval_points(count: usize) -> Vec<f64> {
    (0..count).map(|j| j as f64 / (count - 1) as f64).collect()
}
