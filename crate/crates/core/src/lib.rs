//! Cubic spline interpolation with natural, clamped, not-a-knot, Q-spline and
//! revised not-a-knot end conditions, a-priori error bounds, a conditioning
//! lab for the end-condition recurrences, and an experiment harness.
//!
//! ```
//! use qspline_core::{build_spline, EndCondition, Mesh};
//!
//! let mesh = Mesh::equidistant(0.0, std::f64::consts::PI, 11).unwrap();
//! let ys: Vec<f64> = mesh.knots().iter().map(|x| x.sin()).collect();
//! let s = build_spline(&mesh, &ys, EndCondition::QSpline).unwrap();
//! assert!((s.eval(1.0, 0).unwrap() - 1.0_f64.sin()).abs() < 1e-4);
//! ```

pub mod bounds;
pub mod conditioning;
pub mod divdiff;
pub mod end_conditions;
pub mod error;
pub mod harness;
pub mod mesh;
pub mod spline;

pub use bounds::{BoundBranch, BoundReport, Region};
pub use conditioning::{ConditioningTrace, Direction, Seed, TransferStep};
pub use divdiff::{DividedDiffTable, End, NewtonPoly};
pub use end_conditions::{build_spline, EndCondition, EndConditionKind, RnakJumpReport};
pub use error::{Result, SplineError};
pub use harness::{ExperimentResult, ExperimentSpec, MeshKind, TestFunction};
pub use mesh::{Mesh, MeshStats};
pub use spline::{BasisTriple, CubicSpline, MomentSystem, MomentVector, Piece};
