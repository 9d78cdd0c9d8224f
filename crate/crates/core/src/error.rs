use thiserror::Error;

/// Errors raised by mesh construction, spline builds and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SplineError {
    #[error("degenerate interval: a = {a} must be strictly less than b = {b}")]
    DegenerateInterval { a: f64, b: f64 },

    #[error("interval count must be at least 1")]
    ZeroIntervals,

    #[error("knots must be finite and strictly increasing (violation at index {index})")]
    NotIncreasing { index: usize },

    #[error("need at least {needed} knots, got {got}")]
    TooFewKnots { needed: usize, got: usize },

    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("duplicate abscissa {0}")]
    DuplicateAbscissa(f64),

    #[error("x = {x} lies outside the domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("derivative order {0} is not supported (expected 0..=3)")]
    DerivativeOrder(usize),

    #[error("knot index {index} is not interior (valid range 1..={max})")]
    NotInterior { index: usize, max: usize },

    #[error("end-condition system is singular")]
    Singular,

    #[error("splines are defined on different meshes")]
    MeshMismatch,

    #[error("non-positive error value {0} cannot enter a log-log fit")]
    NonPositiveError(f64),

    #[error("unknown test function `{0}`")]
    UnknownFunction(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cell ({end_condition}, {knots} knots): {source}")]
    Cell {
        end_condition: String,
        knots: usize,
        #[source]
        source: Box<SplineError>,
    },
}

impl SplineError {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        match self {
            SplineError::Singular => true,
            SplineError::Cell { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, SplineError>;
