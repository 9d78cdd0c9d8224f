//! Test functions, error tables, convergence studies and conditioning datasets.

mod experiments;
mod functions;

pub use experiments::{
    build_for, cell_bound, run_conditioning, run_convergence, run_table, ConditioningDataset,
    ConvergenceResult, ExperimentResult, ExperimentSpec, Figure, MeshFingerprint, MeshKind,
    DEFAULT_SEED, TABLE_KNOTS,
};
pub use functions::TestFunction;
