use thiserror::Error;
use tt_core::TtError;

pub type Result<T> = std::result::Result<T, SolveError>;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("operator/right-hand-side mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid solver options: {0}")]
    BadOptions(String),

    /// A core-wise (projected) system could not be solved reliably. For the
    /// dense path this means LU failed or its solution does not satisfy the
    /// system; for the iterative path it means GMRES made no progress.
    #[error("local system at core {core} is singular to working precision")]
    LocalSingular { core: usize },

    #[error("solver stalled: relative residual {residual:.3e} after {sweeps} sweeps")]
    NotConverged { residual: f64, sweeps: usize },

    #[error(transparent)]
    Core(#[from] TtError),
}
