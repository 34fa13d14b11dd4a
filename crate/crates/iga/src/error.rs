use thiserror::Error;

#[derive(Debug, Error)]
pub enum IgaError {
    #[error(transparent)]
    Spline(#[from] splines::SplineError),
    #[error(transparent)]
    Tt(#[from] tt_core::TtError),
    #[error(transparent)]
    Cross(#[from] tt_cross::CrossError),
    #[error(transparent)]
    Solve(#[from] tt_solve::SolveError),
    #[error("invalid problem setup: {0}")]
    Invalid(String),
    #[error("geometry is degenerate: {0}")]
    Degenerate(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad solution file: {0}")]
    BadFile(String),
}

pub type Result<T> = std::result::Result<T, IgaError>;
