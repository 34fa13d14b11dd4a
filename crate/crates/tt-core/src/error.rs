use thiserror::Error;

#[derive(Debug, Error)]
pub enum TtError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dense materialization needs {needed} entries, budget is {budget}")]
    BudgetExceeded { needed: usize, budget: usize },
    #[error("matrix is rank deficient to working precision")]
    RankDeficient,
    #[error("invalid container file: {0}")]
    Container(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TtError>;
