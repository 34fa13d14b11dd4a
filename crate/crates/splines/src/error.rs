use thiserror::Error;

#[derive(Debug, Error)]
pub enum SplineError {
    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),
    #[error("invalid basis parameters: {0}")]
    InvalidBasis(String),
    #[error("evaluation point {0} outside [0, 1]")]
    OutOfDomain(f64),
}

pub type Result<T> = std::result::Result<T, SplineError>;
