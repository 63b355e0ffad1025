use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("formula structure violation: {0}")]
    StructureViolation(String),

    #[error("internal disagreement: {0}")]
    Disagreement(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("sample outside documented range: {0}")]
    RangeViolation(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
