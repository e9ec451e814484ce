use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FinslerError {
    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("vector is zero; tensor undefined there")]
    ZeroVector,

    #[error("covector is zero; dual tensor undefined there")]
    ZeroCovector,

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("geodesic step failure: {0}")]
    StepFailure(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("query point is not reached by a minimal geodesic: {0}")]
    NonMinimal(String),

    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("function is not strictly positive: {0}")]
    NonPositive(String),

    #[error("insufficient regularity: {0}")]
    InsufficientRegularity(String),

    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),

    #[error("curvature hypothesis not certified: {0}")]
    HypothesisNotMet(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, FinslerError>;

impl From<std::io::Error> for FinslerError {
    fn from(e: std::io::Error) -> Self {
        FinslerError::Io(e.to_string())
    }
}

impl From<csv::Error> for FinslerError {
    fn from(e: csv::Error) -> Self {
        FinslerError::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for FinslerError {
    fn from(e: serde_json::Error) -> Self {
        FinslerError::Parse(e.to_string())
    }
}
