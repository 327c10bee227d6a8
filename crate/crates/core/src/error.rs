use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum SinnError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Newton iteration for root {index} of P_{degree} did not converge (last correction {correction:e})")]
    NoConvergence {
        degree: usize,
        index: usize,
        correction: f64,
    },

    #[error("non-finite value at point {point}: {context}")]
    NonFinite { point: usize, context: String },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown case `{0}`")]
    UnknownCase(String),

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("optimizer aborted at iteration {iteration}: {reason}")]
    OptimizerAbort { iteration: usize, reason: String },

    #[error("bad checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, SinnError>;

pub(crate) fn invalid(msg: impl Into<String>) -> SinnError {
    SinnError::InvalidArgument(msg.into())
}
