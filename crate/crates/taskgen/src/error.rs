use thiserror::Error;

#[derive(Debug, Error)]
pub enum TaskGenError {
    #[error(transparent)]
    Core(#[from] mixprior_core::Error),

    #[error("dimension must be at least 1")]
    ZeroDim,

    #[error("hidden width d' is required for network function kinds")]
    MissingHiddenDim,

    #[error("parameter block does not match kind/dim: {reason}")]
    BadParams { reason: String },

    #[error("generator precondition violated: {reason}")]
    Precondition { reason: String },

    #[error("{what} index {index} outside embedding table of {n} rows")]
    IndexOverflow {
        what: &'static str,
        index: i64,
        n: usize,
    },

    #[error("unsupported schema `{found}` (expected `{expected}`)")]
    SchemaMismatch { found: String, expected: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, TaskGenError>;
