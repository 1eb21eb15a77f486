use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error(transparent)]
    Core(#[from] mixprior_core::Error),

    #[error(transparent)]
    TaskGen(#[from] taskgen::TaskGenError),

    #[error(transparent)]
    Baseline(#[from] baselines::BaselineError),

    #[error("result table: {0}")]
    Table(String),

    #[error("attention matrix must be square T×T with T ≥ 2, got {rows}×{cols} for {tokens} tokens")]
    BadAttentionShape {
        rows: usize,
        cols: usize,
        tokens: usize,
    },

    #[error("attention row {row} is not stochastic over its causal support (sum {sum})")]
    NonStochasticRow { row: usize, sum: f64 },

    #[error("need at least one trial")]
    ZeroTrials,

    #[error("component index {index} out of range for {len} components")]
    BadComponent { index: usize, len: usize },
}

pub type Result<T> = std::result::Result<T, MetricsError>;
