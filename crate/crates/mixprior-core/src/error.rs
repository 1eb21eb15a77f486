use thiserror::Error;

/// Errors produced by prior construction and posterior evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("hyperparameter `{name}` must be strictly positive and finite, got {value}")]
    InvalidHyper { name: &'static str, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("invalid mixture: {reason}")]
    InvalidMixture { reason: String },

    #[error("component index {index} out of range for mixture of size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("weight ratio requires two distinct components, got alpha = beta = {index}")]
    SameComponent { index: usize },

    #[error("unit-norm check failed for component {index}: ‖mu‖ = {mu_norm}, ‖w‖ = {w_norm}")]
    NotUnitNorm {
        index: usize,
        mu_norm: f64,
        w_norm: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
