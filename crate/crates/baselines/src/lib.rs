//! Comparison predictors: gradient-descent fits within the hypothesis
//! classes, minimum-norm least squares, ridge regression, and the retrieval
//! baselines.

mod error;
mod gd;
mod linear;
mod retrieval;

pub use error::{BaselineError, Result};
pub use gd::{
    flat_to_params, gd_fit, init_params, mse_loss, params_to_flat, sse_gradient, FittedModel,
    GdOptions, DIVERGENCE_LIMIT, STREAM_GD_INIT,
};
pub use linear::{ols_min_norm, ridge_fit, SVD_RELATIVE_CUTOFF};
pub use retrieval::{
    estimate_bucket_weights,
    estimate_then_retrieve, oracle_weight_retrieve, recover_scalar_targets, retrieval_oracle,
    RetrievalOutcome,
};
