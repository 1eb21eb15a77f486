//! Mixed-Gaussian pretraining priors and the closed-form Bayes-optimal
//! in-context predictor.
//!
//! A pretraining sequence is generated by drawing a mixture component, then an
//! input mean and a task weight around its centers, then noisy linear
//! regression pairs. Given a downstream context, the optimally pretrained
//! predictor reduces to reweighting the components with two log-evidence
//! terms (input proximity and label fit) and averaging the per-component
//! conjugate ridge means. This crate holds those types and computations;
//! independent brute-force oracles for them live in `theory-verify`.

mod accum;
mod context;
mod error;
mod hyper;
mod mixture;
mod posterior;
mod rng;
mod sample;
mod serde_vec;

pub use accum::{canonical_outer_sum, canonical_sum, canonical_vector_sum};
pub use context::ContextSequence;
pub use error::{Error, Result};
pub use hyper::Hyper;
pub use mixture::{Component, MixturePrior, PI_SUM_TOL, UNIT_NORM_TOL};
pub use posterior::{
    log_evidence_mu, log_evidence_w, posterior, posterior_w_mean, weight_ratio, PosteriorSummary,
    WeightRatio,
};
pub use rng::substream;
pub use sample::{sample_pretrain_sequence, PretrainDraw, STREAM_PRETRAIN};
