//! Self-normalized importance-sampling oracle for the posterior prediction.
//!
//! Proposal = the generative prior itself: draw (m, mu, w), weight by the
//! likelihood of all T+1 inputs under N(mu, sigma_x² I) and of the T labels
//! under N(⟨x_i, w⟩, sigma_y²), and estimate E[⟨query, w⟩ | context]. This
//! shares no code path with the closed-form evidence computations.
//!
//! Samples are split into blocks with independent RNG substreams; the
//! estimate and its block-bootstrap standard error are identical for any
//! thread count because blocks are reduced in index order.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use mixprior_core::{substream, ContextSequence, MixturePrior};

use crate::error::{Result, VerifyError};
use crate::tolerances::{MIN_ESS, MIN_MC_SAMPLES};

pub const STREAM_MC: u64 = 0x41;
pub const STREAM_MC_BOOT: u64 = 0x42;

const BLOCKS: usize = 1000;
const BOOTSTRAP_RESAMPLES: usize = 200;

#[derive(Debug, Clone, Serialize)]
pub struct OracleEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub effective_sample_size: f64,
}

struct BlockSums {
    max_lw: f64,
    /// Σ exp(lw - max_lw)
    sum_w: f64,
    /// Σ exp(lw - max_lw) · v
    sum_wv: f64,
    /// Σ exp(2(lw - max_lw))
    sum_w2: f64,
}

fn run_block(
    prior: &MixturePrior,
    context: &ContextSequence,
    seed: u64,
    block: usize,
    samples: usize,
) -> BlockSums {
    let mut rng = substream(seed, STREAM_MC, block as u64);
    let h = prior.hyper();
    let d = prior.dim();
    let inv_2sx2 = 1.0 / (2.0 * h.sigma_x() * h.sigma_x());
    let inv_2sy2 = 1.0 / (2.0 * h.sigma_y() * h.sigma_y());

    let mut log_weights = Vec::with_capacity(samples);
    let mut values = Vec::with_capacity(samples);
    let mut max_lw = f64::NEG_INFINITY;
    let mut mu = vec![0.0; d];
    let mut w = vec![0.0; d];
    for _ in 0..samples {
        // (m, mu, w) from the generative prior.
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut comp = prior.components().last().expect("nonempty");
        for c in prior.components() {
            acc += c.pi();
            if u < acc {
                comp = c;
                break;
            }
        }
        for k in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            mu[k] = comp.mu()[k] + h.sigma_mu() * z;
        }
        for k in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            w[k] = comp.w()[k] + h.sigma_w() * z;
        }

        let mut lw = 0.0;
        for x in context.xs().iter().chain(std::iter::once(context.query())) {
            let mut sq = 0.0;
            for k in 0..d {
                let dxy = x[k] - mu[k];
                sq += dxy * dxy;
            }
            lw -= sq * inv_2sx2;
        }
        for (x, &y) in context.xs().iter().zip(context.ys()) {
            let mut dot = 0.0;
            for k in 0..d {
                dot += x[k] * w[k];
            }
            let r = y - dot;
            lw -= r * r * inv_2sy2;
        }
        let mut v = 0.0;
        for k in 0..d {
            v += context.query()[k] * w[k];
        }
        max_lw = max_lw.max(lw);
        log_weights.push(lw);
        values.push(v);
    }

    let mut sum_w = 0.0;
    let mut sum_wv = 0.0;
    let mut sum_w2 = 0.0;
    for (lw, v) in log_weights.iter().zip(&values) {
        let wgt = (lw - max_lw).exp();
        sum_w += wgt;
        sum_wv += wgt * v;
        sum_w2 += wgt * wgt;
    }
    BlockSums {
        max_lw,
        sum_w,
        sum_wv,
        sum_w2,
    }
}

/// Importance-sampling estimate of the Bayes prediction, with block-bootstrap
/// standard error and effective sample size.
pub fn mc_bayes_oracle(
    prior: &MixturePrior,
    context: &ContextSequence,
    n_samples: usize,
    seed: u64,
) -> Result<OracleEstimate> {
    if n_samples < MIN_MC_SAMPLES {
        return Err(VerifyError::TooFewSamples {
            got: n_samples,
            min: MIN_MC_SAMPLES,
        });
    }
    if prior.dim() != context.dim() {
        return Err(mixprior_core::Error::DimensionMismatch {
            what: "prior dim vs context dim",
            expected: prior.dim(),
            got: context.dim(),
        }
        .into());
    }

    let base = n_samples / BLOCKS;
    let extra = n_samples % BLOCKS;
    let sizes: Vec<usize> = (0..BLOCKS)
        .map(|b| base + usize::from(b < extra))
        .collect();

    let blocks: Vec<BlockSums> = sizes
        .par_iter()
        .enumerate()
        .map(|(b, &size)| run_block(prior, context, seed, b, size))
        .collect();

    let global_max = blocks
        .iter()
        .map(|b| b.max_lw)
        .fold(f64::NEG_INFINITY, f64::max);
    // Per-block sums rescaled to the common exponent, reduced in block order.
    let mut s_w = Vec::with_capacity(BLOCKS);
    let mut s_wv = Vec::with_capacity(BLOCKS);
    let mut total_w = 0.0;
    let mut total_wv = 0.0;
    let mut total_w2 = 0.0;
    for b in &blocks {
        let scale = (b.max_lw - global_max).exp();
        let w = b.sum_w * scale;
        let wv = b.sum_wv * scale;
        s_w.push(w);
        s_wv.push(wv);
        total_w += w;
        total_wv += wv;
        total_w2 += b.sum_w2 * scale * scale;
    }
    let mean = total_wv / total_w;
    let ess = total_w * total_w / total_w2;
    if ess < MIN_ESS {
        return Err(VerifyError::LowConfidence {
            ess,
            min: MIN_ESS,
        });
    }

    let mut boot_rng = substream(seed, STREAM_MC_BOOT, 0);
    let mut estimates = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let mut bw = 0.0;
        let mut bwv = 0.0;
        for _ in 0..BLOCKS {
            let j = boot_rng.gen_range(0..BLOCKS);
            bw += s_w[j];
            bwv += s_wv[j];
        }
        estimates.push(bwv / bw);
    }
    let boot_mean: f64 = estimates.iter().sum::<f64>() / estimates.len() as f64;
    let var: f64 = estimates
        .iter()
        .map(|e| (e - boot_mean).powi(2))
        .sum::<f64>()
        / (estimates.len() - 1) as f64;

    Ok(OracleEstimate {
        mean,
        std_error: var.sqrt(),
        n_samples,
        effective_sample_size: ess,
    })
}
