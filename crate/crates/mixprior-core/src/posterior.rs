//! Closed-form posterior over mixture components and the resulting prediction.
//!
//! For a context of T labeled pairs plus a query input, each component m
//! contributes two log-evidence terms:
//!
//!   psi_mu(m) = -Σ_{i=1}^{T+1} ‖mu_m - x_i‖² / (2 sigma_x² (1 + (T+1) delta_mu))
//!   psi_w(m)  = (‖w_m + T delta_w w̄‖²_G - ‖w_m‖²) / (2 sigma_w²)
//!
//! with w̄ = (1/T) Σ x_i y_i, Σ̄ = (1/T) Σ x_i x_iᵀ, G = (I + T delta_w Σ̄)⁻¹
//! and ‖v‖²_A = vᵀ A v. The x-sum runs over the T context inputs and the
//! query; the w-sum uses only the labeled pairs. Additive constants that do
//! not depend on m (log-determinants, x-likelihood normalizers) are dropped:
//! they cancel in every weight ratio and in the normalized weights.
//!
//! The posterior mixture weights follow by normalizing
//! pi_m · exp(psi_mu(m) + psi_w(m)) in log space, the per-component posterior
//! weight means are the Gaussian-conjugate ridge means, and the prediction is
//! ⟨query, Σ_m π̃_m w̃_m⟩.

use nalgebra::{Cholesky, DVector};
use serde::{Deserialize, Serialize};

use crate::accum::{canonical_outer_sum, canonical_sum, canonical_vector_sum};
use crate::context::ContextSequence;
use crate::error::{Error, Result};
use crate::hyper::Hyper;
use crate::mixture::{Component, MixturePrior};

/// Per-component posterior state for one context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    /// psi_mu(m) for each component.
    pub psi_mu: Vec<f64>,
    /// psi_w(m) for each component.
    pub psi_w: Vec<f64>,
    /// Normalized posterior mixture weights π̃_m.
    pub tilde_pi: Vec<f64>,
    /// Posterior task-weight means w̃_m.
    #[serde(with = "crate::serde_vec::list")]
    pub tilde_w: Vec<DVector<f64>>,
    /// ⟨query, Σ_m π̃_m w̃_m⟩.
    pub prediction: f64,
}

/// Lemma-style decomposition of π̃_alpha / π̃_beta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightRatio {
    /// π̃_alpha / π̃_beta = (pi_alpha / pi_beta) · exp(psi_mu + psi_w).
    pub ratio: f64,
    /// Capital Psi_mu(alpha, beta) = psi_mu(alpha) - psi_mu(beta).
    pub psi_mu: f64,
    /// Capital Psi_w(alpha, beta) = psi_w(alpha) - psi_w(beta).
    pub psi_w: f64,
}

fn check_dims(component: &Component, context: &ContextSequence) -> Result<()> {
    if component.dim() != context.dim() {
        return Err(Error::DimensionMismatch {
            what: "component dim vs context dim",
            expected: component.dim(),
            got: context.dim(),
        });
    }
    Ok(())
}

/// Input-side log evidence psi_mu(m). Sums over the T context inputs and the
/// query.
pub fn log_evidence_mu(component: &Component, context: &ContextSequence, hyper: &Hyper) -> Result<f64> {
    check_dims(component, context)?;
    let mu = component.mu();
    let terms: Vec<f64> = context
        .xs()
        .iter()
        .chain(std::iter::once(context.query()))
        .map(|x| (mu - x).norm_squared())
        .collect();
    let n = terms.len() as f64; // T + 1
    let sum = canonical_sum(terms);
    let denom = 2.0 * hyper.sigma_x().powi(2) * (1.0 + n * hyper.delta_mu());
    Ok(-sum / denom)
}

/// Shared label-side statistics: A = I + delta_w Σ x_i x_iᵀ (symmetric
/// positive definite) and u = delta_w Σ x_i y_i. Note T delta_w w̄ = u.
struct LabelStats {
    chol: Cholesky<f64, nalgebra::Dyn>,
    u: DVector<f64>,
}

impl LabelStats {
    fn build(context: &ContextSequence, hyper: &Hyper) -> Self {
        let d = context.dim();
        let delta_w = hyper.delta_w();
        let mut a = canonical_outer_sum(context.xs(), d) * delta_w;
        for k in 0..d {
            a[(k, k)] += 1.0;
        }
        let xy: Vec<DVector<f64>> = context
            .xs()
            .iter()
            .zip(context.ys())
            .map(|(x, &y)| x * y)
            .collect();
        let u = canonical_vector_sum(&xy, d) * delta_w;
        let chol = Cholesky::new(a).expect("I + delta_w Σ x x^T is positive definite");
        LabelStats { chol, u }
    }

    /// w̃_m = A⁻¹ (w_m + u).
    fn posterior_mean(&self, w_m: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(&(w_m + &self.u))
    }

    /// psi_w(m) = ((w_m + u)ᵀ A⁻¹ (w_m + u) - ‖w_m‖²) / (2 sigma_w²).
    fn log_evidence(&self, w_m: &DVector<f64>, hyper: &Hyper) -> f64 {
        let v = w_m + &self.u;
        let quad = v.dot(&self.chol.solve(&v));
        (quad - w_m.norm_squared()) / (2.0 * hyper.sigma_w().powi(2))
    }
}

/// Label-side log evidence psi_w(m). Empty contexts contribute nothing.
pub fn log_evidence_w(component: &Component, context: &ContextSequence, hyper: &Hyper) -> Result<f64> {
    check_dims(component, context)?;
    if context.is_empty() {
        return Ok(0.0);
    }
    let stats = LabelStats::build(context, hyper);
    Ok(stats.log_evidence(component.w(), hyper))
}

/// Gaussian-conjugate posterior mean of the task weight:
/// w̃_m = (I + delta_w XᵀX)⁻¹ (w_m + delta_w Xᵀy).
pub fn posterior_w_mean(
    component: &Component,
    context: &ContextSequence,
    hyper: &Hyper,
) -> Result<DVector<f64>> {
    check_dims(component, context)?;
    if context.is_empty() {
        return Ok(component.w().clone());
    }
    let stats = LabelStats::build(context, hyper);
    Ok(stats.posterior_mean(component.w()))
}

/// Full posterior: weights π̃ (softmax of log pi_m + psi_mu + psi_w), means
/// w̃_m, and the scalar prediction ⟨query, Σ_m π̃_m w̃_m⟩.
pub fn posterior(prior: &MixturePrior, context: &ContextSequence) -> Result<PosteriorSummary> {
    if prior.dim() != context.dim() {
        return Err(Error::DimensionMismatch {
            what: "prior dim vs context dim",
            expected: prior.dim(),
            got: context.dim(),
        });
    }
    let hyper = prior.hyper();
    let m = prior.len();

    let stats = if context.is_empty() {
        None
    } else {
        Some(LabelStats::build(context, hyper))
    };

    let mut psi_mu = Vec::with_capacity(m);
    let mut psi_w = Vec::with_capacity(m);
    let mut tilde_w = Vec::with_capacity(m);
    let mut log_weights = Vec::with_capacity(m);
    for c in prior.components() {
        let pm = log_evidence_mu(c, context, hyper)?;
        let (pw, wm) = match &stats {
            Some(s) => (s.log_evidence(c.w(), hyper), s.posterior_mean(c.w())),
            None => (0.0, c.w().clone()),
        };
        log_weights.push(c.pi().ln() + pm + pw);
        psi_mu.push(pm);
        psi_w.push(pw);
        tilde_w.push(wm);
    }

    let max_log = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = log_weights.iter().map(|&l| (l - max_log).exp()).collect();
    let norm: f64 = unnorm.iter().sum();
    let tilde_pi: Vec<f64> = unnorm.iter().map(|&v| v / norm).collect();

    let mut averaged = DVector::zeros(prior.dim());
    for (p, w) in tilde_pi.iter().zip(&tilde_w) {
        averaged += w * *p;
    }
    let prediction = context.query().dot(&averaged);

    Ok(PosteriorSummary {
        psi_mu,
        psi_w,
        tilde_pi,
        tilde_w,
        prediction,
    })
}

/// The Lemma decomposition for one pair of components:
/// π̃_alpha / π̃_beta = (pi_alpha / pi_beta) exp(Psi_mu + Psi_w).
pub fn weight_ratio(
    prior: &MixturePrior,
    context: &ContextSequence,
    alpha: usize,
    beta: usize,
) -> Result<WeightRatio> {
    if alpha == beta {
        return Err(Error::SameComponent { index: alpha });
    }
    let ca = prior.component(alpha)?;
    let cb = prior.component(beta)?;
    let hyper = prior.hyper();
    let psi_mu = log_evidence_mu(ca, context, hyper)? - log_evidence_mu(cb, context, hyper)?;
    let psi_w = log_evidence_w(ca, context, hyper)? - log_evidence_w(cb, context, hyper)?;
    let ratio = ca.pi() / cb.pi() * (psi_mu + psi_w).exp();
    Ok(WeightRatio {
        ratio,
        psi_mu,
        psi_w,
    })
}
