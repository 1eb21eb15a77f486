//! Property trials for the sign of Psi_w under the low-empirical-risk
//! hypothesis.
//!
//! Trials run at d = 1 with x_i ∈ {−1, +1}: the only input family whose
//! rank-one outer products meet the eigenvalue condition while Σ x_i² = T
//! makes the identity condition hold for every δ_w. Trials where the
//! empirical-risk hypothesis or the cross condition fail are filtered out;
//! the remaining ones must satisfy Psi_w(α, β) ≥ PSI_W_FLOOR.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use mixprior_core::{log_evidence_w, substream, Component, ContextSequence, Hyper};

use crate::assumption::check_assumption2;
use crate::error::{Result, VerifyError};
use crate::tolerances::PSI_W_FLOOR;

pub const STREAM_THEOREM1: u64 = 0x21;

/// Attempts scanned per requested filtered trial before giving up.
const MAX_ATTEMPT_FACTOR: usize = 200;

#[derive(Debug, Clone, Serialize)]
pub struct Theorem1Outcome {
    /// Trials that passed the hypothesis filter and were asserted.
    pub filtered_trials: usize,
    /// Raw trials generated to collect the filtered ones.
    pub attempts: usize,
    /// Filtered trials with Psi_w below the floor. Zero unless the sign
    /// property is falsified.
    pub violations: usize,
    /// Smallest Psi_w seen among filtered trials.
    pub min_psi_w: f64,
}

/// One candidate trial; `None` when the hypothesis filter rejects it.
fn run_attempt(seed: u64, attempt: u64) -> Option<f64> {
    let mut rng = substream(seed, STREAM_THEOREM1, attempt);
    let t = rng.gen_range(1..=8usize);
    let xs: Vec<DVector<f64>> = (0..t)
        .map(|_| DVector::from_vec(vec![if rng.gen::<bool>() { 1.0 } else { -1.0 }]))
        .collect();
    let ys: Vec<f64> = (0..t)
        .map(|_| 1.5 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let w_alpha = 1.5 * rng.sample::<f64, _>(StandardNormal);
    let w_beta = 1.5 * rng.sample::<f64, _>(StandardNormal);
    let sigma_w = (rng.gen::<f64>() * (3.0f64.ln() - 0.3f64.ln()) + 0.3f64.ln()).exp();
    let hyper = Hyper::new(1.0, 1.0, 1.0, sigma_w).expect("positive scales");

    // Hypothesis: α has the lower empirical risk on the context.
    let risk_gap: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, &y)| {
            let e_beta = (w_beta * x[0] - y).powi(2);
            let e_alpha = (w_alpha * x[0] - y).powi(2);
            e_beta - e_alpha
        })
        .sum::<f64>()
        / t as f64;
    if risk_gap < 0.0 {
        return None;
    }

    let context = ContextSequence::new(xs, ys.clone(), DVector::from_vec(vec![0.0])).unwrap();
    let va = DVector::from_vec(vec![w_alpha]);
    let vb = DVector::from_vec(vec![w_beta]);
    let report = check_assumption2(&context, &hyper, &va, &vb).expect("valid context");
    if !report.all_hold {
        return None;
    }

    let comp = |w: DVector<f64>| Component::new(1.0, DVector::from_vec(vec![0.0]), w).unwrap();
    let psi_alpha = log_evidence_w(&comp(va), &context, &hyper).unwrap();
    let psi_beta = log_evidence_w(&comp(vb), &context, &hyper).unwrap();
    Some(psi_alpha - psi_beta)
}

/// Collect `trials` filtered trials and count sign violations.
pub fn theorem1_property_trial(seed: u64, trials: usize) -> Result<Theorem1Outcome> {
    if trials == 0 {
        return Err(VerifyError::ZeroTrials);
    }
    let max_attempts = trials.saturating_mul(MAX_ATTEMPT_FACTOR);
    let mut filtered = 0usize;
    let mut attempts = 0usize;
    let mut violations = 0usize;
    let mut min_psi_w = f64::INFINITY;
    while filtered < trials {
        if attempts >= max_attempts {
            return Err(VerifyError::FilterExhausted {
                wanted: trials,
                attempts,
            });
        }
        let attempt = attempts as u64;
        attempts += 1;
        if let Some(psi_w) = run_attempt(seed, attempt) {
            filtered += 1;
            min_psi_w = min_psi_w.min(psi_w);
            if psi_w < PSI_W_FLOOR {
                violations += 1;
            }
        }
    }
    Ok(Theorem1Outcome {
        filtered_trials: filtered,
        attempts,
        violations,
        min_psi_w,
    })
}

/// Exploratory d ≥ 2 companion: the eigenvalue and identity conditions are
/// unsatisfiable for rank-one outer products there, so this measures the
/// empirical Psi_w sign-violation rate under the risk hypothesis alone and
/// asserts nothing.
#[derive(Debug, Clone, Serialize)]
pub struct ExploratoryRate {
    pub dim: usize,
    pub filtered_trials: usize,
    pub negative_psi_w: usize,
    pub rate: f64,
}

pub fn theorem1_exploratory_rate(seed: u64, trials: usize, dim: usize) -> Result<ExploratoryRate> {
    if trials == 0 {
        return Err(VerifyError::ZeroTrials);
    }
    let mut filtered = 0usize;
    let mut negative = 0usize;
    let mut attempt = 0u64;
    while filtered < trials {
        let mut rng = substream(seed, STREAM_THEOREM1 + 1, attempt);
        attempt += 1;
        let t = rng.gen_range(2..=10usize);
        let xs: Vec<DVector<f64>> = (0..t)
            .map(|_| DVector::from_fn(dim, |_, _| rng.sample(StandardNormal)))
            .collect();
        let ys: Vec<f64> = (0..t)
            .map(|_| 1.5 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let w_alpha = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let w_beta = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let risk_gap: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, &y)| (w_beta.dot(x) - y).powi(2) - (w_alpha.dot(x) - y).powi(2))
            .sum::<f64>()
            / t as f64;
        if risk_gap < 0.0 {
            continue;
        }
        filtered += 1;
        let hyper = Hyper::standard();
        let context = ContextSequence::new(xs, ys, DVector::zeros(dim)).unwrap();
        let comp = |w: DVector<f64>| Component::new(1.0, DVector::zeros(dim), w).unwrap();
        let psi_w = log_evidence_w(&comp(w_alpha), &context, &hyper).unwrap()
            - log_evidence_w(&comp(w_beta), &context, &hyper).unwrap();
        if psi_w < 0.0 {
            negative += 1;
        }
    }
    Ok(ExploratoryRate {
        dim,
        filtered_trials: filtered,
        negative_psi_w: negative,
        rate: negative as f64 / filtered as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_is_rejected() {
        assert!(matches!(
            theorem1_property_trial(1, 0),
            Err(VerifyError::ZeroTrials)
        ));
    }

    #[test]
    fn equal_weights_never_violate() {
        // Psi_w(α, α) = 0 exactly; the floor is never crossed.
        let hyper = Hyper::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let context = ContextSequence::new(
            vec![DVector::from_vec(vec![1.0]), DVector::from_vec(vec![-1.0])],
            vec![0.7, -0.3],
            DVector::from_vec(vec![0.0]),
        )
        .unwrap();
        let c = Component::new(1.0, DVector::zeros(1), DVector::from_vec(vec![0.9])).unwrap();
        let psi = log_evidence_w(&c, &context, &hyper).unwrap();
        assert_eq!(psi - psi, 0.0);
    }

    #[test]
    fn thousand_filtered_trials_hold() {
        let outcome = theorem1_property_trial(12345, 1000).unwrap();
        assert_eq!(outcome.filtered_trials, 1000);
        assert_eq!(outcome.violations, 0, "min psi_w = {}", outcome.min_psi_w);
    }

    #[test]
    fn determinism_of_outcome() {
        let a = theorem1_property_trial(9, 200).unwrap();
        let b = theorem1_property_trial(9, 200).unwrap();
        assert_eq!(a.attempts, b.attempts);
        assert_eq!(a.min_psi_w.to_bits(), b.min_psi_w.to_bits());
    }
}
