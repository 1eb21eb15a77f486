//! Monte-Carlo check of the large-T limit of the input-side log-ratio.
//!
//! With downstream inputs x_i ~ N(mu*, tau_x² I) and
//! ‖mu_beta − mu*‖² ≥ ‖mu_alpha − mu*‖², Psi_mu(α, β) approaches
//! (‖mu_beta − mu*‖² − ‖mu_alpha − mu*‖²) / (2 sigma_mu²) as T grows.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use mixprior_core::{log_evidence_mu, substream, Component, ContextSequence, Hyper};

use crate::error::{Result, VerifyError};

pub const STREAM_LEMMA1: u64 = 0x31;

#[derive(Debug, Clone, Serialize)]
pub struct LimitRow {
    pub t: usize,
    /// Psi_mu(α, β) measured on one sampled context of length t.
    pub psi_mu: f64,
    /// The analytic T → ∞ value.
    pub analytic_limit: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanLimitRow {
    pub t: usize,
    pub mean_psi_mu: f64,
    pub analytic_limit: f64,
    /// |mean − limit| / |limit| (absolute error when the limit is 0).
    pub rel_err: f64,
}

pub fn analytic_limit(mu_star: &DVector<f64>, mu_alpha: &DVector<f64>, mu_beta: &DVector<f64>, hyper: &Hyper) -> f64 {
    ((mu_beta - mu_star).norm_squared() - (mu_alpha - mu_star).norm_squared())
        / (2.0 * hyper.sigma_mu().powi(2))
}

fn psi_mu_pair_once(
    mu_star: &DVector<f64>,
    tau_x: f64,
    mu_alpha: &DVector<f64>,
    mu_beta: &DVector<f64>,
    hyper: &Hyper,
    t: usize,
    rng: &mut impl Rng,
) -> f64 {
    let d = mu_star.len();
    // T context inputs plus the query: the mu-evidence sums over all T+1.
    let mut points: Vec<DVector<f64>> = (0..=t)
        .map(|_| mu_star + tau_x * DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal)))
        .collect();
    let query = points.pop().expect("t + 1 points");
    let ys = vec![0.0; t];
    let context = ContextSequence::new(points, ys, query).unwrap();
    let comp = |mu: &DVector<f64>| Component::new(1.0, mu.clone(), DVector::zeros(d)).unwrap();
    log_evidence_mu(&comp(mu_alpha), &context, hyper).unwrap()
        - log_evidence_mu(&comp(mu_beta), &context, hyper).unwrap()
}

/// Psi_mu(α, β) along a context-length schedule, one sampled context per T.
#[allow(clippy::too_many_arguments)]
pub fn lemma1_limit_check(
    mu_star: &DVector<f64>,
    tau_x: f64,
    mu_alpha: &DVector<f64>,
    mu_beta: &DVector<f64>,
    hyper: &Hyper,
    t_schedule: &[usize],
    seed: u64,
) -> Result<Vec<LimitRow>> {
    if (mu_beta - mu_star).norm_squared() < (mu_alpha - mu_star).norm_squared() {
        return Err(VerifyError::LimitOrdering);
    }
    let limit = analytic_limit(mu_star, mu_alpha, mu_beta, hyper);
    Ok(t_schedule
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut rng = substream(seed, STREAM_LEMMA1, k as u64);
            LimitRow {
                t,
                psi_mu: psi_mu_pair_once(mu_star, tau_x, mu_alpha, mu_beta, hyper, t, &mut rng),
                analytic_limit: limit,
            }
        })
        .collect())
}

/// Mean of Psi_mu(α, β) over `reps` independent contexts per scheduled T.
#[allow(clippy::too_many_arguments)]
pub fn lemma1_limit_mean(
    mu_star: &DVector<f64>,
    tau_x: f64,
    mu_alpha: &DVector<f64>,
    mu_beta: &DVector<f64>,
    hyper: &Hyper,
    t_schedule: &[usize],
    reps: usize,
    seed: u64,
) -> Result<Vec<MeanLimitRow>> {
    if reps == 0 {
        return Err(VerifyError::ZeroTrials);
    }
    if (mu_beta - mu_star).norm_squared() < (mu_alpha - mu_star).norm_squared() {
        return Err(VerifyError::LimitOrdering);
    }
    let limit = analytic_limit(mu_star, mu_alpha, mu_beta, hyper);
    Ok(t_schedule
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let samples: Vec<f64> = (0..reps)
                .map(|r| {
                    let mut rng = substream(seed, STREAM_LEMMA1, (k * reps + r) as u64);
                    psi_mu_pair_once(mu_star, tau_x, mu_alpha, mu_beta, hyper, t, &mut rng)
                })
                .collect();
            let mean = mixprior_core::canonical_sum(samples) / reps as f64;
            let rel_err = if limit == 0.0 {
                mean.abs()
            } else {
                (mean - limit).abs() / limit.abs()
            };
            MeanLimitRow {
                t,
                mean_psi_mu: mean,
                analytic_limit: limit,
                rel_err,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1() -> DVector<f64> {
        DVector::from_vec(vec![1.0, 0.0, 0.0])
    }

    #[test]
    fn symmetric_centers_give_zero_everywhere() {
        let hyper = Hyper::standard();
        let mu = DVector::from_vec(vec![0.5, -0.5, 0.0]);
        let rows = lemma1_limit_check(
            &DVector::zeros(3),
            1.0,
            &mu,
            &mu,
            &hyper,
            &[5, 50, 500],
            3,
        )
        .unwrap();
        for row in rows {
            assert_eq!(row.analytic_limit, 0.0);
            assert_eq!(row.psi_mu, 0.0);
        }
    }

    #[test]
    fn deterministic_inputs_match_the_finite_t_closed_form() {
        // tau_x = 0 makes every x_i = mu*, so
        // Psi_mu = (T+1)(‖mu_beta-mu*‖² - ‖mu_alpha-mu*‖²) / (2 sigma_x² (1+(T+1) delta_mu)).
        let hyper = Hyper::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let mu_star = DVector::zeros(3);
        let rows = lemma1_limit_check(&mu_star, 0.0, &mu_star, &e1(), &hyper, &[7], 11).unwrap();
        let t = 7.0f64;
        let expected = (t + 1.0) * 1.0 / (2.0 * (1.0 + (t + 1.0)));
        assert!((rows[0].psi_mu - expected).abs() < 1e-12);
    }

    #[test]
    fn documented_instance_converges_to_half() {
        let hyper = Hyper::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let mu_star = DVector::zeros(3);
        let rows = lemma1_limit_mean(
            &mu_star,
            1.0,
            &mu_star,
            &e1(),
            &hyper,
            &[10_000],
            20,
            77,
        )
        .unwrap();
        assert!((rows[0].analytic_limit - 0.5).abs() < 1e-15);
        assert!(rows[0].rel_err < crate::tolerances::ASYMPTOTIC_REL);
    }

    #[test]
    fn ordering_precondition_enforced() {
        let hyper = Hyper::standard();
        let mu_star = DVector::zeros(3);
        let err = lemma1_limit_check(&mu_star, 1.0, &e1(), &mu_star, &hyper, &[10], 5);
        assert!(matches!(err, Err(VerifyError::LimitOrdering)));
    }
}
