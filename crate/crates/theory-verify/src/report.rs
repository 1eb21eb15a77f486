//! Aggregated theory-check run: every property in one JSON-serializable
//! report, used by the `theory-check` CLI subcommand.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use mixprior_core::{posterior, Hyper};

use crate::assumption::check_assumption2;
use crate::error::Result;
use crate::instances::random_small_instance;
use crate::lemma_limit::{lemma1_limit_mean, MeanLimitRow};
use crate::oracle::mc_bayes_oracle;
use crate::theorem::{theorem1_exploratory_rate, theorem1_property_trial, ExploratoryRate, Theorem1Outcome};
use crate::tolerances::{ASYMPTOTIC_REL, STAT_SIGMA};

#[derive(Debug, Clone, Serialize)]
pub struct OracleSpotCheck {
    pub instances: usize,
    pub samples_per_instance: usize,
    pub within_three_sigma: usize,
    pub max_abs_z: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Assumption2Demo {
    /// On the d = 1 sign design the first two conditions hold by
    /// construction; this is the fraction of random label draws where the
    /// cross condition held too.
    pub trials: usize,
    pub all_hold: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoryReport {
    pub seed: u64,
    pub theorem1: Theorem1Outcome,
    pub theorem1_exploratory_d2: ExploratoryRate,
    pub lemma1_rows: Vec<MeanLimitRow>,
    pub lemma1_final_rel_err: f64,
    pub lemma1_pass: bool,
    pub assumption2_demo: Assumption2Demo,
    pub oracle_spot: OracleSpotCheck,
    /// True when every asserted property held.
    pub all_pass: bool,
}

/// Run all properties. `trials` controls the filtered Theorem-1 trial count.
pub fn run_theory_check(trials: usize, seed: u64) -> Result<TheoryReport> {
    let theorem1 = theorem1_property_trial(seed, trials)?;
    let exploratory = theorem1_exploratory_rate(seed, (trials / 10).max(100), 2)?;

    // Documented limit instance: d = 3, mu* = 0, mu_alpha = 0, mu_beta = e1,
    // sigma_mu = 1 → analytic limit 1/2.
    let hyper = Hyper::new(1.0, 1.0, 1.0, 1.0).unwrap();
    let mu_star = DVector::zeros(3);
    let e1 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
    let lemma1_rows = lemma1_limit_mean(
        &mu_star,
        1.0,
        &mu_star,
        &e1,
        &hyper,
        &[10, 100, 1000, 10_000],
        100,
        seed,
    )?;
    let final_rel = lemma1_rows.last().map(|r| r.rel_err).unwrap_or(f64::NAN);
    let lemma1_pass = final_rel < ASYMPTOTIC_REL;

    // Cross-condition frequency on the sign design.
    let demo_trials = 500usize;
    let mut all_hold = 0usize;
    for i in 0..demo_trials {
        let mut rng = mixprior_core::substream(seed, 0x61, i as u64);
        use rand::Rng;
        let t = rng.gen_range(1..=8usize);
        let xs: Vec<DVector<f64>> = (0..t)
            .map(|_| DVector::from_vec(vec![if rng.gen::<bool>() { 1.0 } else { -1.0 }]))
            .collect();
        let ys: Vec<f64> = (0..t).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let ctx = mixprior_core::ContextSequence::new(xs, ys, DVector::zeros(1)).unwrap();
        let wa = DVector::from_vec(vec![rng.gen_range(-1.5..1.5)]);
        let wb = DVector::from_vec(vec![rng.gen_range(-1.5..1.5)]);
        let rep = check_assumption2(&ctx, &hyper, &wa, &wb)?;
        // Conditions 1–2 are guaranteed on this design.
        debug_assert!(rep.cond_min_eig.iter().all(|&b| b) && rep.cond_identity);
        if rep.all_hold {
            all_hold += 1;
        }
    }

    // Small closed-form-vs-oracle agreement run.
    let spot_instances = 10usize;
    let samples = 100_000usize;
    let zs: Vec<f64> = (0..spot_instances as u64)
        .into_par_iter()
        .map(|i| {
            let inst = random_small_instance(seed, i);
            let closed = posterior(&inst.prior, &inst.context).unwrap().prediction;
            let est = mc_bayes_oracle(&inst.prior, &inst.context, samples, seed ^ i).unwrap();
            (est.mean - closed).abs() / est.std_error.max(1e-12)
        })
        .collect();
    let within = zs.iter().filter(|&&z| z <= STAT_SIGMA).count();
    let max_abs_z = zs.iter().copied().fold(0.0, f64::max);

    let all_pass = theorem1.violations == 0 && lemma1_pass && within == spot_instances;
    Ok(TheoryReport {
        seed,
        theorem1,
        theorem1_exploratory_d2: exploratory,
        lemma1_rows,
        lemma1_final_rel_err: final_rel,
        lemma1_pass,
        assumption2_demo: Assumption2Demo {
            trials: demo_trials,
            all_hold,
        },
        oracle_spot: OracleSpotCheck {
            instances: spot_instances,
            samples_per_instance: samples,
            within_three_sigma: within,
            max_abs_z,
        },
        all_pass,
    })
}
