//! Posterior invariants checked over randomized small instances.

use mixprior_core::{
    posterior, posterior_w_mean, weight_ratio, Component, ContextSequence, Hyper, MixturePrior,
};
use nalgebra::DVector;
use proptest::prelude::*;

const VALUE_RANGE: std::ops::RangeInclusive<f64> = -3.0..=3.0;

#[derive(Debug, Clone)]
struct Instance {
    prior: MixturePrior,
    context: ContextSequence,
}

fn vector(dim: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(VALUE_RANGE, dim).prop_map(DVector::from_vec)
}

fn instance() -> impl Strategy<Value = Instance> {
    (1usize..=3, 1usize..=3, 0usize..=5).prop_flat_map(|(d, m, t)| {
        let sigmas = (0.2f64..=2.0, 0.2f64..=2.0, 0.2f64..=2.0, 0.2f64..=2.0);
        let comps = prop::collection::vec((vector(d), vector(d)), m);
        let raw_pis = prop::collection::vec(0.05f64..=1.0, m);
        let xs = prop::collection::vec(vector(d), t);
        let ys = prop::collection::vec(VALUE_RANGE, t);
        (sigmas, comps, raw_pis, xs, ys, vector(d)).prop_map(
            |((sx, sy, smu, sw), comps, raw_pis, xs, ys, query)| {
                let total: f64 = raw_pis.iter().sum();
                let mut pis: Vec<f64> = raw_pis.iter().map(|p| p / total).collect();
                // Renormalize exactly: push rounding into the last weight.
                let head: f64 = pis[..pis.len() - 1].iter().sum();
                let last = pis.len() - 1;
                pis[last] = 1.0 - head;
                let hyper = Hyper::new(sx, sy, smu, sw).unwrap();
                let components = comps
                    .into_iter()
                    .zip(pis)
                    .map(|((mu, w), pi)| Component::new(pi, mu, w).unwrap())
                    .collect();
                Instance {
                    prior: MixturePrior::new(components, hyper).unwrap(),
                    context: ContextSequence::new(xs, ys, query).unwrap(),
                }
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn weights_normalize(inst in instance()) {
        let summary = posterior(&inst.prior, &inst.context).unwrap();
        let total: f64 = summary.tilde_pi.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        prop_assert!(summary.tilde_pi.iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn prediction_matches_weight_average(inst in instance()) {
        let summary = posterior(&inst.prior, &inst.context).unwrap();
        let mut avg = DVector::zeros(inst.prior.dim());
        for (p, w) in summary.tilde_pi.iter().zip(&summary.tilde_w) {
            avg += w * *p;
        }
        prop_assert!((summary.prediction - inst.context.query().dot(&avg)).abs() < 1e-10);
    }

    #[test]
    fn ratios_are_consistent_with_weights(inst in instance()) {
        let summary = posterior(&inst.prior, &inst.context).unwrap();
        for alpha in 0..inst.prior.len() {
            for beta in 0..inst.prior.len() {
                if alpha == beta {
                    continue;
                }
                let r = weight_ratio(&inst.prior, &inst.context, alpha, beta).unwrap();
                let direct = summary.tilde_pi[alpha] / summary.tilde_pi[beta];
                if direct.is_finite() && direct > 0.0 {
                    prop_assert!(
                        (r.ratio - direct).abs() <= 1e-8 * direct.max(r.ratio),
                        "ratio {} vs weights {}",
                        r.ratio,
                        direct
                    );
                }
            }
        }
    }

    #[test]
    fn permuting_examples_changes_nothing(inst in instance(), perm_seed in any::<u64>()) {
        let t = inst.context.len();
        if t < 2 {
            return Ok(());
        }
        // Fisher-Yates with a tiny deterministic generator.
        let mut order: Vec<usize> = (0..t).collect();
        let mut state = perm_seed | 1;
        for i in (1..t).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            order.swap(i, j);
        }
        let shuffled = inst.context.permuted(&order).unwrap();
        let a = posterior(&inst.prior, &inst.context).unwrap();
        let b = posterior(&inst.prior, &shuffled).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn single_component_prediction_is_conjugate_ridge(
        d in 1usize..=3,
        seed in any::<u64>(),
    ) {
        let mut rng = mixprior_core::substream(seed, 0xAB, 0);
        use rand::Rng;
        fn v<R: Rng>(rng: &mut R, dim: usize) -> DVector<f64> {
            DVector::from_fn(dim, |_, _| rng.gen::<f64>() * 2.0 - 1.0)
        }
        let hyper = Hyper::new(1.0, 0.7, 0.9, 1.3).unwrap();
        let comp = Component::new(1.0, v(&mut rng, d), v(&mut rng, d)).unwrap();
        let prior = MixturePrior::new(vec![comp.clone()], hyper).unwrap();
        let t = 4;
        let xs: Vec<DVector<f64>> = (0..t).map(|_| v(&mut rng, d)).collect();
        let ys: Vec<f64> = (0..t).map(|_| rng.gen::<f64>()).collect();
        let query = v(&mut rng, d);
        let context = ContextSequence::new(xs, ys, query).unwrap();

        let summary = posterior(&prior, &context).unwrap();
        let ridge = posterior_w_mean(&comp, &context, &hyper).unwrap();
        prop_assert_eq!(summary.tilde_pi.clone(), vec![1.0]);
        prop_assert_eq!(summary.prediction, context.query().dot(&ridge));
    }
}

#[test]
fn prior_is_recovered_without_evidence() {
    // T = 0, equidistant query, identical w centers: the posterior weights
    // must reproduce the prior weights.
    let hyper = Hyper::new(1.0, 1.0, 0.5, 0.5).unwrap();
    let w = DVector::from_vec(vec![1.0, 0.0]);
    let components = vec![
        Component::new(0.2, DVector::from_vec(vec![1.0, 0.0]), w.clone()).unwrap(),
        Component::new(0.3, DVector::from_vec(vec![-1.0, 0.0]), w.clone()).unwrap(),
        Component::new(0.5, DVector::from_vec(vec![0.0, 1.0]), w).unwrap(),
    ];
    let prior = MixturePrior::new(components, hyper).unwrap();
    // Origin query is equidistant from all three unit-norm centers.
    let context = ContextSequence::new(vec![], vec![], DVector::zeros(2)).unwrap();
    let summary = posterior(&prior, &context).unwrap();
    for (got, want) in summary.tilde_pi.iter().zip([0.2, 0.3, 0.5]) {
        assert!((got - want).abs() < 1e-10, "got {got}, want {want}");
    }
}
