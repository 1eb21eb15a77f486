//! Finite-difference oracle for every hand-derived gradient. The oracle
//! perturbs the flattened parameter vector and differences the summed
//! squared error; it shares no code with the analytic gradients.

use baselines::{flat_to_params, params_to_flat, sse_gradient};
use mixprior_core::ContextSequence;
use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use taskgen::{sample_task, TaskFunction, TaskKind};

const FD_STEP: f64 = 1e-5;
const REL_TOL: f64 = 1e-5;

fn sse(model: &TaskFunction, context: &ContextSequence) -> f64 {
    context
        .xs()
        .iter()
        .zip(context.ys())
        .map(|(x, &y)| (model.evaluate(x) - y).powi(2))
        .sum()
}

fn central_difference_gradient(model: &TaskFunction, context: &ContextSequence) -> Vec<f64> {
    let flat = params_to_flat(&model.params);
    let mut grad = Vec::with_capacity(flat.len());
    for k in 0..flat.len() {
        let mut plus = flat.clone();
        let mut minus = flat.clone();
        plus[k] += FD_STEP;
        minus[k] -= FD_STEP;
        let model_plus = TaskFunction {
            params: flat_to_params(model.kind, model.dim, model.hidden_dim, &plus).unwrap(),
            ..model.clone()
        };
        let model_minus = TaskFunction {
            params: flat_to_params(model.kind, model.dim, model.hidden_dim, &minus).unwrap(),
            ..model.clone()
        };
        grad.push((sse(&model_plus, context) - sse(&model_minus, context)) / (2.0 * FD_STEP));
    }
    grad
}

#[test]
fn analytic_gradients_match_central_differences() {
    let d = 5;
    let hidden = 8;
    let t = 3;
    let draws_per_kind = 100;
    for kind in TaskKind::all() {
        let dp = kind.is_network().then_some(hidden);
        let mut worst: f64 = 0.0;
        for draw in 0..draws_per_kind {
            let seed = 1000 * draw + 17;
            let mut model = sample_task(kind, d, dp, seed).unwrap();
            // Random parameter point (not just the sampling distribution).
            let mut rng = mixprior_core::substream(seed, 0x99, 1);
            let flat: Vec<f64> = params_to_flat(&model.params)
                .iter()
                .map(|v| v + 0.3 * rng.sample::<f64, _>(StandardNormal))
                .collect();
            model.params = flat_to_params(kind, d, dp, &flat).unwrap();

            let xs: Vec<DVector<f64>> = (0..t)
                .map(|_| DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal)))
                .collect();
            let ys: Vec<f64> = (0..t).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let query = DVector::zeros(d);
            let context = ContextSequence::new(xs, ys, query).unwrap();

            let analytic = DVector::from_vec(sse_gradient(&model, &context));
            let fd = DVector::from_vec(central_difference_gradient(&model, &context));
            let rel = (&analytic - &fd).norm() / analytic.norm().max(fd.norm()).max(1e-12);
            worst = worst.max(rel);
        }
        assert!(
            worst < REL_TOL,
            "{}: worst relative gradient error {worst:.3e}",
            kind.name()
        );
    }
}
