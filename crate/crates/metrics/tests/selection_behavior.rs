//! Small-scale versions of the algorithm-selection experiments and the
//! error-curve examples; the full-scale runs live in the acceptance suite.

use metrics::{
    error_curve, mean_by_context_length, selection_report, ClosedFormPredictor, DownstreamTask,
    IclPredictor, SelectionConfig,
};
use mixprior_core::{Component, ContextSequence, Hyper, MixturePrior};
use nalgebra::DVector;
use taskgen::{sample_task, TaskFunction, TaskKind};

fn v(s: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(s)
}

fn four_component_prior(mus: [&[f64]; 4], ws: [&[f64]; 4]) -> MixturePrior {
    let comps = mus
        .iter()
        .zip(ws.iter())
        .map(|(mu, w)| Component::new(0.25, v(mu), v(w)).unwrap())
        .collect();
    MixturePrior::new(comps, Hyper::standard()).unwrap()
}

fn figure6a_prior() -> MixturePrior {
    four_component_prior(
        [&[0.0; 3], &[0.0; 3], &[0.0; 3], &[0.0; 3]],
        [
            &[5.0, 5.0, 5.0],
            &[-5.0, 5.0, 5.0],
            &[-5.0, 5.0, -5.0],
            &[-5.0, -5.0, -5.0],
        ],
    )
}

fn figure6b_prior() -> MixturePrior {
    four_component_prior(
        [
            &[5.0, 5.0, 5.0],
            &[-5.0, 5.0, 5.0],
            &[-5.0, 5.0, -5.0],
            &[-5.0, -5.0, -5.0],
        ],
        [&[1.0; 3], &[1.0; 3], &[1.0; 3], &[1.0; 3]],
    )
}

fn relu_downstream(input_mean: &[f64], seed: u64) -> DownstreamTask {
    DownstreamTask {
        input_mean: v(input_mean),
        input_std: 1.0,
        task: sample_task(TaskKind::ReluNn, 3, Some(100), seed).unwrap(),
    }
}

fn collect_metric(table: &metrics::ResultTable, level: &str, metric: &str) -> Vec<f64> {
    let mut rows: Vec<_> = table
        .rows
        .iter()
        .filter(|r| r.coords[0] == level && r.coords[1] == metric)
        .collect();
    rows.sort_by(|a, b| a.coords[2].cmp(&b.coords[2]));
    rows.iter().map(|r| r.value.unwrap()).collect()
}

#[test]
fn low_error_preference_small_scale() {
    let prior = figure6a_prior();
    let downstream = relu_downstream(&[0.0, 0.0, 0.0], 31);
    let config = SelectionConfig {
        context_length: 50,
        trials: 100,
        noise_levels: vec![1.0 / 9.0, 1.0, 9.0],
        error_samples: 2000,
        sigma_x: 1.0,
        sigma_y: 1.0,
        seed: 99,
    };
    let table = selection_report(&prior, &downstream, &config).unwrap();
    for level in ["0.1111111111111111", "1", "9"] {
        let rows: Vec<_> = table
            .rows
            .iter()
            .filter(|r| r.coords[0] == level && r.coords[1] == "spearman_weight_vs_error")
            .collect();
        assert_eq!(rows.len(), 1);
        let rho = rows[0].value.unwrap();
        assert!(rho < 0.0, "spearman at level {level} is {rho}");

        let errors = collect_metric(&table, level, "component_error");
        let weights = collect_metric(&table, level, "mean_weight");
        let best = errors
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        let top = weights
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(best, top, "level {level}: best-error {best} vs top-weight {top}");
    }
}

#[test]
fn similar_input_preference_small_scale() {
    let prior = figure6b_prior();
    let downstream = relu_downstream(&[-4.0, -4.0, -4.0], 32);
    let config = SelectionConfig {
        context_length: 50,
        trials: 100,
        noise_levels: vec![1.0, 9.0, 81.0],
        error_samples: 500,
        sigma_x: 1.0,
        sigma_y: 1.0,
        seed: 100,
    };
    let table = selection_report(&prior, &downstream, &config).unwrap();
    for level in ["1", "9", "81"] {
        let weights = collect_metric(&table, level, "mean_weight");
        assert!(
            weights[3] > weights[2] && weights[2] > weights[1] && weights[1] > weights[0],
            "level {level}: weights {weights:?} not ordered 4 > 3 > 2 > 1"
        );
    }
    // Distances match the configured geometry.
    let dists = collect_metric(&table, "all", "input_distance");
    for (got, want) in dists.iter().zip([15.59, 12.77, 9.11, 1.73]) {
        assert!((got - want).abs() < 0.01);
    }
}

struct TaskOracle(TaskFunction);

impl IclPredictor for TaskOracle {
    fn name(&self) -> String {
        "task_oracle".into()
    }
    fn predict(&self, context: &ContextSequence, _seed: u64) -> metrics::Result<f64> {
        Ok(self.0.evaluate(context.query()))
    }
}

#[test]
fn perfect_predictor_has_zero_curve() {
    let task = sample_task(TaskKind::Cubic, 4, None, 8).unwrap();
    let table = error_curve(&TaskOracle(task.clone()), &task, &[2, 8], 10, 3).unwrap();
    for row in &table.rows {
        assert_eq!(row.value, Some(0.0));
    }
}

#[test]
fn closed_form_error_vanishes_on_its_own_prior_data() {
    // Single-component prior, near-noiseless labels: the conjugate posterior
    // pins the weight as T grows.
    let hyper = Hyper::new(1.0, 1e-4, 1.0, 1.0).unwrap();
    let w_center = v(&[0.6, -0.2, 0.1]);
    let comp = Component::new(1.0, v(&[0.0, 0.0, 0.0]), w_center.clone()).unwrap();
    let prior = MixturePrior::new(vec![comp], hyper).unwrap();
    let predictor = ClosedFormPredictor {
        prior: prior.clone(),
    };

    let mut errors = Vec::new();
    for &t in &[2usize, 16, 64] {
        let mut total = 0.0;
        let trials = 40;
        for trial in 0..trials {
            let draw =
                mixprior_core::sample_pretrain_sequence(&prior, t, 40_000 + trial as u64).unwrap();
            let p = predictor.predict(&draw.context, 0).unwrap();
            total += (p - draw.query_label).powi(2);
        }
        errors.push(total / trials as f64);
    }
    assert!(
        errors[2] < errors[0] / 4.0,
        "errors did not shrink: {errors:?}"
    );
    assert!(errors[2] < 1e-2, "final error {}", errors[2]);
}

#[test]
fn curve_tables_are_deterministic_across_thread_counts() {
    let task = sample_task(TaskKind::Quadratic, 6, None, 21).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            error_curve(&metrics::MinNormPredictor, &task, &[3, 6, 12], 20, 77)
                .unwrap()
                .to_csv()
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn mean_helper_aggregates_by_length() {
    let task = sample_task(TaskKind::Linear, 4, None, 2).unwrap();
    let table = error_curve(&TaskOracle(task.clone()), &task, &[3, 5], 4, 9).unwrap();
    let means = mean_by_context_length(&table);
    assert_eq!(means.len(), 2);
    assert_eq!(means[0], (3, 0.0));
    assert_eq!(means[1], (5, 0.0));
}
