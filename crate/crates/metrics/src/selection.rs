//! Algorithm-selection analysis: per-component test errors, mean posterior
//! weights, and closed-form ICL error across noise levels.
//!
//! Noise levels scale the prior spreads: at level δ the run uses
//! sigma_mu² = sigma_w² = δ with sigma_x = sigma_y kept at their base values
//! (1 by default), since the ratios delta_mu = delta_w = δ are what the
//! sweep varies.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use mixprior_core::{posterior, ContextSequence, Hyper, MixturePrior};
use taskgen::TaskFunction;

use crate::error::{MetricsError, Result};
use crate::table::{format_value, index_coord, ResultTable};

pub const STREAM_COMPONENT_ERROR: u64 = 0xA1;
pub const STREAM_SELECTION_TRIAL: u64 = 0xA2;

/// Euclidean distance between a pretraining input mean and the downstream
/// one.
pub fn input_distance(mu_pretrain: &DVector<f64>, mu_downstream: &DVector<f64>) -> Result<f64> {
    if mu_pretrain.len() != mu_downstream.len() {
        return Err(mixprior_core::Error::DimensionMismatch {
            what: "input means",
            expected: mu_pretrain.len(),
            got: mu_downstream.len(),
        }
        .into());
    }
    Ok((mu_pretrain - mu_downstream).norm())
}

/// The downstream data-generating process: inputs around a mean, labels from
/// a fixed task function.
#[derive(Debug, Clone)]
pub struct DownstreamTask {
    pub input_mean: DVector<f64>,
    pub input_std: f64,
    pub task: TaskFunction,
}

impl DownstreamTask {
    pub fn sample<R: Rng>(&self, rng: &mut R) -> (DVector<f64>, f64) {
        let d = self.input_mean.len();
        let x = &self.input_mean
            + self.input_std * DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = self.task.evaluate(&x);
        (x, y)
    }

    pub fn sample_context<R: Rng>(&self, t: usize, rng: &mut R) -> Result<(ContextSequence, f64)> {
        let mut xs = Vec::with_capacity(t);
        let mut ys = Vec::with_capacity(t);
        for _ in 0..t {
            let (x, y) = self.sample(rng);
            xs.push(x);
            ys.push(y);
        }
        let (query, label) = self.sample(rng);
        Ok((ContextSequence::new(xs, ys, query)?, label))
    }
}

/// Mean squared error of predicting with the fixed center w_m (no posterior
/// update) over n downstream draws.
pub fn component_test_error(
    prior: &MixturePrior,
    component_index: usize,
    downstream: &DownstreamTask,
    n: usize,
    seed: u64,
) -> Result<f64> {
    if n == 0 {
        return Err(MetricsError::ZeroTrials);
    }
    let comp = prior
        .component(component_index)
        .map_err(mixprior_core::Error::from)?;
    let w = comp.w();
    let mut rng = mixprior_core::substream(seed, STREAM_COMPONENT_ERROR, component_index as u64);
    let mut total = 0.0;
    for _ in 0..n {
        let (x, y) = downstream.sample(&mut rng);
        total += (w.dot(&x) - y).powi(2);
    }
    Ok(total / n as f64)
}

/// Spearman rank correlation with average ranks on ties.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    pearson(&ra, &rb)
}

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut ranks = vec![0.0; n];
    let mut k = 0;
    while k < n {
        let mut m = k;
        while m + 1 < n && v[order[m + 1]] == v[order[k]] {
            m += 1;
        }
        let avg = (k + m) as f64 / 2.0 + 1.0;
        for &idx in &order[k..=m] {
            ranks[idx] = avg;
        }
        k = m + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma).powi(2);
        vb += (y - mb).powi(2);
    }
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    cov / (va * vb).sqrt()
}

#[derive(Debug, Clone)]
pub struct SelectionConfig {
    pub context_length: usize,
    pub trials: usize,
    pub noise_levels: Vec<f64>,
    /// Draws for each component-error estimate.
    pub error_samples: usize,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub seed: u64,
}

/// Per noise level: mean component test errors, mean posterior weights,
/// mean closed-form squared error, the Spearman correlation between the
/// first two, and the pretrain-downstream input distances.
pub fn selection_report(
    prior_template: &MixturePrior,
    downstream: &DownstreamTask,
    config: &SelectionConfig,
) -> Result<ResultTable> {
    if config.trials == 0 {
        return Err(MetricsError::ZeroTrials);
    }
    let m = prior_template.len();
    let mut table = ResultTable::new(
        "selection_report",
        vec!["noise_level".into(), "metric".into(), "component".into()],
    );

    for (ci, comp) in prior_template.components().iter().enumerate() {
        let dist = input_distance(comp.mu(), &downstream.input_mean)?;
        table.push(
            vec!["all".into(), "input_distance".into(), index_coord(ci + 1)],
            dist,
        )?;
    }

    for (ni, &delta) in config.noise_levels.iter().enumerate() {
        let hyper = Hyper::new(
            config.sigma_x,
            config.sigma_y,
            delta.sqrt(),
            delta.sqrt(),
        )
        .map_err(mixprior_core::Error::from)?;
        let prior = prior_template.with_hyper(hyper);
        let level = format_value(delta);

        let mut errors = Vec::with_capacity(m);
        for c in 0..m {
            let err_seed = config.seed ^ ((ni as u64) << 32);
            errors.push(component_test_error(
                &prior,
                c,
                downstream,
                config.error_samples,
                err_seed,
            )?);
        }

        // Per-trial posterior weights and closed-form squared error;
        // independent substreams per (level, trial) keep any schedule
        // bit-reproducible.
        let cells: Vec<Result<(Vec<f64>, f64)>> = (0..config.trials)
            .into_par_iter()
            .map(|trial| {
                let idx = (ni * config.trials + trial) as u64;
                let mut rng =
                    mixprior_core::substream(config.seed, STREAM_SELECTION_TRIAL, idx);
                let (context, label) = downstream.sample_context(config.context_length, &mut rng)?;
                let summary = posterior(&prior, &context)?;
                let check: f64 = summary.tilde_pi.iter().sum();
                debug_assert!((check - 1.0).abs() < 1e-10);
                let sq_err = (summary.prediction - label).powi(2);
                Ok((summary.tilde_pi, sq_err))
            })
            .collect();

        let mut weight_sums = vec![0.0; m];
        let mut err_sum = 0.0;
        for cell in cells {
            let (pis, sq) = cell?;
            for (acc, p) in weight_sums.iter_mut().zip(&pis) {
                *acc += p;
            }
            err_sum += sq;
        }
        let mean_weights: Vec<f64> = weight_sums
            .iter()
            .map(|s| s / config.trials as f64)
            .collect();
        let icl_error = err_sum / config.trials as f64;

        for c in 0..m {
            table.push(
                vec![level.clone(), "component_error".into(), index_coord(c + 1)],
                errors[c],
            )?;
            table.push(
                vec![level.clone(), "mean_weight".into(), index_coord(c + 1)],
                mean_weights[c],
            )?;
        }
        table.push(vec![level.clone(), "icl_error".into(), "all".into()], icl_error)?;
        table.push(
            vec![level.clone(), "spearman_weight_vs_error".into(), "all".into()],
            spearman(&mean_weights, &errors),
        )?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mixprior_core::Component;
    use taskgen::{sample_task, TaskKind};

    fn v(s: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(s)
    }

    #[test]
    fn table1_distances() {
        let ds = v(&[-4.0, -4.0, -4.0]);
        let cases = [
            (v(&[5.0, 5.0, 5.0]), 15.59),
            (v(&[-5.0, 5.0, 5.0]), 12.77),
            (v(&[-5.0, 5.0, -5.0]), 9.11),
            (v(&[-5.0, -5.0, -5.0]), 1.73),
        ];
        for (mu, want) in cases {
            let got = input_distance(&mu, &ds).unwrap();
            assert!((got - want).abs() < 0.01, "{got} vs {want}");
        }
        assert_eq!(input_distance(&ds, &ds).unwrap(), 0.0);
    }

    #[test]
    fn spearman_handles_perfect_and_tied_ranks() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[30.0, 20.0, 10.0]) + 1.0).abs() < 1e-12);
        // All-equal input has no rank variance.
        assert_eq!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), 0.0);
    }

    #[test]
    fn matched_component_has_near_zero_error() {
        let w = v(&[1.0, -2.0, 0.5]);
        let comp = Component::new(1.0, v(&[0.0, 0.0, 0.0]), w.clone()).unwrap();
        let prior = MixturePrior::new(vec![comp], Hyper::standard()).unwrap();
        let linear = TaskFunction {
            kind: TaskKind::Linear,
            params: taskgen::TaskParams::Single { w },
            dim: 3,
            hidden_dim: None,
        };
        let downstream = DownstreamTask {
            input_mean: v(&[0.0, 0.0, 0.0]),
            input_std: 1.0,
            task: linear,
        };
        let err = component_test_error(&prior, 0, &downstream, 500, 3).unwrap();
        assert!(err < 1e-20);
    }

    #[test]
    fn single_component_report_is_degenerate_but_well_formed() {
        let comp = Component::new(1.0, v(&[0.0, 0.0, 0.0]), v(&[1.0, 1.0, 1.0])).unwrap();
        let prior = MixturePrior::new(vec![comp], Hyper::standard()).unwrap();
        let downstream = DownstreamTask {
            input_mean: v(&[0.0, 0.0, 0.0]),
            input_std: 1.0,
            task: sample_task(TaskKind::ReluNn, 3, Some(16), 5).unwrap(),
        };
        let config = SelectionConfig {
            context_length: 10,
            trials: 8,
            noise_levels: vec![1.0, 9.0],
            error_samples: 100,
            sigma_x: 1.0,
            sigma_y: 1.0,
            seed: 7,
        };
        let table = selection_report(&prior, &downstream, &config).unwrap();
        for row in table.select("metric", "mean_weight") {
            assert_eq!(row.value, Some(1.0));
        }
        assert_eq!(table.select("metric", "spearman_weight_vs_error").len(), 2);
    }
}
