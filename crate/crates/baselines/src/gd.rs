//! Full-batch gradient descent within a hypothesis class.
//!
//! The descent direction is the gradient of the summed squared error over
//! the T context pairs — the aggregate update one epoch of per-example SGD
//! at the same rate would make — while the recorded loss is the mean squared
//! error. Gradients are hand-derived per class; a finite-difference oracle
//! in the test suite pins them.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use mixprior_core::{substream, ContextSequence};
use taskgen::{TaskFunction, TaskKind, TaskParams, DEFAULT_HIDDEN_DIM};

use crate::error::{BaselineError, Result};

pub const STREAM_GD_INIT: u64 = 0x81;

/// Loss ceiling that aborts a run as divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct GdOptions {
    pub lr: f64,
    pub steps: usize,
    pub seed: u64,
    /// Hidden width for the network kinds; defaults to the taskgen width.
    pub hidden_dim: Option<usize>,
}

impl Default for GdOptions {
    fn default() -> Self {
        GdOptions {
            lr: 1e-3,
            steps: 1000,
            seed: 0,
            hidden_dim: None,
        }
    }
}

/// A trained in-class model plus its loss trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FittedModel {
    pub model: TaskFunction,
    /// (step, mean squared error); entry 0 is the initialization.
    pub training_log: Vec<(usize, f64)>,
}

impl FittedModel {
    pub fn predict(&self, x: &DVector<f64>) -> f64 {
        self.model.evaluate(x)
    }

    pub fn final_loss(&self) -> f64 {
        self.training_log.last().map(|&(_, l)| l).unwrap_or(f64::NAN)
    }
}

/// Flatten a parameter block in a fixed order (w | w1 | w2 row-major).
pub fn params_to_flat(params: &TaskParams) -> Vec<f64> {
    match params {
        TaskParams::Single { w } => w.iter().copied().collect(),
        TaskParams::Pair { w1, w2 } => w1.iter().chain(w2.iter()).copied().collect(),
        TaskParams::Network { w1, w2 } => {
            let mut out: Vec<f64> = w1.iter().copied().collect();
            for r in 0..w2.nrows() {
                out.extend(w2.row(r).iter().copied());
            }
            out
        }
    }
}

/// Inverse of [`params_to_flat`] for a given kind/shape.
pub fn flat_to_params(
    kind: TaskKind,
    dim: usize,
    hidden_dim: Option<usize>,
    flat: &[f64],
) -> Result<TaskParams> {
    let params = match kind {
        TaskKind::Linear | TaskKind::Quadratic | TaskKind::SqrtLinear | TaskKind::Cubic => {
            if flat.len() != dim {
                return Err(BaselineError::SolveFailed(format!(
                    "flat length {} != dim {dim}",
                    flat.len()
                )));
            }
            TaskParams::Single {
                w: DVector::from_row_slice(flat),
            }
        }
        TaskKind::LinearPlusQuadratic => {
            if flat.len() != 2 * dim {
                return Err(BaselineError::SolveFailed(format!(
                    "flat length {} != 2·dim {dim}",
                    flat.len()
                )));
            }
            TaskParams::Pair {
                w1: DVector::from_row_slice(&flat[..dim]),
                w2: DVector::from_row_slice(&flat[dim..]),
            }
        }
        TaskKind::ReluNn | TaskKind::SigmoidNn => {
            let dp = hidden_dim.ok_or(taskgen::TaskGenError::MissingHiddenDim)?;
            if flat.len() != dp + dp * dim {
                return Err(BaselineError::SolveFailed(format!(
                    "flat length {} != d' + d'·d = {}",
                    flat.len(),
                    dp + dp * dim
                )));
            }
            let w1 = DVector::from_row_slice(&flat[..dp]);
            let w2 = DMatrix::from_fn(dp, dim, |r, c| flat[dp + r * dim + c]);
            TaskParams::Network { w1, w2 }
        }
    };
    Ok(params)
}

fn feature(kind: TaskKind, x: &DVector<f64>) -> DVector<f64> {
    match kind {
        TaskKind::Linear => x.clone(),
        TaskKind::Quadratic => x.map(|v| v * v),
        TaskKind::SqrtLinear => x.map(|v| v.signum() * v.abs().sqrt()),
        TaskKind::Cubic => x.map(|v| v * v * v),
        _ => unreachable!("feature map only for the single-vector kinds"),
    }
}

/// Mean squared error of a parameterized model on the context.
pub fn mse_loss(model: &TaskFunction, context: &ContextSequence) -> f64 {
    let t = context.len() as f64;
    context
        .xs()
        .iter()
        .zip(context.ys())
        .map(|(x, &y)| (model.evaluate(x) - y).powi(2))
        .sum::<f64>()
        / t
}

/// Gradient of the summed squared error Σ_i (f(x_i) − y_i)², flattened in
/// the [`params_to_flat`] order.
pub fn sse_gradient(model: &TaskFunction, context: &ContextSequence) -> Vec<f64> {
    let d = model.dim;
    match (&model.kind, &model.params) {
        (
            TaskKind::Linear | TaskKind::Quadratic | TaskKind::SqrtLinear | TaskKind::Cubic,
            TaskParams::Single { .. },
        ) => {
            let mut grad = DVector::zeros(d);
            for (x, &y) in context.xs().iter().zip(context.ys()) {
                let r = model.evaluate(x) - y;
                grad += 2.0 * r * feature(model.kind, x);
            }
            grad.iter().copied().collect()
        }
        (TaskKind::LinearPlusQuadratic, TaskParams::Pair { .. }) => {
            let mut g1 = DVector::zeros(d);
            let mut g2 = DVector::zeros(d);
            for (x, &y) in context.xs().iter().zip(context.ys()) {
                let r = model.evaluate(x) - y;
                g1 += 2.0 * r * x.map(|v| v * v);
                g2 += 2.0 * r * x;
            }
            g1.iter().chain(g2.iter()).copied().collect()
        }
        (TaskKind::ReluNn, TaskParams::Network { w1, w2 }) => {
            let dp = w1.len();
            let mut g1 = DVector::zeros(dp);
            let mut g2: DMatrix<f64> = DMatrix::zeros(dp, d);
            for (x, &y) in context.xs().iter().zip(context.ys()) {
                let z = w2 * x;
                let h = z.map(|v| v.max(0.0));
                let r = w1.dot(&h) - y;
                g1 += 2.0 * r * &h;
                for j in 0..dp {
                    if z[j] > 0.0 {
                        let coeff = 2.0 * r * w1[j];
                        for c in 0..d {
                            g2[(j, c)] += coeff * x[c];
                        }
                    }
                }
            }
            let mut out: Vec<f64> = g1.iter().copied().collect();
            for r in 0..dp {
                out.extend(g2.row(r).iter().copied());
            }
            out
        }
        (TaskKind::SigmoidNn, TaskParams::Network { w1, w2 }) => {
            let dp = w1.len();
            let mut g1 = DVector::zeros(dp);
            let mut g2: DMatrix<f64> = DMatrix::zeros(dp, d);
            for (x, &y) in context.xs().iter().zip(context.ys()) {
                let z = w2 * x;
                let h = z.map(|v| 1.0 / (1.0 + (-v).exp()));
                let r = w1.dot(&h) - y;
                g1 += 2.0 * r * &h;
                for j in 0..dp {
                    let sp = h[j] * (1.0 - h[j]);
                    let coeff = 2.0 * r * w1[j] * sp;
                    for c in 0..d {
                        g2[(j, c)] += coeff * x[c];
                    }
                }
            }
            let mut out: Vec<f64> = g1.iter().copied().collect();
            for r in 0..dp {
                out.extend(g2.row(r).iter().copied());
            }
            out
        }
        _ => unreachable!("params validated against kind"),
    }
}

/// Standard-normal initialization scaled by 1/√fan-in.
pub fn init_params(kind: TaskKind, dim: usize, hidden_dim: Option<usize>, seed: u64) -> Result<TaskParams> {
    let mut rng = substream(seed, STREAM_GD_INIT, 0);
    let scaled = |rng: &mut rand_chacha::ChaCha8Rng, len: usize, fan_in: usize| {
        let scale = 1.0 / (fan_in as f64).sqrt();
        DVector::from_fn(len, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
    };
    let params = match kind {
        TaskKind::Linear | TaskKind::Quadratic | TaskKind::SqrtLinear | TaskKind::Cubic => {
            TaskParams::Single {
                w: scaled(&mut rng, dim, dim),
            }
        }
        TaskKind::LinearPlusQuadratic => TaskParams::Pair {
            w1: scaled(&mut rng, dim, dim),
            w2: scaled(&mut rng, dim, dim),
        },
        TaskKind::ReluNn | TaskKind::SigmoidNn => {
            let dp = hidden_dim.ok_or(taskgen::TaskGenError::MissingHiddenDim)?;
            let w1 = scaled(&mut rng, dp, dp);
            let scale = 1.0 / (dim as f64).sqrt();
            let w2 = DMatrix::from_fn(dp, dim, |_, _| scale * rng.sample::<f64, _>(StandardNormal));
            TaskParams::Network { w1, w2 }
        }
    };
    Ok(params)
}

/// Fit a model of the given class to the context by full-batch gradient
/// steps.
pub fn gd_fit(kind: TaskKind, context: &ContextSequence, opts: &GdOptions) -> Result<FittedModel> {
    if context.is_empty() {
        return Err(BaselineError::EmptyContext);
    }
    let dim = context.dim();
    let hidden_dim = if kind.is_network() {
        Some(opts.hidden_dim.unwrap_or(DEFAULT_HIDDEN_DIM))
    } else {
        None
    };
    let params = init_params(kind, dim, hidden_dim, opts.seed)?;
    let mut model = TaskFunction {
        kind,
        params,
        dim,
        hidden_dim,
    };
    model.validate()?;

    let mut training_log = Vec::with_capacity(opts.steps + 1);
    let mut loss = mse_loss(&model, context);
    training_log.push((0, loss));
    let mut flat = params_to_flat(&model.params);
    for step in 1..=opts.steps {
        let grad = sse_gradient(&model, context);
        for (p, g) in flat.iter_mut().zip(&grad) {
            *p -= opts.lr * g;
        }
        model.params = flat_to_params(kind, dim, hidden_dim, &flat)?;
        loss = mse_loss(&model, context);
        if !loss.is_finite() || loss > DIVERGENCE_LIMIT {
            return Err(BaselineError::Diverged { step, loss });
        }
        training_log.push((step, loss));
    }
    Ok(FittedModel {
        model,
        training_log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use taskgen::{sample_icl_batch, sample_task};

    #[test]
    fn zero_steps_returns_the_initialization() {
        let task = sample_task(TaskKind::Linear, 4, None, 2).unwrap();
        let batch = sample_icl_batch(&task, 6, 3).unwrap();
        let opts = GdOptions {
            steps: 0,
            seed: 5,
            ..GdOptions::default()
        };
        let fit = gd_fit(TaskKind::Linear, &batch.context, &opts).unwrap();
        let init = init_params(TaskKind::Linear, 4, None, 5).unwrap();
        assert_eq!(fit.model.params, init);
        assert_eq!(fit.training_log.len(), 1);
    }

    #[test]
    fn linear_fit_on_linear_data_converges() {
        // T = 2d with the default schedule drives the in-context MSE far
        // below 1e-2 · ‖w‖².
        let d = 20;
        let task = sample_task(TaskKind::Linear, d, None, 7).unwrap();
        let TaskParams::Single { w } = &task.params else {
            unreachable!()
        };
        let batch = sample_icl_batch(&task, 2 * d, 11).unwrap();
        let fit = gd_fit(TaskKind::Linear, &batch.context, &GdOptions::default()).unwrap();
        let bound = 1e-2 * w.norm_squared();
        assert!(
            fit.final_loss() < bound,
            "final MSE {} vs bound {bound}",
            fit.final_loss()
        );
    }

    #[test]
    fn divergence_is_reported() {
        let task = sample_task(TaskKind::Linear, 10, None, 1).unwrap();
        let batch = sample_icl_batch(&task, 30, 2).unwrap();
        let opts = GdOptions {
            lr: 1.0,
            ..GdOptions::default()
        };
        assert!(matches!(
            gd_fit(TaskKind::Linear, &batch.context, &opts),
            Err(BaselineError::Diverged { .. })
        ));
    }

    #[test]
    fn flatten_round_trips_every_kind() {
        for kind in TaskKind::all() {
            let dp = kind.is_network().then_some(5);
            let task = sample_task(kind, 4, dp, 31).unwrap();
            let flat = params_to_flat(&task.params);
            let back = flat_to_params(kind, 4, dp, &flat).unwrap();
            assert_eq!(back, task.params);
        }
    }
}
