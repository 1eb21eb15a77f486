//! The regression function classes and their evaluation semantics.
//!
//! All parameters are sampled i.i.d. standard normal. Element-wise square
//! root of a Gaussian input is undefined for negative coordinates, so the
//! square-root class uses the signed root sign(t)·√|t|, which preserves the
//! element-wise intent on symmetric inputs.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use mixprior_core::substream;

use crate::error::{Result, TaskGenError};

pub const STREAM_TASK: u64 = 0x71;

/// Default hidden width for the two network kinds.
pub const DEFAULT_HIDDEN_DIM: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Linear,
    Quadratic,
    ReluNn,
    SqrtLinear,
    Cubic,
    LinearPlusQuadratic,
    SigmoidNn,
}

impl TaskKind {
    pub fn all() -> [TaskKind; 7] {
        [
            TaskKind::Linear,
            TaskKind::Quadratic,
            TaskKind::ReluNn,
            TaskKind::SqrtLinear,
            TaskKind::Cubic,
            TaskKind::LinearPlusQuadratic,
            TaskKind::SigmoidNn,
        ]
    }

    pub fn is_network(self) -> bool {
        matches!(self, TaskKind::ReluNn | TaskKind::SigmoidNn)
    }

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Linear => "linear",
            TaskKind::Quadratic => "quadratic",
            TaskKind::ReluNn => "relu_nn",
            TaskKind::SqrtLinear => "sqrt_linear",
            TaskKind::Cubic => "cubic",
            TaskKind::LinearPlusQuadratic => "linear_plus_quadratic",
            TaskKind::SigmoidNn => "sigmoid_nn",
        }
    }
}

/// Kind-specific parameter block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TaskParams {
    /// linear / quadratic / sqrt_linear / cubic: one weight vector.
    Single {
        #[serde(with = "crate::serde_vec")]
        w: DVector<f64>,
    },
    /// linear_plus_quadratic: w1 on the squared features, w2 on the linear.
    Pair {
        #[serde(with = "crate::serde_vec")]
        w1: DVector<f64>,
        #[serde(with = "crate::serde_vec")]
        w2: DVector<f64>,
    },
    /// relu_nn / sigmoid_nn: output vector w1 (d') and input matrix w2 (d'×d).
    Network {
        #[serde(with = "crate::serde_vec")]
        w1: DVector<f64>,
        #[serde(with = "crate::serde_mat")]
        w2: DMatrix<f64>,
    },
}

/// A sampled ground-truth function, evaluable on inputs of dimension `dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskFunction {
    pub kind: TaskKind,
    pub params: TaskParams,
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hidden_dim: Option<usize>,
}

pub(crate) fn signed_sqrt(t: f64) -> f64 {
    t.signum() * t.abs().sqrt()
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

impl TaskFunction {
    /// Validate that the parameter block matches the declared kind and dims.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim;
        match (self.kind, &self.params) {
            (TaskKind::Linear | TaskKind::Quadratic | TaskKind::SqrtLinear | TaskKind::Cubic, TaskParams::Single { w }) => {
                if w.len() != d {
                    return Err(TaskGenError::BadParams {
                        reason: format!("w has len {}, dim is {d}", w.len()),
                    });
                }
            }
            (TaskKind::LinearPlusQuadratic, TaskParams::Pair { w1, w2 }) => {
                if w1.len() != d || w2.len() != d {
                    return Err(TaskGenError::BadParams {
                        reason: format!("w1/w2 lens {}/{}, dim is {d}", w1.len(), w2.len()),
                    });
                }
            }
            (TaskKind::ReluNn | TaskKind::SigmoidNn, TaskParams::Network { w1, w2 }) => {
                let dp = self.hidden_dim.ok_or(TaskGenError::MissingHiddenDim)?;
                if w1.len() != dp || w2.nrows() != dp || w2.ncols() != d {
                    return Err(TaskGenError::BadParams {
                        reason: format!(
                            "network shapes w1: {}, w2: {}×{}, expected {dp} and {dp}×{d}",
                            w1.len(),
                            w2.nrows(),
                            w2.ncols()
                        ),
                    });
                }
            }
            _ => {
                return Err(TaskGenError::BadParams {
                    reason: format!("params variant does not match kind {:?}", self.kind),
                })
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &DVector<f64>) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match (&self.kind, &self.params) {
            (TaskKind::Linear, TaskParams::Single { w }) => w.dot(x),
            (TaskKind::Quadratic, TaskParams::Single { w }) => {
                w.iter().zip(x.iter()).map(|(wi, xi)| wi * xi * xi).sum()
            }
            (TaskKind::SqrtLinear, TaskParams::Single { w }) => w
                .iter()
                .zip(x.iter())
                .map(|(wi, xi)| wi * signed_sqrt(*xi))
                .sum(),
            (TaskKind::Cubic, TaskParams::Single { w }) => {
                w.iter().zip(x.iter()).map(|(wi, xi)| wi * xi * xi * xi).sum()
            }
            (TaskKind::LinearPlusQuadratic, TaskParams::Pair { w1, w2 }) => {
                let quad: f64 = w1.iter().zip(x.iter()).map(|(wi, xi)| wi * xi * xi).sum();
                quad + w2.dot(x)
            }
            (TaskKind::ReluNn, TaskParams::Network { w1, w2 }) => {
                let z = w2 * x;
                w1.iter().zip(z.iter()).map(|(wi, zi)| wi * zi.max(0.0)).sum()
            }
            (TaskKind::SigmoidNn, TaskParams::Network { w1, w2 }) => {
                let z = w2 * x;
                w1.iter().zip(z.iter()).map(|(wi, zi)| wi * sigmoid(*zi)).sum()
            }
            _ => unreachable!("validated params"),
        }
    }
}

/// Sample a task of the given kind with i.i.d. standard-normal parameters.
/// `d_prime` is required for the two network kinds and ignored otherwise.
pub fn sample_task(kind: TaskKind, d: usize, d_prime: Option<usize>, seed: u64) -> Result<TaskFunction> {
    if d == 0 {
        return Err(TaskGenError::ZeroDim);
    }
    let mut rng = substream(seed, STREAM_TASK, 0);
    let mut normal_vec = |len: usize| DVector::from_fn(len, |_, _| rng.sample::<f64, _>(StandardNormal));

    let (params, hidden_dim) = match kind {
        TaskKind::Linear | TaskKind::Quadratic | TaskKind::SqrtLinear | TaskKind::Cubic => {
            (TaskParams::Single { w: normal_vec(d) }, None)
        }
        TaskKind::LinearPlusQuadratic => (
            TaskParams::Pair {
                w1: normal_vec(d),
                w2: normal_vec(d),
            },
            None,
        ),
        TaskKind::ReluNn | TaskKind::SigmoidNn => {
            let dp = d_prime.ok_or(TaskGenError::MissingHiddenDim)?;
            if dp == 0 {
                return Err(TaskGenError::ZeroDim);
            }
            let w1 = normal_vec(dp);
            let w2 = DMatrix::from_fn(dp, d, |_, _| rng.sample::<f64, _>(StandardNormal));
            (TaskParams::Network { w1, w2 }, Some(dp))
        }
    };
    let task = TaskFunction {
        kind,
        params,
        dim: d,
        hidden_dim,
    };
    task.validate()?;
    Ok(task)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_at_origin_is_zero() {
        let task = sample_task(TaskKind::Linear, 5, None, 1).unwrap();
        assert_eq!(task.evaluate(&DVector::zeros(5)), 0.0);
    }

    #[test]
    fn quadratic_with_unit_weights_sums_squares() {
        let task = TaskFunction {
            kind: TaskKind::Quadratic,
            params: TaskParams::Single {
                w: DVector::from_element(4, 1.0),
            },
            dim: 4,
            hidden_dim: None,
        };
        let x = DVector::from_vec(vec![1.0, -1.0, 1.0, -1.0]);
        assert_eq!(task.evaluate(&x), 4.0);
    }

    #[test]
    fn relu_kills_all_negative_preactivations() {
        let task = TaskFunction {
            kind: TaskKind::ReluNn,
            params: TaskParams::Network {
                w1: DVector::from_element(3, 1.0),
                w2: DMatrix::identity(3, 3),
            },
            dim: 3,
            hidden_dim: Some(3),
        };
        let x = DVector::from_vec(vec![-1.0, -2.0, -0.5]);
        assert_eq!(task.evaluate(&x), 0.0);
    }

    #[test]
    fn network_kinds_require_hidden_dim() {
        assert!(matches!(
            sample_task(TaskKind::SigmoidNn, 4, None, 9),
            Err(TaskGenError::MissingHiddenDim)
        ));
    }

    #[test]
    fn signed_sqrt_is_odd() {
        assert_eq!(signed_sqrt(4.0), 2.0);
        assert_eq!(signed_sqrt(-4.0), -2.0);
        assert_eq!(signed_sqrt(0.0), 0.0);
    }

    #[test]
    fn sampling_is_deterministic_and_finite() {
        for kind in TaskKind::all() {
            let dp = kind.is_network().then_some(7);
            let a = sample_task(kind, 6, dp, 44).unwrap();
            let b = sample_task(kind, 6, dp, 44).unwrap();
            assert_eq!(a, b);
            let x = DVector::from_vec(vec![0.3, -1.2, 0.0, 2.5, -0.1, 1.0]);
            assert!(a.evaluate(&x).is_finite());
        }
    }

    #[test]
    fn task_round_trips_through_json() {
        let task = sample_task(TaskKind::ReluNn, 3, Some(4), 5).unwrap();
        let json = serde_json::to_string(&task).unwrap();
        let back: TaskFunction = serde_json::from_str(&json).unwrap();
        assert_eq!(back, task);
        back.validate().unwrap();
    }
}
