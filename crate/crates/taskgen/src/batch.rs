//! ICL batches: standard-normal inputs labeled by a task function.

use nalgebra::DVector;
use rand_distr::StandardNormal;

use mixprior_core::{substream, ContextSequence};
use rand::Rng;

use crate::error::Result;
use crate::function::TaskFunction;

pub const STREAM_BATCH: u64 = 0x72;

/// A context plus the held-out true label of its query.
#[derive(Debug, Clone)]
pub struct IclBatch {
    pub context: ContextSequence,
    pub query_label: f64,
}

/// Draw T examples x_i ~ N(0, I_d), y_i = task(x_i), plus a query pair.
pub fn sample_icl_batch(task: &TaskFunction, t: usize, seed: u64) -> Result<IclBatch> {
    let mut rng = substream(seed, STREAM_BATCH, 0);
    let d = task.dim;
    let mut draw = |rng: &mut rand_chacha::ChaCha8Rng| {
        DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal))
    };
    let xs: Vec<DVector<f64>> = (0..t).map(|_| draw(&mut rng)).collect();
    let ys: Vec<f64> = xs.iter().map(|x| task.evaluate(x)).collect();
    let query = draw(&mut rng);
    let query_label = task.evaluate(&query);
    Ok(IclBatch {
        context: ContextSequence::new(xs, ys, query)?,
        query_label,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{sample_task, TaskKind, TaskParams};

    #[test]
    fn linear_labels_are_exact_dot_products() {
        let task = sample_task(TaskKind::Linear, 8, None, 3).unwrap();
        let TaskParams::Single { w } = &task.params else {
            panic!("linear task has a single weight vector")
        };
        let batch = sample_icl_batch(&task, 16, 4).unwrap();
        for (x, y) in batch.context.xs().iter().zip(batch.context.ys()) {
            assert_eq!(*y, w.dot(x));
        }
        assert_eq!(batch.query_label, w.dot(batch.context.query()));
    }

    #[test]
    fn same_seed_same_batch() {
        let task = sample_task(TaskKind::Cubic, 4, None, 5).unwrap();
        let a = sample_icl_batch(&task, 10, 11).unwrap();
        let b = sample_icl_batch(&task, 10, 11).unwrap();
        assert_eq!(a.context, b.context);
        assert_eq!(a.query_label.to_bits(), b.query_label.to_bits());
    }

    #[test]
    fn label_variance_tracks_weight_norm() {
        // For linear tasks with x ~ N(0, I), Var(y) = ‖w‖².
        let task = sample_task(TaskKind::Linear, 20, None, 8).unwrap();
        let TaskParams::Single { w } = &task.params else {
            unreachable!()
        };
        let batch = sample_icl_batch(&task, 1000, 21).unwrap();
        let mean: f64 = batch.context.ys().iter().sum::<f64>() / 1000.0;
        let var: f64 = batch
            .context
            .ys()
            .iter()
            .map(|y| (y - mean).powi(2))
            .sum::<f64>()
            / 999.0;
        let expected = w.norm_squared();
        assert!(
            (var - expected).abs() < 0.15 * expected,
            "var {var} vs ‖w‖² {expected}"
        );
    }
}
