//! Test-error curves over context length.

use rayon::prelude::*;

use taskgen::{sample_icl_batch, TaskFunction};

use crate::error::{MetricsError, Result};
use crate::predictor::IclPredictor;
use crate::table::{index_coord, ResultTable};

pub const STREAM_CURVE: u64 = 0x91;

/// Squared query error per (context length, trial), fresh contexts from the
/// task every trial. Deterministic for a given seed regardless of thread
/// count: each cell derives its own RNG substream and cells land in
/// preallocated slots.
pub fn error_curve(
    predictor: &dyn IclPredictor,
    task: &TaskFunction,
    t_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<ResultTable> {
    if trials == 0 {
        return Err(MetricsError::ZeroTrials);
    }
    let jobs: Vec<(usize, usize)> = t_grid
        .iter()
        .copied()
        .flat_map(|t| (0..trials).map(move |trial| (t, trial)))
        .collect();
    let cells: Vec<Result<f64>> = jobs
        .par_iter()
        .enumerate()
        .map(|(idx, &(t, _trial))| {
            use rand::Rng;
            let mut cell_rng = mixprior_core::substream(seed, STREAM_CURVE, idx as u64);
            let batch_seed: u64 = cell_rng.gen();
            let predictor_seed: u64 = cell_rng.gen();
            let batch = sample_icl_batch(task, t, batch_seed)?;
            let prediction = predictor.predict(&batch.context, predictor_seed)?;
            Ok((prediction - batch.query_label).powi(2))
        })
        .collect();

    let mut table = ResultTable::new(
        "query_sq_error",
        vec!["predictor".into(), "context_length".into(), "trial".into()],
    );
    for ((t, trial), cell) in jobs.into_iter().zip(cells) {
        table.push(
            vec![
                predictor.name(),
                index_coord(t),
                index_coord(trial),
            ],
            cell?,
        )?;
    }
    Ok(table)
}

/// Mean value per context length from an error-curve table.
pub fn mean_by_context_length(table: &ResultTable) -> Vec<(usize, f64)> {
    use std::collections::BTreeMap;
    let Some(k) = table.axes.iter().position(|a| a == "context_length") else {
        return Vec::new();
    };
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for row in &table.rows {
        if let Some(v) = row.value {
            let e = acc.entry(row.coords[k].clone()).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
    }
    acc.into_iter()
        .map(|(t, (sum, n))| (t.parse().unwrap_or(0), sum / n as f64))
        .collect()
}
