//! Shape of the min-norm least-squares test error on mismatched data and
//! the GD-vs-direct-solver plateau.

use baselines::{gd_fit, ols_min_norm, GdOptions};
use taskgen::{sample_icl_batch, sample_task, TaskKind};

/// Mean squared query error of the min-norm fit on quadratic-task data.
fn min_norm_error_at(t: usize, trials: u64, d: usize) -> f64 {
    let mut total = 0.0;
    for trial in 0..trials {
        let task = sample_task(TaskKind::Quadratic, d, None, 5000 + trial).unwrap();
        let batch = sample_icl_batch(&task, t, 6000 + trial).unwrap();
        let w = ols_min_norm(&batch.context).unwrap();
        total += (w.dot(batch.context.query()) - batch.query_label).powi(2);
    }
    total / trials as f64
}

#[test]
fn error_peaks_where_examples_equal_dimension() {
    let d = 20;
    let trials = 200;
    let at_half = min_norm_error_at(d / 2, trials, d);
    let at_d = min_norm_error_at(d, trials, d);
    let at_double = min_norm_error_at(2 * d, trials, d);
    assert!(
        at_d > 1.5 * at_half && at_d > 1.5 * at_double,
        "no peak: errors {at_half:.1} / {at_d:.1} / {at_double:.1} at T = d/2, d, 2d"
    );
}

#[test]
fn gd_linear_plateau_matches_min_norm_on_mismatched_data() {
    // On quadratic data both the GD-trained linear model and the direct
    // solver estimate the same population projection; at T = 3d their mean
    // query errors agree within 10%.
    let d = 20;
    let t = 3 * d;
    let trials = 60;
    let mut gd_total = 0.0;
    let mut ols_total = 0.0;
    for trial in 0..trials {
        let task = sample_task(TaskKind::Quadratic, d, None, 8800 + trial).unwrap();
        let batch = sample_icl_batch(&task, t, 9900 + trial).unwrap();
        let opts = GdOptions {
            seed: trial,
            ..GdOptions::default()
        };
        let fit = gd_fit(TaskKind::Linear, &batch.context, &opts).unwrap();
        gd_total += (fit.predict(batch.context.query()) - batch.query_label).powi(2);
        let w = ols_min_norm(&batch.context).unwrap();
        ols_total += (w.dot(batch.context.query()) - batch.query_label).powi(2);
    }
    let gd_mean = gd_total / trials as f64;
    let ols_mean = ols_total / trials as f64;
    let rel = (gd_mean - ols_mean).abs() / ols_mean;
    assert!(
        rel < 0.10,
        "GD plateau {gd_mean:.3} vs min-norm {ols_mean:.3} ({rel:.3} relative)"
    );
}
