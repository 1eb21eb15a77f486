//! Deterministic 1-D quadrature oracle.
//!
//! For d = 1 the posterior expectation E[y_query | context] is a ratio of
//! two-dimensional integrals over (mu, w). Per component the integrand is
//! evaluated on a Gauss–Legendre tensor grid covering ±8 prior standard
//! deviations around the component centers; component contributions are
//! combined under a shared exponent shift. Entirely independent of the
//! closed-form evidence path.

use mixprior_core::{ContextSequence, MixturePrior};

use crate::error::{Result, VerifyError};
use crate::tolerances::MIN_MC_SAMPLES;

/// Minimum grid resolution per axis.
pub const MIN_GRID_POINTS: usize = 256;

/// Half-width of the integration box in prior standard deviations.
const BOX_SIGMAS: f64 = 8.0;

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for k in 0..m {
        // Tricomi-style initial guess for the k-th positive root.
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P'_n(x) by upward recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k] = -x;
        nodes[n - 1 - k] = x;
        weights[k] = w;
        weights[n - 1 - k] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

struct ComponentGrid {
    log_pi: f64,
    /// log prior-plus-likelihood along the mu axis (T+1 input terms).
    log_mu: Vec<f64>,
    /// log prior-plus-likelihood along the w axis (T label terms).
    log_w: Vec<f64>,
    w_values: Vec<f64>,
    wt_mu: Vec<f64>,
    wt_w: Vec<f64>,
}

/// E[y_query | context] for a univariate prior by tensor-grid quadrature.
pub fn quadrature_oracle_1d(
    prior: &MixturePrior,
    context: &ContextSequence,
    grid_points: usize,
) -> Result<f64> {
    if prior.dim() != 1 || context.dim() != 1 {
        return Err(VerifyError::NotUnivariate {
            got: prior.dim().max(context.dim()),
        });
    }
    if grid_points < MIN_GRID_POINTS {
        return Err(VerifyError::GridTooCoarse {
            got: grid_points,
            min: MIN_GRID_POINTS,
        });
    }
    let _ = MIN_MC_SAMPLES; // quadrature has no sampling floor; grid floor above

    let h = prior.hyper();
    let (gl_nodes, gl_weights) = gauss_legendre(grid_points);
    let inv_2smu2 = 1.0 / (2.0 * h.sigma_mu() * h.sigma_mu());
    let inv_2sw2 = 1.0 / (2.0 * h.sigma_w() * h.sigma_w());
    let inv_2sx2 = 1.0 / (2.0 * h.sigma_x() * h.sigma_x());
    let inv_2sy2 = 1.0 / (2.0 * h.sigma_y() * h.sigma_y());

    let xs: Vec<f64> = context.xs().iter().map(|x| x[0]).collect();
    let ys = context.ys();
    let query = context.query()[0];

    let mut grids = Vec::with_capacity(prior.len());
    let mut global_shift = f64::NEG_INFINITY;
    for c in prior.components() {
        let mu_c = c.mu()[0];
        let w_c = c.w()[0];
        let half_mu = BOX_SIGMAS * h.sigma_mu();
        let half_w = BOX_SIGMAS * h.sigma_w();

        let mut log_mu = Vec::with_capacity(grid_points);
        let mut wt_mu = Vec::with_capacity(grid_points);
        for (&node, &wt) in gl_nodes.iter().zip(&gl_weights) {
            let mu = mu_c + half_mu * node;
            let mut lp = -(mu - mu_c) * (mu - mu_c) * inv_2smu2;
            for &x in &xs {
                lp -= (x - mu) * (x - mu) * inv_2sx2;
            }
            lp -= (query - mu) * (query - mu) * inv_2sx2;
            log_mu.push(lp);
            wt_mu.push(wt * half_mu);
        }

        let mut log_w = Vec::with_capacity(grid_points);
        let mut w_values = Vec::with_capacity(grid_points);
        let mut wt_w = Vec::with_capacity(grid_points);
        for (&node, &wt) in gl_nodes.iter().zip(&gl_weights) {
            let w = w_c + half_w * node;
            let mut lp = -(w - w_c) * (w - w_c) * inv_2sw2;
            for (&x, &y) in xs.iter().zip(ys) {
                let r = y - x * w;
                lp -= r * r * inv_2sy2;
            }
            log_w.push(lp);
            w_values.push(w);
            wt_w.push(wt * half_w);
        }

        let max_mu = log_mu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let max_w = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        global_shift = global_shift.max(c.pi().ln() + max_mu + max_w);

        grids.push(ComponentGrid {
            log_pi: c.pi().ln(),
            log_mu,
            log_w,
            w_values,
            wt_mu,
            wt_w,
        });
    }

    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for g in &grids {
        for (i, &lmu) in g.log_mu.iter().enumerate() {
            let row = g.log_pi + lmu - global_shift;
            let row_wt = g.wt_mu[i];
            for (j, &lw) in g.log_w.iter().enumerate() {
                let f = (row + lw).exp() * row_wt * g.wt_w[j];
                denominator += f;
                numerator += f * query * g.w_values[j];
            }
        }
    }
    Ok(numerator / denominator)
}
