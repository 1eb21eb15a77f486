//! Direct linear solvers: minimum-norm least squares and ridge.

use nalgebra::{DMatrix, DVector};

use mixprior_core::ContextSequence;

use crate::error::{BaselineError, Result};

/// Relative singular-value cutoff for the pseudo-inverse.
pub const SVD_RELATIVE_CUTOFF: f64 = 1e-10;

fn design_matrix(context: &ContextSequence) -> (DMatrix<f64>, DVector<f64>) {
    let t = context.len();
    let d = context.dim();
    let x = DMatrix::from_fn(t, d, |r, c| context.xs()[r][c]);
    let y = DVector::from_fn(t, |r, _| context.ys()[r]);
    (x, y)
}

/// Minimum-ℓ₂-norm least-squares weights via SVD; singular values below
/// `SVD_RELATIVE_CUTOFF · σ_max` are treated as zero.
pub fn ols_min_norm(context: &ContextSequence) -> Result<DVector<f64>> {
    if context.is_empty() {
        return Err(BaselineError::EmptyContext);
    }
    let (x, y) = design_matrix(context);
    let svd = x.svd(true, true);
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = SVD_RELATIVE_CUTOFF * sigma_max;
    svd.solve(&y, eps)
        .map_err(|e| BaselineError::SolveFailed(e.to_string()))
}

/// Ridge regression: (XᵀX + λI)⁻¹ Xᵀy.
pub fn ridge_fit(context: &ContextSequence, lambda: f64) -> Result<DVector<f64>> {
    if context.is_empty() {
        return Err(BaselineError::EmptyContext);
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(BaselineError::NonPositiveLambda(lambda));
    }
    let (x, y) = design_matrix(context);
    let d = context.dim();
    let mut gram = x.transpose() * &x;
    for k in 0..d {
        gram[(k, k)] += lambda;
    }
    let rhs = x.transpose() * y;
    gram.cholesky()
        .map(|chol| chol.solve(&rhs))
        .ok_or_else(|| BaselineError::SolveFailed("ridge normal equations not SPD".into()))
}
