//! Order-canonical summation.
//!
//! The evidence terms are sums over context examples and must not depend on
//! example order, bit for bit: permuting a context is required to leave every
//! posterior quantity unchanged exactly. Plain left-to-right f64 addition
//! rounds differently under permutation, so all per-example reductions here
//! first sort the terms into a canonical order.

use nalgebra::{DMatrix, DVector};

/// Sum of `terms` in a canonical order (ascending by total order).
pub fn canonical_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_unstable_by(f64::total_cmp);
    terms.iter().sum()
}

/// Per-coordinate canonical sum of vectors.
pub fn canonical_vector_sum(terms: &[DVector<f64>], dim: usize) -> DVector<f64> {
    let mut out = DVector::zeros(dim);
    let mut scratch = Vec::with_capacity(terms.len());
    for k in 0..dim {
        scratch.clear();
        scratch.extend(terms.iter().map(|t| t[k]));
        scratch.sort_unstable_by(f64::total_cmp);
        out[k] = scratch.iter().sum();
    }
    out
}

/// Per-entry canonical sum of outer products x_i x_iᵀ (symmetric, d×d).
pub fn canonical_outer_sum(xs: &[DVector<f64>], dim: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(dim, dim);
    let mut scratch = Vec::with_capacity(xs.len());
    for r in 0..dim {
        for c in r..dim {
            scratch.clear();
            scratch.extend(xs.iter().map(|x| x[r] * x[c]));
            scratch.sort_unstable_by(f64::total_cmp);
            let v: f64 = scratch.iter().sum();
            out[(r, c)] = v;
            out[(c, r)] = v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_sum_is_permutation_invariant() {
        let terms = vec![1e16, 1.0, -1e16, 3.5, 0.25, -7.125];
        let mut rev = terms.clone();
        rev.reverse();
        assert_eq!(
            canonical_sum(terms).to_bits(),
            canonical_sum(rev).to_bits()
        );
    }

    #[test]
    fn outer_sum_matches_naive() {
        let xs = vec![
            DVector::from_vec(vec![1.0, 2.0]),
            DVector::from_vec(vec![-0.5, 3.0]),
        ];
        let got = canonical_outer_sum(&xs, 2);
        let want = &xs[0] * xs[0].transpose() + &xs[1] * xs[1].transpose();
        assert!((got - want).abs().max() < 1e-15);
    }
}
