//! Literal evaluation of the context assumption behind the Psi_w sign result.
//!
//! The three conditions are checked exactly as stated, even though the first
//! two can only hold at d = 1 for rank-one outer products (see the crate
//! README note); the property trials therefore run on d = 1 sign designs
//! where all three are satisfiable.

use nalgebra::DVector;
use serde::Serialize;

use mixprior_core::{ContextSequence, Error, Hyper};

use crate::error::Result;
use crate::tolerances::IDENTITY_TOL;

/// Outcome of evaluating the three context conditions.
#[derive(Debug, Clone, Serialize)]
pub struct Assumption2Report {
    /// Per example: λ_min(x_i x_iᵀ) ≥ 1.
    pub cond_min_eig: Vec<bool>,
    /// (I + T δ_w I)(I + δ_w Σ x_i x_iᵀ)⁻¹ = I within the identity tolerance.
    pub cond_identity: bool,
    /// (1/T) Σ_i 2(w_α-w_β)ᵀx_i y_i · (1/T) Σ_j (x_jᵀx_i y_j/y_i - x_iᵀx_i) ≥ 0.
    pub cond_cross: bool,
    /// Examples skipped in the cross condition because y_i = 0.
    pub zero_label_indices: Vec<usize>,
    pub all_hold: bool,
}

/// Evaluate all three conditions on a context of length T ≥ 1.
pub fn check_assumption2(
    context: &ContextSequence,
    hyper: &Hyper,
    w_alpha: &DVector<f64>,
    w_beta: &DVector<f64>,
) -> Result<Assumption2Report> {
    let t = context.len();
    if t == 0 {
        return Err(Error::InvalidMixture {
            reason: "assumption check needs at least one labeled example".into(),
        }
        .into());
    }
    let d = context.dim();
    if w_alpha.len() != d || w_beta.len() != d {
        return Err(Error::DimensionMismatch {
            what: "w_alpha/w_beta vs context dim",
            expected: d,
            got: w_alpha.len().max(w_beta.len()),
        }
        .into());
    }
    let delta_w = hyper.delta_w();
    let xs = context.xs();
    let ys = context.ys();

    // Condition 1: smallest eigenvalue of each rank-one outer product.
    let cond_min_eig: Vec<bool> = xs
        .iter()
        .map(|x| {
            let outer = x * x.transpose();
            let min_eig = outer
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            min_eig >= 1.0 - 1e-12
        })
        .collect();

    // Condition 2: (1 + T δ_w)(I + δ_w Σ x x^T)⁻¹ = I.
    let mut gram = mixprior_core::canonical_outer_sum(xs, d) * delta_w;
    for k in 0..d {
        gram[(k, k)] += 1.0;
    }
    let cond_identity = match gram.clone().try_inverse() {
        Some(inv) => {
            let scaled = inv * (1.0 + t as f64 * delta_w);
            let mut max_dev: f64 = 0.0;
            for r in 0..d {
                for c in 0..d {
                    let target = if r == c { 1.0 } else { 0.0 };
                    max_dev = max_dev.max((scaled[(r, c)] - target).abs());
                }
            }
            max_dev <= IDENTITY_TOL
        }
        None => false,
    };

    // Condition 3 (cross term), skipping y_i = 0 examples.
    let diff = w_alpha - w_beta;
    let mut zero_label_indices = Vec::new();
    let mut outer_terms = Vec::with_capacity(t);
    for (i, (x_i, &y_i)) in xs.iter().zip(ys).enumerate() {
        if y_i == 0.0 {
            zero_label_indices.push(i);
            continue;
        }
        let inner_terms: Vec<f64> = xs
            .iter()
            .zip(ys)
            .map(|(x_j, &y_j)| x_j.dot(x_i) * (y_j / y_i) - x_i.dot(x_i))
            .collect();
        let inner = mixprior_core::canonical_sum(inner_terms) / t as f64;
        outer_terms.push(2.0 * diff.dot(x_i) * y_i * inner);
    }
    let cross = mixprior_core::canonical_sum(outer_terms) / t as f64;
    let cond_cross = cross >= 0.0;

    let all_hold = cond_min_eig.iter().all(|&b| b) && cond_identity && cond_cross;
    Ok(Assumption2Report {
        cond_min_eig,
        cond_identity,
        cond_cross,
        zero_label_indices,
        all_hold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx_1d(xs: &[f64], ys: &[f64]) -> ContextSequence {
        ContextSequence::new(
            xs.iter().map(|&x| DVector::from_vec(vec![x])).collect(),
            ys.to_vec(),
            DVector::from_vec(vec![0.0]),
        )
        .unwrap()
    }

    #[test]
    fn sign_design_satisfies_first_two_conditions() {
        // d=1, xs = [1, -1, 1]: x_i² = 1 and Σ x_i² = 3 = T, so the identity
        // condition holds for any δ_w.
        let hyper = Hyper::new(1.0, 1.0, 1.0, 1.7).unwrap();
        let context = ctx_1d(&[1.0, -1.0, 1.0], &[0.5, -1.0, 2.0]);
        let w_a = DVector::from_vec(vec![0.4]);
        let w_b = DVector::from_vec(vec![-1.1]);
        let report = check_assumption2(&context, &hyper, &w_a, &w_b).unwrap();
        assert_eq!(report.cond_min_eig, vec![true, true, true]);
        assert!(report.cond_identity);
        assert!(report.zero_label_indices.is_empty());
    }

    #[test]
    fn rank_one_outer_product_fails_min_eig_at_d2() {
        let hyper = Hyper::standard();
        let context = ContextSequence::new(
            vec![DVector::from_vec(vec![2.0, 1.0])],
            vec![1.0],
            DVector::from_vec(vec![0.0, 0.0]),
        )
        .unwrap();
        let w = DVector::from_vec(vec![1.0, 0.0]);
        let report = check_assumption2(&context, &hyper, &w, &w).unwrap();
        assert_eq!(report.cond_min_eig, vec![false]);
        assert!(!report.all_hold);
    }

    #[test]
    fn unequal_norms_break_identity_condition() {
        // xs = [1, 2]: Σ x_i² = 5 ≠ T = 2 at δ_w = 1.
        let hyper = Hyper::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let context = ctx_1d(&[1.0, 2.0], &[1.0, 1.0]);
        let w = DVector::from_vec(vec![1.0]);
        let report = check_assumption2(&context, &hyper, &w, &w).unwrap();
        assert!(!report.cond_identity);
    }

    #[test]
    fn zero_labels_are_reported_not_fatal() {
        let hyper = Hyper::standard();
        let context = ctx_1d(&[1.0, -1.0], &[0.0, 1.0]);
        let w_a = DVector::from_vec(vec![1.0]);
        let w_b = DVector::from_vec(vec![0.0]);
        let report = check_assumption2(&context, &hyper, &w_a, &w_b).unwrap();
        assert_eq!(report.zero_label_indices, vec![0]);
    }

    #[test]
    fn all_hold_is_the_conjunction() {
        let hyper = Hyper::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let context = ctx_1d(&[1.0, -1.0, 1.0], &[1.0, 1.0, 1.0]);
        let w_a = DVector::from_vec(vec![1.0]);
        let w_b = DVector::from_vec(vec![0.5]);
        let report = check_assumption2(&context, &hyper, &w_a, &w_b).unwrap();
        assert_eq!(
            report.all_hold,
            report.cond_min_eig.iter().all(|&b| b) && report.cond_identity && report.cond_cross
        );
    }
}
