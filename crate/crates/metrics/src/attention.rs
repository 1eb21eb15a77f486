//! Prefix-matching score of a causal attention matrix.
//!
//! For every query position i, the qualifying keys are positions j ≤ i that
//! sit directly after an earlier occurrence of token[i] (tokens[j-1] ==
//! tokens[i]). The score averages, over query positions with at least one
//! qualifying key, the attention mass placed on those keys.

use nalgebra::DMatrix;

use crate::error::{MetricsError, Result};

const ROW_SUM_TOL: f64 = 1e-6;

/// Typed outcome: sequences with no repeated tokens have no defined score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatchingScore {
    Defined(f64),
    NoQualifyingPositions,
}

impl MatchingScore {
    pub fn value(self) -> Option<f64> {
        match self {
            MatchingScore::Defined(v) => Some(v),
            MatchingScore::NoQualifyingPositions => None,
        }
    }
}

pub fn prefix_matching_score(attention: &DMatrix<f64>, tokens: &[u64]) -> Result<MatchingScore> {
    let t = tokens.len();
    if t < 2 || attention.nrows() != t || attention.ncols() != t {
        return Err(MetricsError::BadAttentionShape {
            rows: attention.nrows(),
            cols: attention.ncols(),
            tokens: t,
        });
    }
    for i in 0..t {
        let mut sum = 0.0;
        for j in 0..=i {
            let a = attention[(i, j)];
            if a < -1e-9 {
                return Err(MetricsError::NonStochasticRow { row: i, sum: a });
            }
            sum += a;
        }
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(MetricsError::NonStochasticRow { row: i, sum });
        }
    }

    let mut total = 0.0;
    let mut counted = 0usize;
    for i in 0..t {
        let mut mass = 0.0;
        let mut qualifying = false;
        for j in 1..=i {
            if tokens[j - 1] == tokens[i] {
                qualifying = true;
                mass += attention[(i, j)];
            }
        }
        if qualifying {
            total += mass;
            counted += 1;
        }
    }
    if counted == 0 {
        return Ok(MatchingScore::NoQualifyingPositions);
    }
    Ok(MatchingScore::Defined(total / counted as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn causal_matrix(rows: &[&[f64]]) -> DMatrix<f64> {
        let t = rows.len();
        DMatrix::from_fn(t, t, |r, c| rows[r].get(c).copied().unwrap_or(0.0))
    }

    #[test]
    fn perfect_induction_head_scores_one() {
        // Tokens A B A; the final query puts all mass on the position after
        // the earlier A (index 1).
        let att = causal_matrix(&[&[1.0], &[0.5, 0.5], &[0.0, 1.0, 0.0]]);
        let score = prefix_matching_score(&att, &[7, 8, 7]).unwrap();
        assert_eq!(score, MatchingScore::Defined(1.0));
    }

    #[test]
    fn uniform_final_row_scores_one_third() {
        let third = 1.0 / 3.0;
        let att = causal_matrix(&[&[1.0], &[0.5, 0.5], &[third, third, third]]);
        let score = prefix_matching_score(&att, &[7, 8, 7]).unwrap();
        let got = score.value().unwrap();
        assert!((got - third).abs() < 1e-12);
    }

    #[test]
    fn all_distinct_tokens_is_undefined() {
        let att = causal_matrix(&[&[1.0], &[0.5, 0.5], &[0.2, 0.3, 0.5]]);
        let score = prefix_matching_score(&att, &[1, 2, 3]).unwrap();
        assert_eq!(score, MatchingScore::NoQualifyingPositions);
    }

    #[test]
    fn non_stochastic_rows_are_rejected() {
        let att = causal_matrix(&[&[1.0], &[0.9, 0.2], &[0.2, 0.3, 0.5]]);
        assert!(matches!(
            prefix_matching_score(&att, &[1, 2, 1]),
            Err(MetricsError::NonStochasticRow { row: 1, .. })
        ));
    }

    #[test]
    fn score_stays_in_unit_interval() {
        // A longer sequence with repeats and scattered mass.
        let att = causal_matrix(&[
            &[1.0],
            &[0.4, 0.6],
            &[0.1, 0.8, 0.1],
            &[0.25, 0.25, 0.25, 0.25],
            &[0.0, 0.5, 0.1, 0.2, 0.2],
        ]);
        let score = prefix_matching_score(&att, &[3, 9, 3, 9, 3]).unwrap();
        let v = score.value().unwrap();
        assert!((0.0..=1.0).contains(&v), "score {v}");
    }
}
