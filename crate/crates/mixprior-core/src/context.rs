use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A prompt: T labeled examples (x_i, y_i) plus the unlabeled query input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ContextSequenceRaw", into = "ContextSequenceRaw")]
pub struct ContextSequence {
    xs: Vec<DVector<f64>>,
    ys: Vec<f64>,
    query: DVector<f64>,
}

#[derive(Serialize, Deserialize)]
struct ContextSequenceRaw {
    xs: Vec<Vec<f64>>,
    ys: Vec<f64>,
    query: Vec<f64>,
}

impl From<ContextSequence> for ContextSequenceRaw {
    fn from(c: ContextSequence) -> Self {
        ContextSequenceRaw {
            xs: c.xs.iter().map(|x| x.iter().copied().collect()).collect(),
            ys: c.ys,
            query: c.query.iter().copied().collect(),
        }
    }
}

impl TryFrom<ContextSequenceRaw> for ContextSequence {
    type Error = Error;
    fn try_from(raw: ContextSequenceRaw) -> Result<Self> {
        ContextSequence::new(
            raw.xs.into_iter().map(DVector::from_vec).collect(),
            raw.ys,
            DVector::from_vec(raw.query),
        )
    }
}

impl ContextSequence {
    pub fn new(xs: Vec<DVector<f64>>, ys: Vec<f64>, query: DVector<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch {
                what: "xs vs ys length",
                expected: xs.len(),
                got: ys.len(),
            });
        }
        let dim = query.len();
        for x in &xs {
            if x.len() != dim {
                return Err(Error::DimensionMismatch {
                    what: "context input dim vs query dim",
                    expected: dim,
                    got: x.len(),
                });
            }
        }
        let finite = xs.iter().all(|x| x.iter().all(|v| v.is_finite()))
            && ys.iter().all(|v| v.is_finite())
            && query.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite { what: "context" });
        }
        Ok(ContextSequence { xs, ys, query })
    }

    /// Context length T (the query is not counted).
    pub fn len(&self) -> usize {
        self.xs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
    pub fn dim(&self) -> usize {
        self.query.len()
    }
    pub fn xs(&self) -> &[DVector<f64>] {
        &self.xs
    }
    pub fn ys(&self) -> &[f64] {
        &self.ys
    }
    pub fn query(&self) -> &DVector<f64> {
        &self.query
    }

    /// The same examples in a different order. Posterior quantities are
    /// invariant under this, bit for bit.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.xs.len() {
            return Err(Error::DimensionMismatch {
                what: "permutation length",
                expected: self.xs.len(),
                got: order.len(),
            });
        }
        let xs = order.iter().map(|&i| self.xs[i].clone()).collect();
        let ys = order.iter().map(|&i| self.ys[i]).collect();
        ContextSequence::new(xs, ys, self.query.clone())
    }
}
