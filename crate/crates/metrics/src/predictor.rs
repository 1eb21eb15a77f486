//! The predictors an error curve can evaluate, behind one trait.

use mixprior_core::{posterior, ContextSequence, MixturePrior};
use taskgen::TaskKind;

use baselines::{gd_fit, ols_min_norm, ridge_fit, GdOptions};

use crate::error::Result;

/// Anything that maps a context to a scalar query prediction. `seed` feeds
/// stochastic predictors (GD initialization); deterministic ones ignore it.
pub trait IclPredictor: Sync {
    fn name(&self) -> String;
    fn predict(&self, context: &ContextSequence, seed: u64) -> Result<f64>;
}

/// The closed-form posterior prediction under a fixed mixture prior.
pub struct ClosedFormPredictor {
    pub prior: MixturePrior,
}

impl IclPredictor for ClosedFormPredictor {
    fn name(&self) -> String {
        "closed_form".into()
    }
    fn predict(&self, context: &ContextSequence, _seed: u64) -> Result<f64> {
        Ok(posterior(&self.prior, context)?.prediction)
    }
}

/// Gradient-descent fit of one hypothesis class per context.
pub struct GdPredictor {
    pub kind: TaskKind,
    pub lr: f64,
    pub steps: usize,
    pub hidden_dim: Option<usize>,
}

impl IclPredictor for GdPredictor {
    fn name(&self) -> String {
        format!("gd_{}", self.kind.name())
    }
    fn predict(&self, context: &ContextSequence, seed: u64) -> Result<f64> {
        let opts = GdOptions {
            lr: self.lr,
            steps: self.steps,
            seed,
            hidden_dim: self.hidden_dim,
        };
        let fit = gd_fit(self.kind, context, &opts)?;
        Ok(fit.predict(context.query()))
    }
}

/// Minimum-norm least squares refit per context.
pub struct MinNormPredictor;

impl IclPredictor for MinNormPredictor {
    fn name(&self) -> String {
        "ols_min_norm".into()
    }
    fn predict(&self, context: &ContextSequence, _seed: u64) -> Result<f64> {
        Ok(ols_min_norm(context)?.dot(context.query()))
    }
}

/// Ridge refit per context.
pub struct RidgePredictor {
    pub lambda: f64,
}

impl IclPredictor for RidgePredictor {
    fn name(&self) -> String {
        format!("ridge_{}", self.lambda)
    }
    fn predict(&self, context: &ContextSequence, _seed: u64) -> Result<f64> {
        Ok(ridge_fit(context, self.lambda)?.dot(context.query()))
    }
}
