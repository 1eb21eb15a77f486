use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyper::Hyper;

/// Tolerance for the mixture-weight normalization Σ pi_m = 1.
pub const PI_SUM_TOL: f64 = 1e-12;

/// Tolerance for the optional unit-norm check on component centers.
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// One mixture component: weight pi_m, input-mean center mu_m, task-weight
/// center w_m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComponentRaw", into = "ComponentRaw")]
pub struct Component {
    pi: f64,
    mu: DVector<f64>,
    w: DVector<f64>,
}

#[derive(Serialize, Deserialize)]
struct ComponentRaw {
    pi: f64,
    mu: Vec<f64>,
    w: Vec<f64>,
}

impl From<Component> for ComponentRaw {
    fn from(c: Component) -> Self {
        ComponentRaw {
            pi: c.pi,
            mu: c.mu.iter().copied().collect(),
            w: c.w.iter().copied().collect(),
        }
    }
}

impl TryFrom<ComponentRaw> for Component {
    type Error = Error;
    fn try_from(raw: ComponentRaw) -> Result<Self> {
        Component::new(raw.pi, DVector::from_vec(raw.mu), DVector::from_vec(raw.w))
    }
}

impl Component {
    /// A single-component prior legitimately carries pi = 1, so the accepted
    /// range is (0, 1].
    pub fn new(pi: f64, mu: DVector<f64>, w: DVector<f64>) -> Result<Self> {
        if !(pi.is_finite() && pi > 0.0 && pi <= 1.0) {
            return Err(Error::InvalidMixture {
                reason: format!("component weight pi must lie in (0, 1], got {pi}"),
            });
        }
        if mu.len() != w.len() {
            return Err(Error::DimensionMismatch {
                what: "component mu vs w",
                expected: mu.len(),
                got: w.len(),
            });
        }
        if mu.iter().any(|v| !v.is_finite()) || w.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "component center",
            });
        }
        Ok(Component { pi, mu, w })
    }

    pub fn pi(&self) -> f64 {
        self.pi
    }
    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }
    pub fn w(&self) -> &DVector<f64> {
        &self.w
    }
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn is_unit_norm(&self) -> bool {
        (self.mu.norm() - 1.0).abs() <= UNIT_NORM_TOL && (self.w.norm() - 1.0).abs() <= UNIT_NORM_TOL
    }
}

/// The pretraining meta-distribution: M components over (mu, w) pairs plus
/// the shared noise scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixturePriorRaw", into = "MixturePriorRaw")]
pub struct MixturePrior {
    components: Vec<Component>,
    hyper: Hyper,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
struct MixturePriorRaw {
    components: Vec<Component>,
    hyper: Hyper,
    dim: usize,
}

impl From<MixturePrior> for MixturePriorRaw {
    fn from(p: MixturePrior) -> Self {
        MixturePriorRaw {
            components: p.components,
            hyper: p.hyper,
            dim: p.dim,
        }
    }
}

impl TryFrom<MixturePriorRaw> for MixturePrior {
    type Error = Error;
    fn try_from(raw: MixturePriorRaw) -> Result<Self> {
        let prior = MixturePrior::new(raw.components, raw.hyper)?;
        if prior.dim != raw.dim {
            return Err(Error::DimensionMismatch {
                what: "declared dim vs component dim",
                expected: raw.dim,
                got: prior.dim,
            });
        }
        Ok(prior)
    }
}

impl MixturePrior {
    pub fn new(components: Vec<Component>, hyper: Hyper) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidMixture {
                reason: "mixture needs at least one component".into(),
            });
        }
        let dim = components[0].dim();
        for c in &components {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch {
                    what: "component dims",
                    expected: dim,
                    got: c.dim(),
                });
            }
        }
        let pi_sum: f64 = components.iter().map(Component::pi).sum();
        if (pi_sum - 1.0).abs() > PI_SUM_TOL {
            return Err(Error::InvalidMixture {
                reason: format!("component weights sum to {pi_sum}, expected 1"),
            });
        }
        Ok(MixturePrior {
            components,
            hyper,
            dim,
        })
    }

    /// Like [`MixturePrior::new`] but additionally enforces unit-norm centers
    /// on every component.
    pub fn new_strict(components: Vec<Component>, hyper: Hyper) -> Result<Self> {
        let prior = MixturePrior::new(components, hyper)?;
        if let Some(&index) = prior.unit_norm_violations().first() {
            let c = &prior.components[index];
            return Err(Error::NotUnitNorm {
                index,
                mu_norm: c.mu().norm(),
                w_norm: c.w().norm(),
            });
        }
        Ok(prior)
    }

    /// Indices of components whose centers are not unit-norm. Empty when the
    /// strict normalization holds.
    pub fn unit_norm_violations(&self) -> Vec<usize> {
        self.components
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_unit_norm())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }
    pub fn hyper(&self) -> &Hyper {
        &self.hyper
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn len(&self) -> usize {
        self.components.len()
    }
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component(&self, index: usize) -> Result<&Component> {
        self.components.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: self.components.len(),
        })
    }

    /// Same components, different noise scales. Used by the noise-level sweeps.
    pub fn with_hyper(&self, hyper: Hyper) -> Self {
        MixturePrior {
            components: self.components.clone(),
            hyper,
            dim: self.dim,
        }
    }
}
