use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Noise scales of the generative model: inputs x ~ N(mu, sigma_x² I), labels
/// y ~ N(⟨x, w⟩, sigma_y²), and the component spreads mu ~ N(mu_m, sigma_mu² I),
/// w ~ N(w_m, sigma_w² I).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HyperRaw", into = "HyperRaw")]
pub struct Hyper {
    sigma_x: f64,
    sigma_y: f64,
    sigma_mu: f64,
    sigma_w: f64,
}

#[derive(Serialize, Deserialize)]
struct HyperRaw {
    sigma_x: f64,
    sigma_y: f64,
    sigma_mu: f64,
    sigma_w: f64,
}

impl From<Hyper> for HyperRaw {
    fn from(h: Hyper) -> Self {
        HyperRaw {
            sigma_x: h.sigma_x,
            sigma_y: h.sigma_y,
            sigma_mu: h.sigma_mu,
            sigma_w: h.sigma_w,
        }
    }
}

impl TryFrom<HyperRaw> for Hyper {
    type Error = Error;
    fn try_from(raw: HyperRaw) -> Result<Self> {
        Hyper::new(raw.sigma_x, raw.sigma_y, raw.sigma_mu, raw.sigma_w)
    }
}

impl Hyper {
    pub fn new(sigma_x: f64, sigma_y: f64, sigma_mu: f64, sigma_w: f64) -> Result<Self> {
        for (name, value) in [
            ("sigma_x", sigma_x),
            ("sigma_y", sigma_y),
            ("sigma_mu", sigma_mu),
            ("sigma_w", sigma_w),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidHyper { name, value });
            }
        }
        Ok(Hyper {
            sigma_x,
            sigma_y,
            sigma_mu,
            sigma_w,
        })
    }

    /// Unit scales everywhere: sigma_x = sigma_y = sigma_mu = sigma_w = 1.
    pub fn standard() -> Self {
        Hyper::new(1.0, 1.0, 1.0, 1.0).expect("unit scales are valid")
    }

    pub fn sigma_x(&self) -> f64 {
        self.sigma_x
    }
    pub fn sigma_y(&self) -> f64 {
        self.sigma_y
    }
    pub fn sigma_mu(&self) -> f64 {
        self.sigma_mu
    }
    pub fn sigma_w(&self) -> f64 {
        self.sigma_w
    }

    /// delta_mu = sigma_mu² / sigma_x², always the exact quotient.
    pub fn delta_mu(&self) -> f64 {
        (self.sigma_mu * self.sigma_mu) / (self.sigma_x * self.sigma_x)
    }

    /// delta_w = sigma_w² / sigma_y², always the exact quotient.
    pub fn delta_w(&self) -> f64 {
        (self.sigma_w * self.sigma_w) / (self.sigma_y * self.sigma_y)
    }
}
