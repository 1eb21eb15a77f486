//! The one table of verification tolerances. Tests and reports both read
//! these constants so they cannot drift apart.

/// Algebraic identities (normalization, closed-form equalities).
pub const ALGEBRAIC_TOL: f64 = 1e-10;

/// Floor for the Psi_w sign property; absorbs factorization round-off.
pub const PSI_W_FLOOR: f64 = -1e-10;

/// Statistical agreement window in standard errors.
pub const STAT_SIGMA: f64 = 3.0;

/// Relative error allowed for the T → ∞ limit at the largest scheduled T.
pub const ASYMPTOTIC_REL: f64 = 0.05;

/// Element-wise tolerance for the identity condition of the context
/// assumption.
pub const IDENTITY_TOL: f64 = 1e-9;

/// Minimum effective sample size before the importance-sampling oracle
/// reports an estimate.
pub const MIN_ESS: f64 = 50.0;

/// Minimum importance sample count accepted by the oracle.
pub const MIN_MC_SAMPLES: usize = 1000;

/// Agreement between the closed form and the 1-D quadrature oracle.
pub const QUADRATURE_TOL: f64 = 1e-4;
