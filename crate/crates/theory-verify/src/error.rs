use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Core(#[from] mixprior_core::Error),

    #[error("trial count must be at least 1")]
    ZeroTrials,

    #[error("importance sample size {got} below the minimum {min}")]
    TooFewSamples { got: usize, min: usize },

    #[error("effective sample size {ess:.1} below {min}; estimate withheld")]
    LowConfidence { ess: f64, min: f64 },

    #[error("quadrature oracle requires d = 1, got d = {got}")]
    NotUnivariate { got: usize },

    #[error("quadrature grid needs at least {min} points, got {got}")]
    GridTooCoarse { got: usize, min: usize },

    #[error("limit check precondition violated: ‖mu_beta - mu_star‖² < ‖mu_alpha - mu_star‖²")]
    LimitOrdering,

    #[error("could not assemble {wanted} filtered trials within {attempts} attempts")]
    FilterExhausted { wanted: usize, attempts: usize },
}

pub type Result<T> = std::result::Result<T, VerifyError>;
