use thiserror::Error;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error(transparent)]
    Core(#[from] mixprior_core::Error),

    #[error(transparent)]
    TaskGen(#[from] taskgen::TaskGenError),

    #[error("gradient descent needs at least one context example")]
    EmptyContext,

    #[error("gradient descent diverged at step {step} (loss {loss:.3e})")]
    Diverged { step: usize, loss: f64 },

    #[error("ridge penalty must be positive, got {0}")]
    NonPositiveLambda(f64),

    #[error("least-squares solve failed: {0}")]
    SolveFailed(String),

    #[error("scalar targets could not be recovered: {0}")]
    TargetRecovery(String),
}

pub type Result<T> = std::result::Result<T, BaselineError>;
