//! Independent verification of the closed-form predictor: brute-force
//! oracles (importance sampling and quadrature), property trials for the
//! Psi_w sign result, the large-T limit of Psi_mu, and a literal checker for
//! the downstream-context assumption.
//!
//! Nothing here shares an evidence code path with `mixprior-core`; agreement
//! between the two is the correctness argument for both.

mod assumption;
mod error;
mod instances;
mod lemma_limit;
mod oracle;
mod quadrature;
mod report;
mod theorem;
pub mod tolerances;

pub use assumption::{check_assumption2, Assumption2Report};
pub use error::{Result, VerifyError};
pub use instances::{random_small_instance, random_small_instance_1d, SmallInstance, STREAM_INSTANCE};
pub use lemma_limit::{
    analytic_limit, lemma1_limit_check, lemma1_limit_mean, LimitRow, MeanLimitRow, STREAM_LEMMA1,
};
pub use oracle::{mc_bayes_oracle, OracleEstimate, STREAM_MC, STREAM_MC_BOOT};
pub use quadrature::{gauss_legendre, quadrature_oracle_1d, MIN_GRID_POINTS};
pub use report::{run_theory_check, Assumption2Demo, OracleSpotCheck, TheoryReport};
pub use theorem::{
    theorem1_exploratory_rate, theorem1_property_trial, ExploratoryRate, Theorem1Outcome,
    STREAM_THEOREM1,
};
