//! Stochastic kernels: HMC, adaptive rejection sampling and the variance conditionals.

pub mod ars;
pub mod conditionals;
pub mod hmc;

pub use ars::{ars_sample, expand_bracket, ArsSampler, Bounded, LogConcave};
pub use conditionals::{
    improper_at_zero, sample_log_w, sample_sigma_sq, sample_sigma_sq_ghs, sample_sigma_sq_ig,
    sample_sigma_sq_neg, GhsXiTarget, LogWTarget, NegXiTarget,
};
pub use hmc::{hmc_update, leapfrog, HmcConfig, HmcOutcome, Potential, DIVERGENCE_THRESHOLD};
