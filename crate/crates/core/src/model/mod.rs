//! Model mathematics: data containers, likelihood and gradients, priors, and
//! prior random-variate generators.

mod dataset;
mod generators;
mod likelihood;
mod params;
mod prior;

pub use dataset::{Dataset, Standardization};
pub use generators::{sample_prior_beta, ScaleMixture};
pub use likelihood::{
    class_probabilities, curvature_estimates, grad_neg_log_likelihood, log_likelihood,
};
pub(crate) use likelihood::{log_normalizer, probabilities_from_eta};
pub use params::{CoefficientMatrix, VarianceVector};
pub use prior::{
    grad_neg_log_prior_row, log_prior_delta_row, log_sigma_sq_prior, sdb, v_value, PriorFamily,
    PriorSpec, WMode, DEFAULT_SIGMA0_SQ,
};
