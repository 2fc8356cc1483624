//! Sparse multinomial logistic regression with per-feature scale-mixture shrinkage
//! priors (Student t, generalized horseshoe, normal-exponential-gamma).
//!
//! Posterior sampling alternates a Hamiltonian Monte Carlo update of the class
//! contrasts with conditional draws of the per-feature variances. Features are ranked
//! by the standard deviation of their posterior-mean class coefficients (SDB).
//!
//! Modules:
//! - [`model`]: likelihood, gradients, prior densities and generators.
//! - [`samplers`]: leapfrog HMC, adaptive rejection sampling, variance conditionals.
//! - [`engine`]: the HMC-within-Gibbs chain and its sample store.
//! - [`data`]: CSV input, standardization and synthetic designs.
//! - [`analysis`]: posterior summaries, prediction, metrics, solution paths and LOOCV.

pub mod analysis;
pub mod data;
pub mod engine;
mod error;
pub mod model;
pub mod samplers;

pub use error::{Error, Result};

pub use analysis::{PosteriorSummary, PredictionReport};
pub use engine::{ChainState, McmcSettings, SampleStore};
pub use model::{CoefficientMatrix, Dataset, PriorFamily, PriorSpec, VarianceVector, WMode};
