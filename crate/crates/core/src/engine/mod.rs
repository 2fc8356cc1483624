//! The HMC-within-Gibbs chain, its settings and stored output.

mod chain;
mod settings;
mod store;

pub use chain::{
    compute_linear_predictors, gibbs_iteration, initialize_chain, refresh_cache,
    restricted_update_set, run_chain, run_chain_from, ChainFailure, ChainState, GibbsKernel,
    IterationReport, Phase, Progress, UpdateScope, CACHE_REFRESH_INTERVAL,
};
pub use settings::{default_thin, McmcSettings};
pub use store::{Draw, PhaseStats, SampleStore, StoreMetadata};
