//! Fixtures shared by the kernel benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sparselogit::data::{simulate_multiclass_p2000, standardize, SyntheticSpecB};
use sparselogit::engine::{gibbs_iteration, initialize_chain};
use sparselogit::{ChainState, Dataset, McmcSettings, PriorFamily, PriorSpec};

/// Standardized three-class training set with `noise_features` irrelevant columns.
pub fn multiclass(n_train: usize, noise_features: usize, seed: u64) -> Dataset {
    let spec = SyntheticSpecB {
        n_train,
        n_test: 0,
        noise_features,
    };
    let (train, _) =
        simulate_multiclass_p2000(&spec, &mut ChaCha8Rng::seed_from_u64(seed)).expect("simulate");
    standardize(&train, &[]).expect("standardize").0
}

pub fn prior(family: PriorFamily) -> PriorSpec {
    PriorSpec::new(family, 1.0, -10.0)
}

/// Chain state after a short warmup, so most noise variances have already shrunk.
pub fn warm_state(dataset: &Dataset, prior: &PriorSpec, warmup: usize) -> ChainState {
    let mut state = initialize_chain(dataset, prior).expect("initialize");
    let settings = McmcSettings::new(warmup.max(1), 10, 1, 10, 0.3, 0.05, 7);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..warmup {
        gibbs_iteration(&mut state, dataset, prior, &settings, settings.l1, &mut rng)
            .expect("warmup");
    }
    state
}
