use std::time::Instant;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sparselogit::data::{
    simulate_binary_p200, simulate_multiclass_p2000, standardize, SyntheticSpecA, SyntheticSpecB,
};
use sparselogit::engine::{
    initialize_chain, refresh_cache, restricted_update_set, run_chain, run_chain_from, GibbsKernel,
    Phase, UpdateScope, CACHE_REFRESH_INTERVAL,
};
use sparselogit::{Dataset, Error, McmcSettings, PriorFamily, PriorSpec, SampleStore};

fn desk_train(seed: u64) -> Dataset {
    let (train, test, _) = simulate_binary_p200(
        &SyntheticSpecA::default(),
        &mut ChaCha8Rng::seed_from_u64(seed),
    )
    .unwrap();
    standardize(&train, &[&test]).unwrap().0
}

fn short_settings(seed: u64) -> McmcSettings {
    McmcSettings::new(50, 5, 200, 20, 0.3, 0.05, seed)
}

#[test]
fn same_seed_gives_identical_draws_and_other_seeds_differ() {
    let ds = desk_train(1);
    let prior = PriorSpec::new(PriorFamily::T, 1.0, -10.0);
    let run = |seed: u64| {
        run_chain(
            &ds,
            &prior,
            &short_settings(seed),
            &mut ChaCha8Rng::seed_from_u64(seed),
        )
        .unwrap()
    };
    let (a, b, c) = (run(4), run(4), run(5));
    assert_eq!(a.draws(), b.draws());
    assert_ne!(a.draws(), c.draws());
}

#[test]
fn store_holds_thinned_sampling_draws_and_phase_statistics() {
    let ds = desk_train(2);
    let prior = PriorSpec::new(PriorFamily::Ghs, 1.0, -10.0);
    let settings = short_settings(8).with_thin(3);
    let store = run_chain(&ds, &prior, &settings, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
    assert_eq!(store.len(), settings.stored_draws());
    assert_eq!(store.len(), 200 / 3);
    // iterations are numbered from the start of the initial phase
    assert!(store.draws().iter().all(|d| (d.iteration - 50) % 3 == 0));
    let meta = store.metadata();
    assert_eq!(meta.initial.iterations, 50);
    assert_eq!(meta.sampling.iterations, 200);
    assert_eq!(meta.fingerprint, ds.fingerprint());
    assert!(store.draws().iter().all(|d| d.log_w.is_none()));
}

#[test]
fn desk_chain_rejection_rate_is_moderate() {
    let ds = desk_train(3);
    for family in [PriorFamily::T, PriorFamily::Ghs, PriorFamily::Neg] {
        let prior = PriorSpec::new(family, 1.0, -10.0);
        let settings = McmcSettings::new(200, 5, 500, 50, 0.3, 0.05, 30);
        let store = run_chain(&ds, &prior, &settings, &mut ChaCha8Rng::seed_from_u64(30)).unwrap();
        assert!(
            store.rejection_rate() < 0.5,
            "{family}: rejection rate {}",
            store.rejection_rate()
        );
    }
}

#[test]
fn cache_stays_consistent_across_refresh_boundary() {
    let ds = desk_train(4);
    let prior = PriorSpec::new(PriorFamily::Neg, 1.0, -10.0);
    let mut state = initialize_chain(&ds, &prior).unwrap();
    let kernel = GibbsKernel::new(&ds, prior, UpdateScope::Restricted(0.05)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    for _ in 0..CACHE_REFRESH_INTERVAL + 10 {
        kernel.iterate(&mut state, 5, 0.3, &mut rng).unwrap();
        assert!(state.cache_drift(&ds) < 1e-9);
    }
    let drift = refresh_cache(&mut state, &ds);
    assert!(drift < 1e-9);
    assert_eq!(state.cache_drift(&ds), 0.0);
}

#[test]
fn restricted_set_always_contains_intercept() {
    let ds = desk_train(5);
    let prior = PriorSpec::new(PriorFamily::T, 1.0, -10.0);
    let state = initialize_chain(&ds, &prior).unwrap();
    let all = restricted_update_set(state.sigma_sq(), 0.0);
    assert_eq!(all, (0..=200).collect::<Vec<_>>());
    assert_eq!(
        restricted_update_set(state.sigma_sq(), f64::INFINITY),
        vec![0]
    );
}

/// Per-iteration cost grows with the active set, not with p.
#[test]
fn restricted_iterations_cost_scales_with_active_features() {
    let spec = SyntheticSpecB {
        n_train: 100,
        n_test: 0,
        noise_features: 1990,
    };
    let (train, _) = simulate_multiclass_p2000(&spec, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
    let (train, _) = standardize(&train, &[]).unwrap();
    let prior = PriorSpec::new(PriorFamily::T, 1.0, -10.0);
    // let the noise variances shrink first; the initial estimates keep most features active
    let mut init = initialize_chain(&train, &prior).unwrap();
    let warm = GibbsKernel::new(&train, prior, UpdateScope::Restricted(0.05)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..300 {
        warm.iterate(&mut init, 10, 0.3, &mut rng).unwrap();
    }
    let time = |zeta: f64| {
        let kernel = GibbsKernel::new(&train, prior, UpdateScope::Restricted(zeta)).unwrap();
        let mut state = init.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let mut active = 0;
        let start = Instant::now();
        for _ in 0..30 {
            active += kernel
                .iterate(&mut state, 10, 0.3, &mut rng)
                .unwrap()
                .active_features;
        }
        (start.elapsed().as_secs_f64(), active as f64 / 30.0)
    };
    let (full_t, full_active) = time(0.0);
    let (small_t, small_active) = time(0.05);
    assert_eq!(full_active, 2000.0);
    assert!(small_active < 500.0, "active {small_active}");
    assert!(
        small_t < full_t / 2.0,
        "restricted {small_t:.3} s vs full {full_t:.3} s"
    );
}

#[test]
fn observer_sees_both_phases_with_bounded_frequency() {
    let ds = desk_train(7);
    let prior = PriorSpec::new(PriorFamily::T, 1.0, -10.0);
    let settings = short_settings(70);
    let state = initialize_chain(&ds, &prior).unwrap();
    let mut calls = Vec::new();
    let store = run_chain_from(
        state,
        &ds,
        &prior,
        &settings,
        &mut ChaCha8Rng::seed_from_u64(70),
        &mut |p| {
            assert!(p.log_likelihood.is_finite());
            calls.push((p.phase, p.done, p.total));
        },
    )
    .unwrap();
    assert!(!store.is_empty());
    let initial = calls.iter().filter(|c| c.0 == Phase::Initial).count();
    let sampling = calls.iter().filter(|c| c.0 == Phase::Sampling).count();
    assert!((1..=101).contains(&initial) && (1..=101).contains(&sampling));
    assert!(calls
        .windows(2)
        .all(|w| w[0].0 != w[1].0 || w[0].1 < w[1].1));
}

#[test]
fn hyper_w_chain_records_log_w() {
    let ds = desk_train(8);
    let prior = PriorSpec::new(PriorFamily::Ghs, 1.0, 0.0).with_hyper_w(100.0);
    let store = run_chain(
        &ds,
        &prior,
        &short_settings(80),
        &mut ChaCha8Rng::seed_from_u64(80),
    )
    .unwrap();
    let log_ws: Vec<f64> = store.draws().iter().map(|d| d.log_w.unwrap()).collect();
    assert!(log_ws.iter().all(|v| v.is_finite()));
    // the data pull log w well below its starting value of 0
    assert!(log_ws.iter().sum::<f64>() / (log_ws.len() as f64) < -2.0);
}

#[test]
fn missing_training_class_is_reported() {
    let x = Array2::from_shape_fn((6, 2), |(i, j)| (i + j) as f64);
    let ds = Dataset::new(x, vec![1, 1, 3, 3, 1, 3], 3).unwrap();
    let prior = PriorSpec::new(PriorFamily::T, 1.0, -10.0);
    match initialize_chain(&ds, &prior) {
        Err(Error::MissingClass { class }) => assert_eq!(class, 2),
        other => panic!("expected MissingClass, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn chain_store_survives_save_and_load_bitwise() {
    let ds = desk_train(9);
    let prior = PriorSpec::new(PriorFamily::Neg, 2.0, -12.0).with_hyper_w(10.0);
    let store = run_chain(
        &ds,
        &prior,
        &short_settings(90),
        &mut ChaCha8Rng::seed_from_u64(90),
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store.txt");
    store.save(&path).unwrap();
    let back = SampleStore::load(&path).unwrap();
    assert_eq!(back.draws(), store.draws());
    assert_eq!(back.metadata(), store.metadata());
}
