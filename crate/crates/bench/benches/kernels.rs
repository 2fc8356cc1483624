use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sparselogit::engine::{GibbsKernel, UpdateScope};
use sparselogit::model::grad_neg_log_likelihood;
use sparselogit::samplers::sample_sigma_sq;
use sparselogit::PriorFamily;
use sparselogit_bench::{multiclass, prior, warm_state};

fn gibbs(c: &mut Criterion) {
    let ds = multiclass(100, 490, 1);
    let spec = prior(PriorFamily::T);
    let warm = warm_state(&ds, &spec, 100);
    let mut group = c.benchmark_group("gibbs_iteration_p500");
    group.sample_size(20);
    for (name, scope) in [
        ("full", UpdateScope::Full),
        ("restricted", UpdateScope::Restricted(0.05)),
    ] {
        let kernel = GibbsKernel::new(&ds, spec, scope).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        group.bench_function(name, |b| {
            b.iter_batched(
                || warm.clone(),
                |mut state| kernel.iterate(&mut state, 10, 0.3, &mut rng).unwrap(),
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

fn variance_conditionals(c: &mut Criterion) {
    let mut group = c.benchmark_group("sigma_sq_conditional");
    for family in [PriorFamily::T, PriorFamily::Ghs, PriorFamily::Neg] {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (label, v) in [("v_small", 1e-6), ("v_large", 4.0)] {
            group.bench_function(format!("{family}/{label}"), |b| {
                b.iter(|| {
                    sample_sigma_sq(family, 1.0, (-10f64).exp(), 2, black_box(v), &mut rng).unwrap()
                })
            });
        }
    }
    group.finish();
}

fn gradient(c: &mut Criterion) {
    let ds = multiclass(100, 490, 4);
    let state = warm_state(&ds, &prior(PriorFamily::T), 0);
    let all: Vec<usize> = (0..=ds.n_features()).collect();
    let few: Vec<usize> = (0..=10).collect();
    let mut group = c.benchmark_group("grad_neg_log_likelihood_p500");
    group.bench_function("all_rows", |b| {
        b.iter(|| grad_neg_log_likelihood(&ds, state.delta(), black_box(&all)).unwrap())
    });
    group.bench_function("eleven_rows", |b| {
        b.iter(|| grad_neg_log_likelihood(&ds, state.delta(), black_box(&few)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, gibbs, variance_conditionals, gradient);
criterion_main!(benches);
