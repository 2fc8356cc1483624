mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{mean, quantile};
use sparselogit::model::{sample_prior_beta, ScaleMixture};

#[test]
fn laplace_variance_is_gamma_squared() {
    // N(0,1) * sqrt(Exp(1)) * gamma has variance E[Z^2] E[E] gamma^2 = gamma^2
    let log_gamma = -4.0f64;
    let draws = sample_prior_beta(
        ScaleMixture::Laplace,
        1.0,
        log_gamma,
        200_000,
        &mut ChaCha8Rng::seed_from_u64(1),
    )
    .unwrap();
    let second: Vec<f64> = draws.iter().map(|b| b * b).collect();
    let ratio = mean(&second) / (2.0 * log_gamma).exp();
    assert!((ratio - 1.0).abs() < 0.1, "variance / gamma^2 = {ratio}");
}

#[test]
fn cauchy_median_of_abs_draw_is_gamma() {
    // t with alpha = 1 is Cauchy(0, gamma), whose |beta| has median gamma
    let draws = sample_prior_beta(
        ScaleMixture::T,
        1.0,
        -5.0,
        100_000,
        &mut ChaCha8Rng::seed_from_u64(2),
    )
    .unwrap();
    let mut logs: Vec<f64> = draws.iter().map(|b| b.abs().ln()).collect();
    logs.sort_by(f64::total_cmp);
    assert!((quantile(&logs, 0.5) + 5.0).abs() < 0.02);
}
