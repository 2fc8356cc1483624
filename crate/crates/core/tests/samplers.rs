mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Gamma};

use common::{ks_one_sample, log1p_exp, mean, variance, xi_density, GridCdf};
use sparselogit::samplers::{
    ars_sample, hmc_update, sample_log_w, sample_sigma_sq_ghs, sample_sigma_sq_neg, ArsSampler,
    Bounded, HmcConfig,
};
use sparselogit::{Error, PriorFamily, VarianceVector};

// 1% critical value of the one-sample KS statistic at n = 10^4.
const KS_CRIT_1E4: f64 = 0.0163;
// 0.1% critical value, for tests that check several cases against one threshold.
const KS_CRIT_1E4_STRICT: f64 = 0.0195;

#[test]
fn ars_matches_gamma_on_half_line() {
    let target = Bounded {
        target: |x: f64| (2.0 * x.ln() - x, 2.0 / x - 1.0),
        lower: 0.0,
        upper: f64::INFINITY,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut sampler = ArsSampler::new(&target, &[1.0, 5.0]).unwrap();
    let draws: Vec<f64> = (0..10_000)
        .map(|_| sampler.draw(&mut rng).unwrap())
        .collect();
    let gamma = Gamma::new(3.0, 1.0).unwrap();
    let d = ks_one_sample(&draws, |x| gamma.cdf(x));
    assert!(d < KS_CRIT_1E4, "KS {d}");
    assert!(sampler.hull_size() <= 64);
}

#[test]
fn ars_rejects_convex_target() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let convex = Bounded {
        target: |x: f64| (x * x, 2.0 * x),
        lower: -2.0,
        upper: 2.0,
    };
    let result = ars_sample(&convex, &[-1.0, 1.0], &mut rng);
    assert!(
        matches!(result, Err(Error::NotLogConcave { .. })),
        "{result:?}"
    );
}

/// Conditionals with a long plateau in `log sigma^2` (tiny `V` next to a larger `w`).
#[test]
fn variance_conditionals_with_wide_plateau_match_quadrature() {
    let cases = [
        (PriorFamily::Ghs, 1.0, -10.0f64, 1usize, (-60f64).exp()),
        (PriorFamily::Ghs, 0.5, -20.0, 1, (-100f64).exp()),
        (PriorFamily::Neg, 1.0, -10.0, 2, (-40f64).exp()),
        (PriorFamily::Neg, 4.0, -20.0, 2, (-60f64).exp()),
    ];
    for (i, &(family, alpha, log_w, k, v)) in cases.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
        let draws: Vec<f64> = (0..10_000)
            .map(|_| {
                let s = match family {
                    PriorFamily::Ghs => sample_sigma_sq_ghs(alpha, log_w.exp(), k, v, &mut rng),
                    _ => sample_sigma_sq_neg(alpha, log_w.exp(), k, v, &mut rng),
                };
                s.unwrap().ln()
            })
            .collect();
        let oracle = match family {
            PriorFamily::Ghs => {
                GridCdf::from_log_density(|x| xi_density::ghs(alpha, log_w, k, v, x))
            }
            _ => GridCdf::from_log_density(|x| xi_density::neg(alpha, log_w, k, v, x)),
        }
        .unwrap();
        let d = ks_one_sample(&draws, |x| oracle.cdf(x));
        assert!(d < KS_CRIT_1E4_STRICT, "{family} case {i}: KS {d}");
    }
}

/// Log density of `u = log w` given the variances, from the variance-scale priors and
/// a N(0, hyper_var) prior on `u`.
fn log_w_density(family: PriorFamily, alpha: f64, s: &[f64], hyper_var: f64, u: f64) -> f64 {
    let prior = -u * u / (2.0 * hyper_var);
    let lik: f64 = s
        .iter()
        .map(|&sj| match family {
            // sigma^2 ~ IG(alpha/2, alpha w / 2)
            PriorFamily::T => alpha / 2.0 * u - alpha * u.exp() / (2.0 * sj),
            // sigma ~ half-t_alpha with scale sqrt(w)
            PriorFamily::Ghs => -0.5 * u - (alpha + 1.0) / 2.0 * (sj / (alpha * u.exp())).ln_1p(),
            // (kappa / lambda) (1 + s / lambda)^(-alpha/2 - 1), lambda = alpha w / 2
            PriorFamily::Neg => {
                let log_lambda = (alpha / 2.0).ln() + u;
                -log_lambda - (alpha / 2.0 + 1.0) * log1p_exp(sj.ln() - log_lambda)
            }
        })
        .sum();
    prior + lik
}

#[test]
fn log_w_conditional_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let s: Vec<f64> = (0..25).map(|j| (-6.0 + 0.4 * j as f64).exp()).collect();
    let sigma_sq = VarianceVector::new(s.clone()).unwrap();
    for (family, alpha, hyper_var) in [
        (PriorFamily::T, 1.0, 100.0),
        (PriorFamily::Ghs, 1.0, 100.0),
        (PriorFamily::Neg, 2.0, 4.0),
        (PriorFamily::T, 4.0, 0.25),
    ] {
        let draws: Vec<f64> = (0..10_000)
            .map(|_| sample_log_w(&sigma_sq, family, alpha, hyper_var, &mut rng).unwrap())
            .collect();
        let oracle =
            GridCdf::from_log_density(|u| log_w_density(family, alpha, &s, hyper_var, u)).unwrap();
        let d = ks_one_sample(&draws, |x| oracle.cdf(x));
        assert!(d < KS_CRIT_1E4_STRICT, "{family} alpha {alpha}: KS {d}");
    }
}

#[test]
fn hmc_with_scaled_stepsizes_samples_anisotropic_gaussian() {
    let scales = [1.0, 0.1, 5.0];
    let curv: Vec<f64> = scales.iter().map(|s: &f64| 1.0 / (s * s)).collect();
    let mut potential = |q: &[f64], g: &mut [f64]| {
        let mut u = 0.0;
        for i in 0..q.len() {
            g[i] = q[i] * curv[i];
            u += 0.5 * q[i] * q[i] * curv[i];
        }
        u
    };
    // integration time 2.1 stays clear of the half period, where q maps to nearly -q
    let config = HmcConfig::new(7, 0.3);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut q = vec![0.0; 3];
    let mut xs = vec![Vec::new(); 3];
    for _ in 0..20_000 {
        q = hmc_update(&q, &mut potential, &config, &curv, &mut rng)
            .unwrap()
            .new_position;
        for i in 0..3 {
            xs[i].push(q[i]);
        }
    }
    for i in 0..3 {
        let v = variance(&xs[i]) / (scales[i] * scales[i]);
        assert!(
            (v - 1.0).abs() < 0.06,
            "coordinate {i}: scaled variance {v}"
        );
        assert!(mean(&xs[i]).abs() / scales[i] < 0.06);
    }
}

#[test]
fn diverging_trajectory_is_rejected_without_moving() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let q = vec![0.7, -1.3];
    let config = HmcConfig::new(30, 5.0);
    let out = hmc_update(
        &q,
        &mut |x: &[f64], g: &mut [f64]| {
            g.copy_from_slice(x);
            0.5 * (x[0] * x[0] + x[1] * x[1])
        },
        &config,
        &[1.0, 1.0],
        &mut rng,
    )
    .unwrap();
    assert!(!out.accepted);
    assert!(out.divergent);
    assert_eq!(
        out.new_position
            .iter()
            .map(|v| v.to_bits())
            .collect::<Vec<_>>(),
        q.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
    );
}

#[test]
fn non_finite_gradient_is_a_divergent_rejection() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let q = vec![0.0];
    let config = HmcConfig::new(5, 0.5);
    // finite at the start, undefined once the trajectory leaves (-0.01, 0.01)
    let out = hmc_update(
        &q,
        &mut |x: &[f64], g: &mut [f64]| {
            if x[0].abs() < 0.01 {
                g[0] = x[0];
                0.5 * x[0] * x[0]
            } else {
                g[0] = f64::NAN;
                f64::NAN
            }
        },
        &config,
        &[1.0],
        &mut rng,
    );
    match out {
        Ok(o) => {
            assert!(!o.accepted && o.divergent);
            assert_eq!(o.new_position[0].to_bits(), 0f64.to_bits());
        }
        Err(e) => panic!("expected a divergent rejection, got {e}"),
    }
}
