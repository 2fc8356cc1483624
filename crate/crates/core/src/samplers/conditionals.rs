//! Full-conditional draws for the per-feature variances and the log square-scale.
//!
//! The GHS and NEG conditionals are sampled on `xi = log sigma^2`, where they are
//! log-concave; the Jacobian of the transformation is included in the target.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{check_positive, Error, Result};
use crate::model::{PriorFamily, VarianceVector};
use crate::samplers::ars::{expand_bracket, ArsSampler, LogConcave};

/// Numerically stable `log(1 + exp(x))`.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic function, the derivative of `softplus`.
pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn check_inputs(alpha: f64, w: f64, v: f64) -> Result<()> {
    check_positive("alpha", alpha)?;
    check_positive("w", w)?;
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "V",
            value: v,
        });
    }
    Ok(())
}

/// `V exp(-xi)` computed without forming `exp(-xi)` separately.
fn v_exp_neg(v: f64, xi: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        (v.ln() - xi).exp()
    }
}

/// Log density of `xi = log sigma^2` given `V` under the GHS prior, up to a constant.
#[derive(Clone, Copy, Debug)]
pub struct GhsXiTarget {
    pub alpha: f64,
    pub log_w: f64,
    pub k: usize,
    pub v: f64,
}

impl LogConcave for GhsXiTarget {
    fn log_density_and_derivative(&self, xi: f64) -> (f64, f64) {
        let k = self.k as f64;
        let a = (self.alpha + 1.0) / 2.0;
        let shift = xi - self.alpha.ln() - self.log_w;
        let ve = v_exp_neg(self.v, xi);
        let h = -0.5 * k * xi - 0.5 * ve - a * softplus(shift) + 0.5 * xi;
        let d = -0.5 * k + 0.5 * ve - a * logistic(shift) + 0.5;
        (h, d)
    }
}

/// Log density of `xi = log sigma^2` given `V` under the NEG prior, up to a constant.
#[derive(Clone, Copy, Debug)]
pub struct NegXiTarget {
    pub alpha: f64,
    pub log_w: f64,
    pub k: usize,
    pub v: f64,
}

impl NegXiTarget {
    fn log_lambda(&self) -> f64 {
        (self.alpha / 2.0).ln() + self.log_w
    }
}

impl LogConcave for NegXiTarget {
    fn log_density_and_derivative(&self, xi: f64) -> (f64, f64) {
        let k = self.k as f64;
        let a = self.alpha / 2.0 + 1.0;
        let shift = xi - self.log_lambda();
        let ve = v_exp_neg(self.v, xi);
        let h = -0.5 * k * xi - 0.5 * ve - a * softplus(shift) + xi;
        let d = -0.5 * k + 0.5 * ve - a * logistic(shift) + 1.0;
        (h, d)
    }
}

/// Starting abscissae `{log m - 2, log m, log m + 2}` with `m = (alpha w + V) / (alpha + K)`.
fn xi_abscissae(alpha: f64, w: f64, k: usize, v: f64) -> [f64; 3] {
    let m = ((alpha * w + v) / (alpha + k as f64)).ln();
    [m - 2.0, m, m + 2.0]
}

fn draw_xi<T: LogConcave, R: Rng + ?Sized>(target: &T, init: &[f64], rng: &mut R) -> Result<f64> {
    let xs = expand_bracket(target, init)?;
    let xi = ArsSampler::new(target, &xs)?.draw(rng)?;
    let s = xi.exp();
    if s > 0.0 && s.is_finite() {
        Ok(s)
    } else {
        Err(Error::NonPositiveVariance(s))
    }
}

/// Draw from `IG((alpha + K)/2, (alpha w + V)/2)`.
pub fn sample_sigma_sq_ig<R: Rng + ?Sized>(
    alpha: f64,
    w: f64,
    k: usize,
    v: f64,
    rng: &mut R,
) -> Result<f64> {
    check_inputs(alpha, w, v)?;
    let shape = (alpha + k as f64) / 2.0;
    let scale = 2.0 / (alpha * w + v);
    let gamma = Gamma::new(shape, scale).map_err(|_| Error::InvalidParameter {
        name: "inverse-gamma scale",
        value: scale,
    })?;
    // A Gamma draw can underflow to zero for tiny shapes; redraw in that case.
    for _ in 0..1000 {
        let s = 1.0 / gamma.sample(rng);
        if s > 0.0 && s.is_finite() {
            return Ok(s);
        }
    }
    Err(Error::NonPositiveVariance(f64::INFINITY))
}

/// Draw of `sigma^2` given `V` under the GHS prior, via ARS on `log sigma^2`.
///
/// With `V = 0` the conditional is improper for every `K >= 1` and an
/// [`Error::ImproperConditional`] is returned.
pub fn sample_sigma_sq_ghs<R: Rng + ?Sized>(
    alpha: f64,
    w: f64,
    k: usize,
    v: f64,
    rng: &mut R,
) -> Result<f64> {
    check_inputs(alpha, w, v)?;
    if v == 0.0 && k >= 1 {
        return Err(Error::ImproperConditional { family: "ghs", k });
    }
    let target = GhsXiTarget {
        alpha,
        log_w: w.ln(),
        k,
        v,
    };
    draw_xi(&target, &xi_abscissae(alpha, w, k, v), rng)
}

/// Draw of `sigma^2` given `V` under the NEG prior, via ARS on `log sigma^2`.
///
/// With `V = 0` the conditional is proper only for `K < 2`.
pub fn sample_sigma_sq_neg<R: Rng + ?Sized>(
    alpha: f64,
    w: f64,
    k: usize,
    v: f64,
    rng: &mut R,
) -> Result<f64> {
    check_inputs(alpha, w, v)?;
    if v == 0.0 && k >= 2 {
        return Err(Error::ImproperConditional { family: "neg", k });
    }
    let target = NegXiTarget {
        alpha,
        log_w: w.ln(),
        k,
        v,
    };
    draw_xi(&target, &xi_abscissae(alpha, w, k, v), rng)
}

/// Whether the variance conditional for `family` is improper at `V = 0`.
pub fn improper_at_zero(family: PriorFamily, k: usize) -> bool {
    match family {
        PriorFamily::T => false,
        PriorFamily::Ghs => k >= 1,
        PriorFamily::Neg => k >= 2,
    }
}

/// Draws `sigma^2` from the conditional of the given family.
pub fn sample_sigma_sq<R: Rng + ?Sized>(
    family: PriorFamily,
    alpha: f64,
    w: f64,
    k: usize,
    v: f64,
    rng: &mut R,
) -> Result<f64> {
    match family {
        PriorFamily::T => sample_sigma_sq_ig(alpha, w, k, v, rng),
        PriorFamily::Ghs => sample_sigma_sq_ghs(alpha, w, k, v, rng),
        PriorFamily::Neg => sample_sigma_sq_neg(alpha, w, k, v, rng),
    }
}

/// Conditional log density of `u = log w` given all `sigma^2_j` under a `N(0, v)`
/// hyperprior, up to a constant. Every family gives a strictly concave function of `u`.
#[derive(Clone, Debug)]
pub struct LogWTarget {
    family: PriorFamily,
    alpha: f64,
    prior_variance: f64,
    log_sigma_sq: Vec<f64>,
    inv_sum: f64,
}

impl LogWTarget {
    pub fn new(
        sigma_sq: &VarianceVector,
        family: PriorFamily,
        alpha: f64,
        prior_variance: f64,
    ) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("hyper prior variance", prior_variance)?;
        if sigma_sq.is_empty() {
            return Err(Error::InvalidDataset(
                "no variances to condition log w on".into(),
            ));
        }
        Ok(Self {
            family,
            alpha,
            prior_variance,
            log_sigma_sq: sigma_sq.as_slice().iter().map(|s| s.ln()).collect(),
            inv_sum: sigma_sq.as_slice().iter().map(|s| 1.0 / s).sum(),
        })
    }

    /// A point near the bulk of the conditional, used to seed the hull.
    fn center(&self) -> f64 {
        let p = self.log_sigma_sq.len() as f64;
        match self.family {
            PriorFamily::T => (p / self.inv_sum).ln(),
            _ => self.log_sigma_sq.iter().sum::<f64>() / p,
        }
    }
}

impl LogConcave for LogWTarget {
    fn log_density_and_derivative(&self, u: f64) -> (f64, f64) {
        let p = self.log_sigma_sq.len() as f64;
        let a = self.alpha;
        let (mut h, mut d) = (
            -u * u / (2.0 * self.prior_variance),
            -u / self.prior_variance,
        );
        match self.family {
            PriorFamily::T => {
                let e = u.exp();
                h += p * a / 2.0 * u - a * e / 2.0 * self.inv_sum;
                d += p * a / 2.0 - a * e / 2.0 * self.inv_sum;
            }
            PriorFamily::Ghs | PriorFamily::Neg => {
                let (own, power, offset) = if self.family == PriorFamily::Ghs {
                    (-0.5, (a + 1.0) / 2.0, a.ln())
                } else {
                    (-1.0, a / 2.0 + 1.0, (a / 2.0).ln())
                };
                h += own * p * u;
                d += own * p;
                for &ls in &self.log_sigma_sq {
                    let z = ls - u - offset;
                    h -= power * softplus(z);
                    d += power * logistic(z);
                }
            }
        }
        (h, d)
    }
}

/// Draws `log w` given the variances, with `sigma^2_j | w` following `family` and
/// `log w ~ N(0, hyper_prior_variance)`.
pub fn sample_log_w<R: Rng + ?Sized>(
    sigma_sq: &VarianceVector,
    family: PriorFamily,
    alpha: f64,
    hyper_prior_variance: f64,
    rng: &mut R,
) -> Result<f64> {
    let target = LogWTarget::new(sigma_sq, family, alpha, hyper_prior_variance)?;
    let c = target.center();
    let spread = hyper_prior_variance.sqrt().min(1.0);
    let xs = expand_bracket(&target, &[c - spread, c, c + spread])?;
    ArsSampler::new(&target, &xs)?.draw(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn softplus_is_stable() {
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(softplus(800.0), 800.0);
        assert!(softplus(-800.0) >= 0.0 && softplus(-800.0) < 1e-300);
        assert!((logistic(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ig_mean_matches_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| sample_sigma_sq_ig(3.0, 1.0, 1, 1.0, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 2.0).abs() < 0.04, "mean {mean}");
    }

    #[test]
    fn ig_draws_are_positive_at_tiny_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let s = sample_sigma_sq_ig(1.0, (-10f64).exp(), 1, 0.0, &mut rng).unwrap();
            assert!(s > 0.0 && s.is_finite());
        }
    }

    #[test]
    fn xi_targets_are_log_concave_on_grid() {
        for &(alpha, log_w, k, v) in &[
            (1.0, -10.0, 1, 0.5),
            (0.5, -20.0, 2, 10.0),
            (4.0, -10.0, 2, 0.0),
        ] {
            let g = GhsXiTarget { alpha, log_w, k, v };
            let n = NegXiTarget { alpha, log_w, k, v };
            let mut last = (f64::INFINITY, f64::INFINITY);
            for i in 0..4000 {
                let xi = -60.0 + 0.02 * i as f64;
                let (dg, dn) = (
                    g.log_density_and_derivative(xi).1,
                    n.log_density_and_derivative(xi).1,
                );
                assert!(dg <= last.0 + 1e-12 && dn <= last.1 + 1e-12, "xi {xi}");
                last = (dg, dn);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let g = GhsXiTarget {
            alpha: 1.0,
            log_w: -3.0,
            k: 2,
            v: 0.7,
        };
        let n = NegXiTarget {
            alpha: 2.5,
            log_w: -1.0,
            k: 1,
            v: 1.3,
        };
        let s = VarianceVector::new(vec![0.1, 2.0, 0.03]).unwrap();
        let targets: Vec<Box<dyn LogConcave>> = vec![
            Box::new(g),
            Box::new(n),
            Box::new(LogWTarget::new(&s, PriorFamily::T, 1.5, 100.0).unwrap()),
            Box::new(LogWTarget::new(&s, PriorFamily::Ghs, 1.5, 100.0).unwrap()),
            Box::new(LogWTarget::new(&s, PriorFamily::Neg, 1.5, 100.0).unwrap()),
        ];
        for t in &targets {
            for &x in &[-4.0, -1.0, 0.3, 2.0] {
                let hstep = 1e-6;
                let fd = (t.log_density_and_derivative(x + hstep).0
                    - t.log_density_and_derivative(x - hstep).0)
                    / (2.0 * hstep);
                let d = t.log_density_and_derivative(x).1;
                assert!(
                    (fd - d).abs() < 1e-6 * d.abs().max(1.0),
                    "x {x}: {fd} vs {d}"
                );
            }
        }
    }

    #[test]
    fn improper_cases_are_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            sample_sigma_sq_ghs(1.0, 1.0, 1, 0.0, &mut rng),
            Err(Error::ImproperConditional {
                family: "ghs",
                k: 1
            })
        ));
        assert!(matches!(
            sample_sigma_sq_neg(1.0, 1.0, 2, 0.0, &mut rng),
            Err(Error::ImproperConditional {
                family: "neg",
                k: 2
            })
        ));
        assert!(sample_sigma_sq_neg(1.0, 1.0, 1, 0.0, &mut rng).is_ok());
        assert!(improper_at_zero(PriorFamily::Ghs, 1));
        assert!(!improper_at_zero(PriorFamily::Neg, 1));
        assert!(!improper_at_zero(PriorFamily::T, 5));
    }

    #[test]
    fn neg_draws_increase_with_v() {
        let mut r1 = ChaCha8Rng::seed_from_u64(4);
        let mut r2 = ChaCha8Rng::seed_from_u64(5);
        let w = (-10f64).exp();
        let mut lo: Vec<f64> = (0..10_000)
            .map(|_| sample_sigma_sq_neg(1.0, w, 2, 0.2, &mut r1).unwrap())
            .collect();
        let mut hi: Vec<f64> = (0..10_000)
            .map(|_| sample_sigma_sq_neg(1.0, w, 2, 2.0, &mut r2).unwrap())
            .collect();
        lo.sort_by(f64::total_cmp);
        hi.sort_by(f64::total_cmp);
        for q in [1000, 2500, 5000, 7500, 9000] {
            assert!(hi[q] > lo[q]);
        }
    }

    #[test]
    fn log_w_concentrates_as_prior_variance_shrinks() {
        let s = VarianceVector::filled(10, 1.0).unwrap();
        let mut sds = Vec::new();
        for v in [100.0, 1.0, 0.01] {
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            let draws: Vec<f64> = (0..4000)
                .map(|_| sample_log_w(&s, PriorFamily::T, 4.0, v, &mut rng).unwrap())
                .collect();
            let m = draws.iter().sum::<f64>() / draws.len() as f64;
            sds.push(
                (draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / draws.len() as f64).sqrt(),
            );
        }
        assert!(sds[0] > sds[1] && sds[1] > sds[2], "{sds:?}");
        assert!(sds[2] < 0.11);
    }
}
