//! Random-variate generators for scale-mixture-normal coefficient priors.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

use crate::error::{check_positive, Result};
use crate::model::PriorFamily;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScaleMixture {
    T,
    Ghs,
    Neg,
    Laplace,
}

impl From<PriorFamily> for ScaleMixture {
    fn from(f: PriorFamily) -> Self {
        match f {
            PriorFamily::T => ScaleMixture::T,
            PriorFamily::Ghs => ScaleMixture::Ghs,
            PriorFamily::Neg => ScaleMixture::Neg,
        }
    }
}

impl fmt::Display for ScaleMixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScaleMixture::T => "t",
            ScaleMixture::Ghs => "ghs",
            ScaleMixture::Neg => "neg",
            ScaleMixture::Laplace => "laplace",
        })
    }
}

impl FromStr for ScaleMixture {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("laplace") {
            return Ok(ScaleMixture::Laplace);
        }
        s.parse::<PriorFamily>()
            .map(ScaleMixture::from)
            .map_err(|_| format!("unknown prior '{s}' (expected t, ghs, neg or laplace)"))
    }
}

/// Draws `count` i.i.d. coefficients from a scale-mixture-normal prior with scale
/// `gamma = exp(log_gamma)`:
///
/// | family  | draw                                               |
/// |---------|----------------------------------------------------|
/// | t       | `N(0,1) * sqrt(IG(a/2, a/2)) * gamma`              |
/// | GHS     | `N(0,1) * abs(N(0,1)) * sqrt(IG(a/2, a/2)) * gamma`|
/// | NEG     | `N(0,1) * sqrt(Exp(1)) * sqrt(IG(a/2, a/2)) * gamma`|
/// | Laplace | `N(0,1) * sqrt(Exp(1)) * gamma`                    |
///
/// `alpha` is ignored for Laplace.
pub fn sample_prior_beta<R: Rng + ?Sized>(
    family: ScaleMixture,
    alpha: f64,
    log_gamma: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let gamma = log_gamma.exp();
    check_positive("gamma", gamma)?;
    let mixing = match family {
        ScaleMixture::Laplace => None,
        _ => {
            check_positive("alpha", alpha)?;
            // 1 / Gamma(shape a/2, rate a/2) ~ IG(a/2, a/2)
            Some(Gamma::new(alpha / 2.0, 2.0 / alpha).map_err(|_| {
                crate::Error::InvalidParameter {
                    name: "alpha",
                    value: alpha,
                }
            })?)
        }
    };
    let draws = (0..count)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            let mut scale_sq = 1.0;
            match family {
                ScaleMixture::T => {}
                ScaleMixture::Ghs => {
                    let h: f64 = StandardNormal.sample(rng);
                    scale_sq *= h * h;
                }
                ScaleMixture::Neg | ScaleMixture::Laplace => {
                    let e: f64 = Exp1.sample(rng);
                    scale_sq *= e;
                }
            }
            if let Some(g) = &mixing {
                scale_sq /= g.sample(rng);
            }
            z * scale_sq.sqrt() * gamma
        })
        .collect();
    Ok(draws)
}
