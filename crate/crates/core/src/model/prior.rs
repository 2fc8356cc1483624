//! Prior densities for the contrast rows and the per-feature variances.
//!
//! Conditional on `sigma^2_j`, the contrast row `delta_j` of length `K = C - 1` is
//! `N_K(0, (I_K + J_K) sigma^2_j)`. Its log density depends on the row only through
//! `V(delta_j)`, the sum of squared deviations of `(0, delta_j1, ..., delta_jK)` from
//! their mean.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use statrs::function::gamma::ln_gamma;

use crate::error::{check_positive, Error, Result};

/// Prior on the per-feature variances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PriorFamily {
    /// `sigma^2 ~ IG(alpha/2, alpha w / 2)`; coefficients are Student t.
    T,
    /// Half-t on `sigma` with `alpha` degrees of freedom and scale `sqrt(w)`.
    Ghs,
    /// Exponential variance with inverse-gamma mean, marginalized.
    Neg,
}

impl PriorFamily {
    pub fn name(self) -> &'static str {
        match self {
            PriorFamily::T => "t",
            PriorFamily::Ghs => "ghs",
            PriorFamily::Neg => "neg",
        }
    }
}

impl fmt::Display for PriorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PriorFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "t" => Ok(PriorFamily::T),
            "ghs" => Ok(PriorFamily::Ghs),
            "neg" => Ok(PriorFamily::Neg),
            other => Err(format!(
                "unknown prior family '{other}' (expected t, ghs or neg)"
            )),
        }
    }
}

/// Whether the log square-scale is fixed or sampled under a `N(0, v)` hyperprior.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WMode {
    Fixed,
    Hyper { prior_variance: f64 },
}

pub const DEFAULT_SIGMA0_SQ: f64 = 2000.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PriorSpec {
    pub family: PriorFamily,
    /// Degrees of freedom.
    pub alpha: f64,
    /// Log square-scale; with `WMode::Hyper` this is the chain's starting value.
    pub log_w: f64,
    pub w_mode: WMode,
    /// Prior variance of the intercept row.
    pub sigma0_sq: f64,
}

impl PriorSpec {
    pub fn new(family: PriorFamily, alpha: f64, log_w: f64) -> Self {
        Self {
            family,
            alpha,
            log_w,
            w_mode: WMode::Fixed,
            sigma0_sq: DEFAULT_SIGMA0_SQ,
        }
    }

    pub fn with_hyper_w(mut self, prior_variance: f64) -> Self {
        self.w_mode = WMode::Hyper { prior_variance };
        self
    }

    pub fn with_sigma0_sq(mut self, sigma0_sq: f64) -> Self {
        self.sigma0_sq = sigma0_sq;
        self
    }

    pub fn with_log_w(mut self, log_w: f64) -> Self {
        self.log_w = log_w;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("alpha", self.alpha)?;
        check_positive("sigma0_sq", self.sigma0_sq)?;
        if !self.log_w.is_finite() {
            return Err(Error::InvalidParameter {
                name: "log_w",
                value: self.log_w,
            });
        }
        if let WMode::Hyper { prior_variance } = self.w_mode {
            check_positive("hyper prior variance", prior_variance)?;
        }
        Ok(())
    }

    pub fn w(&self) -> f64 {
        self.log_w.exp()
    }

    /// NEG shape constant `kappa = alpha / 2`.
    pub fn kappa(&self) -> f64 {
        self.alpha / 2.0
    }

    /// NEG scale constant `lambda = alpha w / 2`.
    pub fn lambda(&self) -> f64 {
        self.alpha * self.w() / 2.0
    }
}

/// Sum of squared deviations of `(0, delta_1, ..., delta_K)` from their mean.
///
/// Algebraically `sum delta_k^2 - (sum delta_k)^2 / C`; evaluated in deviation form
/// so the result is never negative.
pub fn v_value(delta_row: &[f64], class_count: usize) -> f64 {
    debug_assert_eq!(delta_row.len() + 1, class_count);
    let c = class_count as f64;
    let mean = delta_row.iter().sum::<f64>() / c;
    delta_row
        .iter()
        .fold(mean * mean, |acc, &d| acc + (d - mean) * (d - mean))
}

/// Standard deviation of the class coefficients, `sqrt(V / C)`.
pub fn sdb(delta_row: &[f64], class_count: usize) -> f64 {
    (v_value(delta_row, class_count) / class_count as f64).sqrt()
}

/// `log N_K(delta_row | 0, (I + J) sigma^2)`, normalizing constants included.
pub fn log_prior_delta_row(delta_row: &[f64], sigma_sq: f64, class_count: usize) -> Result<f64> {
    if !(sigma_sq > 0.0 && sigma_sq.is_finite()) {
        return Err(Error::NonPositiveVariance(sigma_sq));
    }
    let k = delta_row.len() as f64;
    let c = class_count as f64;
    Ok(-0.5 * k * (2.0 * PI * sigma_sq).ln()
        - v_value(delta_row, class_count) / (2.0 * sigma_sq)
        - 0.5 * c.ln())
}

/// Gradient of `-log_prior_delta_row` with respect to the row.
pub fn grad_neg_log_prior_row(delta_row: &[f64], sigma_sq: f64, class_count: usize) -> Vec<f64> {
    let mean = delta_row.iter().sum::<f64>() / class_count as f64;
    delta_row.iter().map(|&d| (d - mean) / sigma_sq).collect()
}

/// Log prior density of one variance `sigma^2` under the chosen family.
pub fn log_sigma_sq_prior(sigma_sq: f64, spec: &PriorSpec) -> Result<f64> {
    if !(sigma_sq > 0.0 && sigma_sq.is_finite()) {
        return Err(Error::NonPositiveVariance(sigma_sq));
    }
    spec.validate()?;
    let alpha = spec.alpha;
    let w = spec.w();
    let log_s = sigma_sq.ln();
    let value = match spec.family {
        PriorFamily::T => {
            let shape = alpha / 2.0;
            let rate = alpha * w / 2.0;
            shape * rate.ln() - ln_gamma(shape) - (shape + 1.0) * log_s - rate / sigma_sq
        }
        PriorFamily::Ghs => {
            ln_gamma((alpha + 1.0) / 2.0)
                - ln_gamma(alpha / 2.0)
                - 0.5 * (alpha * PI).ln()
                - 0.5 * spec.log_w
                - (alpha + 1.0) / 2.0 * (sigma_sq / (alpha * w)).ln_1p()
                - 0.5 * log_s
        }
        PriorFamily::Neg => {
            let lambda = spec.lambda();
            (spec.kappa() / lambda).ln() - (alpha / 2.0 + 1.0) * (sigma_sq / lambda).ln_1p()
        }
    };
    Ok(value)
}
