//! Simulated datasets with a few informative features hidden among noise.
//!
//! Both generators return raw (unstandardized) features.

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::model::Dataset;

/// Two classes, `x | y = c ~ N(mu_c, A A' + I)` where `A` is the identity except
/// `a_21 = 2`, and `mu_2 - mu_1 = 2 e_1`. Only features 1 and 2 carry signal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SyntheticSpecA {
    pub n_train: usize,
    pub n_test: usize,
    pub n_features: usize,
}

impl Default for SyntheticSpecA {
    fn default() -> Self {
        Self {
            n_train: 100,
            n_test: 1000,
            n_features: 200,
        }
    }
}

/// Three equally likely classes. Feature 1 is shifted by 2 in class 2, feature 2
/// shares its factor, features 3..=10 share a second factor and are shifted by 2 in
/// class 3; the remaining `noise_features` are independent N(0, 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SyntheticSpecB {
    pub n_train: usize,
    pub n_test: usize,
    pub noise_features: usize,
}

impl SyntheticSpecB {
    pub const STRUCTURED_FEATURES: usize = 10;

    pub fn n_features(&self) -> usize {
        Self::STRUCTURED_FEATURES + self.noise_features
    }
}

impl Default for SyntheticSpecB {
    fn default() -> Self {
        Self {
            n_train: 100,
            n_test: 2000,
            noise_features: 1990,
        }
    }
}

/// Contrast coefficients `(delta_0, delta_1, delta_2)` of the two-class model on
/// standardized features.
///
/// On the raw scale the Bayes rule has slopes `Sigma^-1 (mu_2 - mu_1) = (1.5, -0.5)`
/// for the first two features; their marginal variances are 3 and 6.
pub fn true_delta_binary() -> [f64; 3] {
    [0.0, 1.5 * 3f64.sqrt(), -0.5 * 6f64.sqrt()]
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn split(
    x: Array2<f64>,
    labels: Vec<usize>,
    n_train: usize,
    classes: usize,
) -> Result<(Dataset, Dataset)> {
    let n = labels.len();
    let p = x.ncols();
    let train_idx: Vec<usize> = (0..n_train).collect();
    let test_idx: Vec<usize> = (n_train..n).collect();
    let make = |idx: &[usize]| -> Result<Dataset> {
        if idx.is_empty() {
            return Dataset::without_cases(p, classes);
        }
        let sub = x.select(ndarray::Axis(0), idx);
        Dataset::new(sub, idx.iter().map(|&i| labels[i]).collect(), classes)
    };
    Ok((make(&train_idx)?, make(&test_idx)?))
}

/// Draws train and test sets from the two-class model; also returns the true contrasts.
pub fn simulate_binary_p200<R: Rng + ?Sized>(
    spec: &SyntheticSpecA,
    rng: &mut R,
) -> Result<(Dataset, Dataset, [f64; 3])> {
    if spec.n_features < 2 {
        return Err(Error::InvalidParameter {
            name: "n_features",
            value: spec.n_features as f64,
        });
    }
    let n = spec.n_train + spec.n_test;
    let p = spec.n_features;
    let mut x = Array2::zeros((n, p));
    let mut labels = Vec::with_capacity(n);
    let mut z = vec![0.0; p];
    for i in 0..n {
        let y = if rng.random::<bool>() { 2 } else { 1 };
        labels.push(y);
        for zj in z.iter_mut() {
            *zj = normal(rng);
        }
        for j in 0..p {
            let factor = if j == 1 { 2.0 * z[0] + z[1] } else { z[j] };
            x[[i, j]] = factor + normal(rng);
        }
        if y == 2 {
            x[[i, 0]] += 2.0;
        }
    }
    let (train, test) = split(x, labels, spec.n_train, 2)?;
    Ok((train, test, true_delta_binary()))
}

/// Draws train and test sets from the three-class model.
pub fn simulate_multiclass_p2000<R: Rng + ?Sized>(
    spec: &SyntheticSpecB,
    rng: &mut R,
) -> Result<(Dataset, Dataset)> {
    let n = spec.n_train + spec.n_test;
    let p = spec.n_features();
    let mut x = Array2::zeros((n, p));
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y = rng.random_range(1..=3usize);
        labels.push(y);
        let (z1, z2, z3) = (normal(rng), normal(rng), normal(rng));
        let shift1 = if y == 2 { 2.0 } else { 0.0 };
        let shift3 = if y == 3 { 2.0 } else { 0.0 };
        x[[i, 0]] = shift1 + z1 + 0.5 * normal(rng);
        x[[i, 1]] = 2.0 * z1 + z2 + 0.5 * normal(rng);
        for j in 2..SyntheticSpecB::STRUCTURED_FEATURES {
            x[[i, j]] = shift3 + z3 + 0.5 * normal(rng);
        }
        for j in SyntheticSpecB::STRUCTURED_FEATURES..p {
            x[[i, j]] = normal(rng);
        }
    }
    split(x, labels, spec.n_train, 3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn default_shapes() {
        let (tr, te, d) = simulate_binary_p200(
            &SyntheticSpecA::default(),
            &mut ChaCha8Rng::seed_from_u64(1),
        )
        .unwrap();
        assert_eq!(
            (tr.n_cases(), te.n_cases(), tr.n_features()),
            (100, 1000, 200)
        );
        assert_eq!(d.map(|v| (v * 100.0).round() / 100.0), [0.0, 2.6, -1.22]);

        let spec = SyntheticSpecB {
            noise_features: 5,
            ..Default::default()
        };
        let (tr, te) = simulate_multiclass_p2000(&spec, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(
            (
                tr.n_cases(),
                te.n_cases(),
                tr.n_features(),
                tr.class_count()
            ),
            (100, 2000, 15, 3)
        );
        assert_eq!(SyntheticSpecB::default().n_features(), 2000);
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = SyntheticSpecA {
            n_train: 10,
            n_test: 5,
            n_features: 4,
        };
        let a = simulate_binary_p200(&spec, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = simulate_binary_p200(&spec, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }
}
