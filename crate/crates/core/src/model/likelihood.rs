//! Multinomial logit likelihood in the contrast parameterization.
//!
//! For case `i` the linear predictors are `eta_ik = delta_0k + x_i . delta_{1:p,k}` for
//! `k = 1..K`, with the baseline class fixed at `eta_i0 = 0`.

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::model::{CoefficientMatrix, Dataset, VarianceVector};

/// `log(1 + sum_k exp(eta_k))`, stable for any finite `eta`.
pub(crate) fn log_normalizer(eta: &[f64]) -> f64 {
    let m = eta.iter().fold(0.0f64, |m, &e| m.max(e));
    let s = eta.iter().fold((-m).exp(), |s, &e| s + (e - m).exp());
    m + s.ln()
}

/// Writes `eta_k = delta_0k + x . delta_{1:p,k}` into `out`.
pub(crate) fn linear_predictors(
    x_row: ArrayView1<'_, f64>,
    delta: &CoefficientMatrix,
    out: &mut [f64],
) {
    let d = delta.as_array();
    for (k, slot) in out.iter_mut().enumerate() {
        let mut acc = d[[0, k]];
        for (j, &x) in x_row.iter().enumerate() {
            acc += x * d[[j + 1, k]];
        }
        *slot = acc;
    }
}

/// Class probabilities `P(y = c | x, delta)` for `c = 1..=C`.
pub fn class_probabilities(
    x_row: ArrayView1<'_, f64>,
    delta: &CoefficientMatrix,
) -> Result<Vec<f64>> {
    if x_row.len() != delta.n_features() {
        return Err(Error::dims(
            "feature vector",
            delta.n_features(),
            x_row.len(),
        ));
    }
    let k = delta.n_contrasts();
    let mut eta = vec![0.0; k];
    linear_predictors(x_row, delta, &mut eta);
    Ok(probabilities_from_eta(&eta))
}

pub(crate) fn probabilities_from_eta(eta: &[f64]) -> Vec<f64> {
    let lse = log_normalizer(eta);
    std::iter::once(-lse)
        .chain(eta.iter().map(|&e| e - lse))
        .map(f64::exp)
        .collect()
}

pub fn log_likelihood(dataset: &Dataset, delta: &CoefficientMatrix) -> Result<f64> {
    delta.check_against(dataset.n_features(), dataset.class_count())?;
    let mut eta = vec![0.0; delta.n_contrasts()];
    let mut total = 0.0;
    for (i, &y) in dataset.labels().iter().enumerate() {
        linear_predictors(dataset.row(i), delta, &mut eta);
        let lse = log_normalizer(&eta);
        let own = if y == 1 { 0.0 } else { eta[y - 2] };
        total += own - lse;
    }
    Ok(total)
}

/// Gradient of `-log L` for the coefficient rows in `active` (row 0 is the intercept).
///
/// Entry `(a, k)` is `sum_i x_{i,j} (P(y_i = k+1 | x_i) - I(y_i = k+1))` with
/// `j = active[a]` and `x_{i,0} = 1`.
pub fn grad_neg_log_likelihood(
    dataset: &Dataset,
    delta: &CoefficientMatrix,
    active: &[usize],
) -> Result<Array2<f64>> {
    delta.check_against(dataset.n_features(), dataset.class_count())?;
    let p = dataset.n_features();
    if let Some(&bad) = active.iter().find(|&&j| j > p) {
        return Err(Error::dims("active row index", p, bad));
    }
    let k_count = delta.n_contrasts();
    let mut grad = Array2::zeros((active.len(), k_count));
    let mut eta = vec![0.0; k_count];
    for (i, &y) in dataset.labels().iter().enumerate() {
        let x = dataset.row(i);
        linear_predictors(x, delta, &mut eta);
        let lse = log_normalizer(&eta);
        for k in 0..k_count {
            let resid = (eta[k] - lse).exp() - if y == k + 2 { 1.0 } else { 0.0 };
            for (a, &j) in active.iter().enumerate() {
                let xij = if j == 0 { 1.0 } else { x[j - 1] };
                grad[[a, k]] += xij * resid;
            }
        }
    }
    Ok(grad)
}

/// Diagonal curvature estimates of the potential used to set leapfrog stepsizes.
///
/// For coordinate `(j, k)`: `sum_i x_ij^2 / 4 + ((C-1)/C) / sigma^2_j`, where the
/// intercept row uses `sigma0_sq`. Returned in row-major order over `active x K`.
pub fn curvature_estimates(
    dataset: &Dataset,
    sigma_sq: &VarianceVector,
    sigma0_sq: f64,
    active: &[usize],
) -> Result<Vec<f64>> {
    let p = dataset.n_features();
    if sigma_sq.len() != p {
        return Err(Error::dims("variance vector", p, sigma_sq.len()));
    }
    let x = dataset.features();
    let k_count = dataset.n_contrasts();
    let c = dataset.class_count() as f64;
    let mut out = Vec::with_capacity(active.len() * k_count);
    for &j in active {
        if j > p {
            return Err(Error::dims("active row index", p, j));
        }
        let (sum_sq, var) = if j == 0 {
            (dataset.n_cases() as f64, sigma0_sq)
        } else {
            (
                x.column(j - 1).iter().map(|v| v * v).sum::<f64>(),
                sigma_sq.feature(j),
            )
        };
        let value = sum_sq / 4.0 + (c - 1.0) / c / var;
        out.extend(std::iter::repeat(value).take(k_count));
    }
    Ok(out)
}
