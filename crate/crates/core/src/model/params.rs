use ndarray::{Array2, ArrayView1, ArrayViewMut1};

use crate::error::{Error, Result};

/// Class contrasts `delta[j][k] = beta[j][k+1] - beta[j][0]`, shape `(p + 1) x K`.
///
/// Row 0 holds the intercepts; rows `1..=p` the feature coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientMatrix(Array2<f64>);

impl CoefficientMatrix {
    pub fn zeros(n_features: usize, n_contrasts: usize) -> Self {
        Self(Array2::zeros((n_features + 1, n_contrasts)))
    }

    pub fn from_array(delta: Array2<f64>) -> Result<Self> {
        if delta.nrows() < 2 || delta.ncols() < 1 {
            return Err(Error::InvalidDataset(format!(
                "coefficient matrix needs at least 2 rows and 1 column, got {}x{}",
                delta.nrows(),
                delta.ncols()
            )));
        }
        if delta.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(
                "coefficient matrix has non-finite entries".into(),
            ));
        }
        Ok(Self(delta))
    }

    pub fn n_features(&self) -> usize {
        self.0.nrows() - 1
    }

    pub fn n_contrasts(&self) -> usize {
        self.0.ncols()
    }

    pub fn row(&self, j: usize) -> ArrayView1<'_, f64> {
        self.0.row(j)
    }

    pub fn row_mut(&mut self, j: usize) -> ArrayViewMut1<'_, f64> {
        self.0.row_mut(j)
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn as_array_mut(&mut self) -> &mut Array2<f64> {
        &mut self.0
    }

    pub fn into_array(self) -> Array2<f64> {
        self.0
    }

    pub(crate) fn check_against(&self, n_features: usize, class_count: usize) -> Result<()> {
        if self.n_features() != n_features {
            return Err(Error::dims(
                "coefficient rows",
                n_features + 1,
                self.0.nrows(),
            ));
        }
        if self.n_contrasts() + 1 != class_count {
            return Err(Error::dims(
                "coefficient columns",
                class_count - 1,
                self.0.ncols(),
            ));
        }
        Ok(())
    }
}

/// Per-feature prior variances `sigma^2_1..sigma^2_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct VarianceVector(Vec<f64>);

impl VarianceVector {
    pub fn new(sigma_sq: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = sigma_sq.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::NonPositiveVariance(bad));
        }
        Ok(Self(sigma_sq))
    }

    pub fn filled(p: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; p])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Variance of feature `j` (1-based, matching coefficient rows).
    pub fn feature(&self, j: usize) -> f64 {
        self.0[j - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn set_feature(&mut self, j: usize, value: f64) {
        debug_assert!(value > 0.0 && value.is_finite());
        self.0[j - 1] = value;
    }
}
