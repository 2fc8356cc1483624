use ndarray::{Array2, ArrayView1, Axis};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Affine map recorded when a dataset was standardized: `x' = (x - mean) / sd`.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

/// Feature matrix (rows are cases) with class labels in `1..=C`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    class_count: usize,
    standardization: Option<Standardization>,
}

impl Dataset {
    pub fn new(features: Array2<f64>, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if features.nrows() == 0 {
            return Err(Error::InvalidDataset("dataset has no cases".into()));
        }
        Self::validated(features, labels, class_count)
    }

    /// A dataset with `p` features and no cases. Its likelihood is identically 1,
    /// so a chain run on it samples the prior.
    pub fn without_cases(p: usize, class_count: usize) -> Result<Self> {
        Self::validated(Array2::zeros((0, p)), Vec::new(), class_count)
    }

    fn validated(features: Array2<f64>, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if class_count < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 classes, got {class_count}"
            )));
        }
        if features.ncols() == 0 {
            return Err(Error::InvalidDataset("dataset has no features".into()));
        }
        if labels.len() != features.nrows() {
            return Err(Error::dims("labels", features.nrows(), labels.len()));
        }
        if let Some((i, &y)) = labels
            .iter()
            .enumerate()
            .find(|(_, &y)| y == 0 || y > class_count)
        {
            return Err(Error::InvalidDataset(format!(
                "label {y} of case {} outside 1..={class_count}",
                i + 1
            )));
        }
        if let Some(((i, j), v)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite value {v} at case {}, feature {}",
                i + 1,
                j + 1
            )));
        }
        Ok(Self {
            features,
            labels,
            class_count,
            standardization: None,
        })
    }

    pub(crate) fn with_standardization(mut self, map: Standardization) -> Self {
        self.standardization = Some(map);
        self
    }

    pub fn n_cases(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Number of contrasts against the baseline class, `C - 1`.
    pub fn n_contrasts(&self) -> usize {
        self.class_count - 1
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    pub fn is_standardized(&self) -> bool {
        self.standardization.is_some()
    }

    pub fn standardization(&self) -> Option<&Standardization> {
        self.standardization.as_ref()
    }

    /// Number of cases carrying each label; index 0 is class 1.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for &y in &self.labels {
            counts[y - 1] += 1;
        }
        counts
    }

    /// Cases selected by `indices`, in the given order. Standardization is dropped.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_count: self.class_count,
            standardization: None,
        }
    }

    /// SHA-256 over the shape, labels and feature bit patterns.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.n_cases() as u64).to_le_bytes());
        hasher.update((self.n_features() as u64).to_le_bytes());
        hasher.update((self.class_count as u64).to_le_bytes());
        for &y in &self.labels {
            hasher.update((y as u64).to_le_bytes());
        }
        for v in self.features.iter() {
            hasher.update(v.to_bits().to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_out_of_range_labels() {
        let x = array![[1.0], [2.0]];
        assert!(Dataset::new(x.clone(), vec![1, 3], 2).is_err());
        assert!(Dataset::new(x.clone(), vec![0, 1], 2).is_err());
        assert!(Dataset::new(x, vec![1, 2], 2).is_ok());
    }

    #[test]
    fn rejects_non_finite_features() {
        let x = array![[1.0, f64::NAN]];
        assert!(matches!(
            Dataset::new(x, vec![1], 2),
            Err(Error::InvalidDataset(_))
        ));
    }

    #[test]
    fn empty_variant_has_no_cases() {
        let d = Dataset::without_cases(3, 2).unwrap();
        assert_eq!(d.n_cases(), 0);
        assert_eq!(d.n_features(), 3);
        assert!(Dataset::new(Array2::zeros((0, 3)), vec![], 2).is_err());
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = Dataset::new(array![[1.0], [2.0]], vec![1, 2], 2).unwrap();
        let b = Dataset::new(array![[1.0], [2.0000001]], vec![1, 2], 2).unwrap();
        assert_eq!(a.fingerprint(), a.clone().fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
    }
}
