use ndarray::{s, Array2, ArrayView2};

use crate::engine::SampleStore;
use crate::error::{Error, Result};
use crate::model::{probabilities_from_eta, Dataset};

/// Posterior predictive probabilities with the usual scores at the true labels.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionReport {
    /// `n x C`; each row sums to 1.
    pub probs: Array2<f64>,
    pub amlp: f64,
    pub error_rate: f64,
    /// `log P(y_i = true label)` for each case.
    pub per_case_log_prob: Vec<f64>,
}

impl PredictionReport {
    pub fn from_probs(probs: Array2<f64>, labels: &[usize]) -> Result<Self> {
        check_labels(&probs, labels)?;
        let per_case_log_prob = labels
            .iter()
            .enumerate()
            .map(|(i, &y)| probs[[i, y - 1]].ln())
            .collect();
        Ok(Self {
            amlp: amlp(&probs, labels)?,
            error_rate: error_rate(&probs, labels)?,
            probs,
            per_case_log_prob,
        })
    }
}

fn check_labels(probs: &Array2<f64>, labels: &[usize]) -> Result<()> {
    if probs.nrows() != labels.len() {
        return Err(Error::dims("labels", probs.nrows(), labels.len()));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y == 0 || y > probs.ncols()) {
        return Err(Error::InvalidDataset(format!(
            "label {bad} outside 1..={}",
            probs.ncols()
        )));
    }
    Ok(())
}

/// Mean over stored draws of the class probabilities of each row of `features`.
pub fn predict(store: &SampleStore, features: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    if store.is_empty() {
        return Err(Error::EmptyStore);
    }
    let p = store.n_features();
    if features.ncols() != p {
        return Err(Error::dims("test features", p, features.ncols()));
    }
    let n = features.nrows();
    let c = store.class_count();
    let mut probs = Array2::<f64>::zeros((n, c));
    for draw in store.draws() {
        let mut eta = features.dot(&draw.delta.slice(s![1.., ..]));
        eta += &draw.delta.row(0);
        for (i, row) in eta.rows().into_iter().enumerate() {
            let pr = probabilities_from_eta(&row.to_vec());
            for (slot, v) in probs.row_mut(i).iter_mut().zip(pr) {
                *slot += v;
            }
        }
    }
    probs /= store.len() as f64;
    Ok(probs)
}

/// Scores a labelled dataset against the store.
pub fn evaluate(store: &SampleStore, test: &Dataset) -> Result<PredictionReport> {
    if test.class_count() > store.class_count() {
        return Err(Error::dims(
            "classes",
            store.class_count(),
            test.class_count(),
        ));
    }
    let probs = predict(store, test.features().view())?;
    PredictionReport::from_probs(probs, test.labels())
}

/// Average minus log probability of the true labels; infinite if any is zero.
pub fn amlp(probs: &Array2<f64>, labels: &[usize]) -> Result<f64> {
    check_labels(probs, labels)?;
    if labels.is_empty() {
        return Ok(f64::NAN);
    }
    let total: f64 = labels
        .iter()
        .enumerate()
        .map(|(i, &y)| -probs[[i, y - 1]].ln())
        .sum();
    Ok(total / labels.len() as f64)
}

/// Class with the largest probability; ties go to the smallest class.
pub fn predicted_class(row: &[f64]) -> usize {
    let mut best = 0;
    for (c, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = c;
        }
    }
    best + 1
}

/// Fraction of cases whose most probable class is not the true label.
pub fn error_rate(probs: &Array2<f64>, labels: &[usize]) -> Result<f64> {
    check_labels(probs, labels)?;
    if labels.is_empty() {
        return Ok(f64::NAN);
    }
    let wrong = probs
        .rows()
        .into_iter()
        .zip(labels)
        .filter(|(row, &y)| predicted_class(&row.to_vec()) != y)
        .count();
    Ok(wrong as f64 / labels.len() as f64)
}
