use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::predict::{predict, predicted_class};
use crate::data::standardize;
use crate::engine::{run_chain, McmcSettings};
use crate::error::{Error, Result};
use crate::model::{Dataset, PriorSpec};

/// Held-out prediction for one case.
#[derive(Clone, Debug, PartialEq)]
pub struct FoldOutcome {
    pub probs: Vec<f64>,
    pub label: usize,
    pub log_prob: f64,
    pub correct: bool,
    pub rejection_rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoldResult {
    /// 0-based index of the held-out case.
    pub fold: usize,
    pub seed: u64,
    pub outcome: std::result::Result<FoldOutcome, String>,
}

/// Leave-one-out results aggregated over the folds that completed.
#[derive(Clone, Debug, PartialEq)]
pub struct CvReport {
    pub folds: Vec<FoldResult>,
    pub amlp: f64,
    pub error_rate: f64,
    pub n_succeeded: usize,
    pub n_failed: usize,
    /// Mean sampling-phase rejection rate over completed folds.
    pub rejection_rate: f64,
}

fn run_fold(
    dataset: &Dataset,
    fold: usize,
    prior: &PriorSpec,
    settings: &McmcSettings,
) -> Result<FoldOutcome> {
    let n = dataset.n_cases();
    let train_idx: Vec<usize> = (0..n).filter(|&i| i != fold).collect();
    let train_raw = dataset.subset(&train_idx);
    let held_raw = dataset.subset(&[fold]);
    let (train, rest) = standardize(&train_raw, &[&held_raw])?;
    let held = &rest[0];
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let store = run_chain(&train, prior, settings, &mut rng).map_err(|f| f.error)?;
    let probs = predict(&store, held.features().view())?;
    let row = probs.row(0).to_vec();
    let label = held.labels()[0];
    Ok(FoldOutcome {
        log_prob: row[label - 1].ln(),
        correct: predicted_class(&row) == label,
        probs: row,
        label,
        rejection_rate: store.rejection_rate(),
    })
}

/// Leave-one-out cross-validation on raw data. Each fold re-standardizes on its
/// training cases and runs its own chain with seed `settings.seed + fold`; folds run
/// in parallel on the current rayon pool.
pub fn loocv(dataset: &Dataset, prior: &PriorSpec, settings: &McmcSettings) -> Result<CvReport> {
    let n = dataset.n_cases();
    if n < 2 {
        return Err(Error::InvalidDataset(format!(
            "LOOCV needs at least 2 cases, got {n}"
        )));
    }
    let folds: Vec<FoldResult> = (0..n)
        .into_par_iter()
        .map(|fold| {
            let seed = settings.seed.wrapping_add(fold as u64);
            FoldResult {
                fold,
                seed,
                outcome: run_fold(dataset, fold, prior, &settings.with_seed(seed))
                    .map_err(|e| e.to_string()),
            }
        })
        .collect();
    let ok: Vec<&FoldOutcome> = folds
        .iter()
        .filter_map(|f| f.outcome.as_ref().ok())
        .collect();
    let m = ok.len() as f64;
    let (amlp, error_rate, rejection_rate) = if ok.is_empty() {
        (f64::NAN, f64::NAN, f64::NAN)
    } else {
        (
            -ok.iter().map(|o| o.log_prob).sum::<f64>() / m,
            ok.iter().filter(|o| !o.correct).count() as f64 / m,
            ok.iter().map(|o| o.rejection_rate).sum::<f64>() / m,
        )
    };
    Ok(CvReport {
        n_succeeded: ok.len(),
        n_failed: folds.len() - ok.len(),
        folds,
        amlp,
        error_rate,
        rejection_rate,
    })
}
