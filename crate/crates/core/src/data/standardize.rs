use ndarray::Axis;

use crate::error::{Error, Result};
use crate::model::{Dataset, Standardization};

/// Column means and population standard deviations of `train`. A constant column
/// gets sd 1 so it maps to all zeros.
pub fn fit_standardization(train: &Dataset) -> Standardization {
    let x = train.features();
    let n = x.nrows() as f64;
    let means: Vec<f64> = if x.nrows() == 0 {
        vec![0.0; x.ncols()]
    } else {
        x.mean_axis(Axis(0)).expect("non-empty").to_vec()
    };
    let sds = x
        .columns()
        .into_iter()
        .zip(&means)
        .map(|(col, &m)| {
            let var = if n > 0.0 {
                col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n
            } else {
                0.0
            };
            let sd = var.sqrt();
            if sd > 0.0 && sd.is_finite() {
                sd
            } else {
                1.0
            }
        })
        .collect();
    Standardization { means, sds }
}

/// Applies `map` to every column of `dataset` and records it on the result.
pub fn apply_standardization(dataset: &Dataset, map: &Standardization) -> Result<Dataset> {
    let p = dataset.n_features();
    if map.means.len() != p || map.sds.len() != p {
        return Err(Error::dims(
            "standardization",
            p,
            map.means.len().max(map.sds.len()),
        ));
    }
    let mut x = dataset.features().clone();
    for (j, mut col) in x.columns_mut().into_iter().enumerate() {
        let (m, s) = (map.means[j], map.sds[j]);
        col.mapv_inplace(|v| (v - m) / s);
    }
    let out = if dataset.n_cases() == 0 {
        Dataset::without_cases(p, dataset.class_count())?
    } else {
        Dataset::new(x, dataset.labels().to_vec(), dataset.class_count())?
    };
    Ok(out.with_standardization(map.clone()))
}

/// Standardizes `train` with its own statistics and maps `others` with the same map.
pub fn standardize(train: &Dataset, others: &[&Dataset]) -> Result<(Dataset, Vec<Dataset>)> {
    let map = fit_standardization(train);
    let train_std = apply_standardization(train, &map)?;
    let rest = others
        .iter()
        .map(|d| apply_standardization(d, &map))
        .collect::<Result<Vec<_>>>()?;
    Ok((train_std, rest))
}
