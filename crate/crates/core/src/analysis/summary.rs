use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::engine::SampleStore;
use crate::error::{Error, Result};
use crate::model::{sdb, CoefficientMatrix};

/// How draws are combined into a coefficient estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SummaryMode {
    #[default]
    Mean,
    /// Element-wise median; better suited to single-mode subsets of draws.
    Median,
}

/// Coefficient estimates and the feature ranking they imply.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorSummary {
    pub delta_hat: CoefficientMatrix,
    /// SDB of each feature's estimated row; index 0 is feature 1.
    pub sdb: Vec<f64>,
    /// `sdb / max(sdb)`, all zeros when every SDB is zero.
    pub rel_sdb: Vec<f64>,
    /// Feature indices (1-based) from largest to smallest SDB; ties keep index order.
    pub order: Vec<usize>,
    /// `rank[j - 1]` is the 1-based position of feature `j` in `order`.
    pub rank: Vec<usize>,
}

impl PosteriorSummary {
    pub fn from_delta(delta_hat: CoefficientMatrix, class_count: usize) -> Self {
        let p = delta_hat.n_features();
        let sdb: Vec<f64> = (1..=p)
            .map(|j| sdb(&delta_hat.row(j).to_vec(), class_count))
            .collect();
        let max = sdb.iter().copied().fold(0.0, f64::max);
        let rel_sdb = if max > 0.0 {
            sdb.iter().map(|s| s / max).collect()
        } else {
            vec![0.0; p]
        };
        let mut order: Vec<usize> = (1..=p).collect();
        order.sort_by(|&a, &b| sdb[b - 1].total_cmp(&sdb[a - 1]).then(a.cmp(&b)));
        let mut rank = vec![0; p];
        for (pos, &j) in order.iter().enumerate() {
            rank[j - 1] = pos + 1;
        }
        Self {
            delta_hat,
            sdb,
            rel_sdb,
            order,
            rank,
        }
    }

    pub fn n_features(&self) -> usize {
        self.sdb.len()
    }

    /// Writes `feature_index,sdb,rel_sdb,rank,delta_1..delta_K`, one row per feature.
    pub fn write_csv_to<W: Write>(&self, out: W) -> std::io::Result<()> {
        let k = self.delta_hat.n_contrasts();
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec![
            "feature_index".to_string(),
            "sdb".into(),
            "rel_sdb".into(),
            "rank".into(),
        ];
        header.extend((1..=k).map(|c| format!("delta_{c}")));
        wtr.write_record(&header)?;
        for j in 1..=self.n_features() {
            let mut rec = vec![
                j.to_string(),
                format!("{:.16e}", self.sdb[j - 1]),
                format!("{:.16e}", self.rel_sdb[j - 1]),
                self.rank[j - 1].to_string(),
            ];
            rec.extend(self.delta_hat.row(j).iter().map(|v| format!("{v:.16e}")));
            wtr.write_record(&rec)?;
        }
        wtr.flush()
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv_to(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    }
}

/// Summarizes the stored draws with posterior means.
pub fn summarize(store: &SampleStore) -> Result<PosteriorSummary> {
    summarize_with(store, SummaryMode::Mean)
}

pub fn summarize_with(store: &SampleStore, mode: SummaryMode) -> Result<PosteriorSummary> {
    let draws = store.draws();
    if draws.is_empty() {
        return Err(Error::EmptyStore);
    }
    let shape = (store.n_features() + 1, store.class_count() - 1);
    let delta_hat = match mode {
        SummaryMode::Mean => {
            let mut acc = Array2::<f64>::zeros(shape);
            for d in draws {
                acc += &d.delta;
            }
            acc / draws.len() as f64
        }
        SummaryMode::Median => {
            let mut buf = vec![0.0; draws.len()];
            Array2::from_shape_fn(shape, |idx| {
                for (slot, d) in buf.iter_mut().zip(draws) {
                    *slot = d.delta[idx];
                }
                median(&mut buf)
            })
        }
    };
    Ok(PosteriorSummary::from_delta(
        CoefficientMatrix::from_array(delta_hat)?,
        store.class_count(),
    ))
}

/// Features whose SDB is at least `rel_threshold` times the largest SDB, in index order.
/// An all-zero SDB vector selects nothing.
pub fn select_features(summary: &PosteriorSummary, rel_threshold: f64) -> Result<Vec<usize>> {
    if !(rel_threshold > 0.0 && rel_threshold <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "relative threshold",
            value: rel_threshold,
        });
    }
    let max = summary.sdb.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Ok(Vec::new());
    }
    Ok(summary
        .sdb
        .iter()
        .enumerate()
        .filter(|(_, &s)| s >= rel_threshold * max)
        .map(|(j, _)| j + 1)
        .collect())
}
