use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::predict::{evaluate, PredictionReport};
use crate::analysis::summary::{summarize, PosteriorSummary};
use crate::engine::{run_chain, McmcSettings};
use crate::error::{Error, Result};
use crate::model::{Dataset, PriorSpec};

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn log_w_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// 100 values of `log w` from -24 to -8.
pub fn default_log_w_grid() -> Vec<f64> {
    log_w_grid(-24.0, -8.0, 100)
}

#[derive(Clone, Debug)]
pub struct PathFit {
    pub summary: PosteriorSummary,
    pub rejection_rate: f64,
    pub test: Option<PredictionReport>,
}

#[derive(Clone, Debug)]
pub struct PathPoint {
    pub log_w: f64,
    pub seed: u64,
    /// The fit, or the message of the error that stopped this grid point.
    pub outcome: std::result::Result<PathFit, String>,
}

fn fit_point(
    train: &Dataset,
    test: Option<&Dataset>,
    prior: &PriorSpec,
    settings: &McmcSettings,
) -> Result<PathFit> {
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let store = run_chain(train, prior, settings, &mut rng).map_err(|f| f.error)?;
    let summary = summarize(&store)?;
    let test = test.map(|t| evaluate(&store, t)).transpose()?;
    Ok(PathFit {
        summary,
        rejection_rate: store.rejection_rate(),
        test,
    })
}

/// Runs one independent chain per grid value of `log w`, in parallel on the current
/// rayon pool. Point `i` uses seed `settings.seed + i`; results are ordered by `log w`.
pub fn solution_path(
    train: &Dataset,
    test: Option<&Dataset>,
    prior: &PriorSpec,
    settings: &McmcSettings,
    grid: &[f64],
) -> Result<Vec<PathPoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "grid size",
            value: 0.0,
        });
    }
    let mut points: Vec<PathPoint> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &log_w)| {
            let seed = settings.seed.wrapping_add(i as u64);
            let point_prior = prior.with_log_w(log_w);
            let point_settings = settings.with_seed(seed);
            PathPoint {
                log_w,
                seed,
                outcome: fit_point(train, test, &point_prior, &point_settings)
                    .map_err(|e| e.to_string()),
            }
        })
        .collect();
    points.sort_by(|a, b| a.log_w.total_cmp(&b.log_w));
    Ok(points)
}

/// Writes one row per grid point: `log_w,status,rejection_rate,amlp,error_rate`, then
/// the SDB of every feature and the estimated contrasts (row-major, intercepts first).
/// Failed points have `status` set to the error and empty numeric fields.
pub fn write_path_csv_to<W: Write>(points: &[PathPoint], out: W) -> std::io::Result<()> {
    let shape = points
        .iter()
        .find_map(|p| p.outcome.as_ref().ok())
        .map(|f| (f.summary.n_features(), f.summary.delta_hat.n_contrasts()));
    let (p, k) = shape.unwrap_or((0, 0));
    let mut wtr = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["log_w", "status", "rejection_rate", "amlp", "error_rate"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=p).map(|j| format!("sdb_{j}")));
    for j in 0..=p {
        header.extend((1..=k).map(|c| format!("delta_{j}_{c}")));
    }
    wtr.write_record(&header)?;
    let width = header.len();
    for point in points {
        let mut rec = vec![format!("{:.16e}", point.log_w)];
        match &point.outcome {
            Ok(fit) => {
                rec.push("ok".into());
                rec.push(format!("{:.16e}", fit.rejection_rate));
                match &fit.test {
                    Some(t) => {
                        rec.push(format!("{:.16e}", t.amlp));
                        rec.push(format!("{:.16e}", t.error_rate));
                    }
                    None => rec.extend(["".to_string(), "".to_string()]),
                }
                rec.extend(fit.summary.sdb.iter().map(|v| format!("{v:.16e}")));
                rec.extend(
                    fit.summary
                        .delta_hat
                        .as_array()
                        .iter()
                        .map(|v| format!("{v:.16e}")),
                );
            }
            Err(msg) => {
                rec.push(format!("error: {msg}"));
                rec.resize(width, String::new());
            }
        }
        wtr.write_record(&rec)?;
    }
    wtr.flush()
}

pub fn save_path_csv(points: &[PathPoint], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_path_csv_to(points, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}
