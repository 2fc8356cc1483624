//! Posterior summaries, feature selection, prediction, solution paths and LOOCV.

mod cv;
mod metrics;
mod path;
mod predict;
mod summary;

pub use cv::{loocv, CvReport, FoldOutcome, FoldResult};
pub use metrics::Metrics;
pub use path::{
    default_log_w_grid, log_w_grid, save_path_csv, solution_path, write_path_csv_to, PathFit,
    PathPoint,
};
pub use predict::{amlp, error_rate, evaluate, predict, predicted_class, PredictionReport};
pub use summary::{select_features, summarize, summarize_with, PosteriorSummary, SummaryMode};
