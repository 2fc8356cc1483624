use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid value for {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("prior variance must be positive and finite, got {0}")]
    NonPositiveVariance(f64),

    #[error("non-finite gradient at coordinate {index}")]
    NonFiniteGradient { index: usize },

    #[error("target is not log-concave near x = {x} (violation {violation:e})")]
    NotLogConcave { x: f64, violation: f64 },

    #[error("initial abscissae do not bracket the mode of the target")]
    BracketFailure,

    #[error("adaptive rejection sampling did not accept a draw after {0} proposals")]
    ArsExhausted(usize),

    #[error("conditional density of log sigma^2 is improper ({family} prior, K = {k}, V = 0)")]
    ImproperConditional { family: &'static str, k: usize },

    #[error("class {class} has no cases in the training labels")]
    MissingClass { class: usize },

    #[error("CSV {path}: row {row}, column {column}: {message}")]
    Csv {
        path: String,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("sample store line {line}: {message}")]
    StoreFormat { line: usize, message: String },

    #[error("sample store is empty")]
    EmptyStore,

    #[error("chain failed at iteration {iteration}: {source}")]
    Chain {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dims(context: &'static str, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context,
            expected,
            found,
        }
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}
