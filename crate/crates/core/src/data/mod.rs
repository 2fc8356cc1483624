//! Dataset files, standardization and simulated data.

mod csv;
mod standardize;
mod synthetic;

pub use self::csv::{load_csv, read_csv, write_csv, write_csv_to};
pub use standardize::{apply_standardization, fit_standardization, standardize};
pub use synthetic::{
    simulate_binary_p200, simulate_multiclass_p2000, true_delta_binary, SyntheticSpecA,
    SyntheticSpecB,
};
