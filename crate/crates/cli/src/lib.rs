//! Command-line runner regenerating the figure data of the `mixedness`
//! library as CSV.

pub mod config;
pub mod csv;
pub mod error;
pub mod experiments;
pub mod plot;

pub use config::{Experiment, ExperimentConfig, Params};
pub use csv::Table;
pub use error::{CliError, CliResult};
