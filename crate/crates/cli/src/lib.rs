//! Command-line front end for qrsel: CSV loading, layered configuration,
//! dispatch to the selectors and the evaluation harness, and versioned
//! JSON / CSV reports.

pub mod config;
pub mod data;
pub mod error;
pub mod report;
pub mod run;

pub use config::{Command, Format, RunConfig};
pub use data::{load_csv, LoadedData};
pub use error::{CliError, Result};
pub use report::{emit_report, Report, SCHEMA_VERSION};
pub use run::run;
