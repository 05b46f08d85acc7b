//! Command-line front end: configuration, dispatch and report emission.

pub mod config;
pub mod plot;
pub mod report;
pub mod run;

use thiserror::Error;

pub use config::{CommandKind, Overrides, RunConfig};
pub use report::{Payload, ReportEnvelope};
pub use run::{run, Outcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VERDICT: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] toric_chords::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            // Output failures leave no valid report behind; treat them like
            // a failed computation.
            CliError::Io(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
