//! Experiment drivers for `fluxindex`: TOML configs in, JSON records and CSV sweep
//! tables out.

pub mod config;
pub mod record;
pub mod run;
pub mod sweep;

pub use config::{ExperimentConfig, ExperimentKind, ProcessSpec, Tolerances};
pub use record::{ResultRecord, Status, SCHEMA};
pub use run::run_experiment;
pub use sweep::{sweep, write_csv, SweepPoint};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot parse input: {0}")]
    Parse(String),
    #[error("invalid config field `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
