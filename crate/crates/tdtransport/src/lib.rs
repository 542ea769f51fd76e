//! Command-line front end for `tdtransport-core`: JSON configuration, run
//! orchestration and CSV output.

pub mod config;
pub mod error;
pub mod run;
pub mod selftest;

pub use config::{load_config, Mode, RunConfig, Unit};
pub use error::CliError;
pub use run::run;
