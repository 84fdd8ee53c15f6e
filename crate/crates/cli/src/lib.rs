//! Command-line front end: TOML run configurations, result persistence and
//! the `adiabaton` subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod persist;
pub mod plots;

pub use commands::run_command;
pub use config::{parse_config, RunConfig};
pub use error::{CliError, Result};
pub use persist::{load_result, parse_manifest, parse_metrics, parse_snapshot, persist_result};
