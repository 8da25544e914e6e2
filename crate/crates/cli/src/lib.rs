//! Configuration, orchestration and file output for `ptkrein` runs.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, spectrum, verify, ExitCode, VerifyRow};
pub use config::{load_config, parse_config, ConfigError, RunConfig};
