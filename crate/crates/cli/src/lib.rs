//! Command-line front end: configuration loading, the `plan`, `follow`,
//! `mission` and `calibrate-noise` commands, and exit-code mapping.

pub mod commands;
pub mod config;
pub mod error;

pub use config::RunConfig;
pub use error::CliError;
