//! Library side of the `cirl` command: configuration, run directories, the
//! subcommands and SVG plotting. The binary only parses arguments.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod plot;

pub use config::{parse_seeds, resolve_scenario, ExperimentConfig, OUT_DIR_ENV};
pub use error::{exit_code, CliError};
pub use manifest::{RunManifest, Summary};
