//! Scenario files, artifact writers and the `run`/`sweep`/`check`/`validate`
//! commands behind the `velfree` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::LoadedConfig;
pub use error::{CliError, CliResult, EXIT_CONFIG, EXIT_DIVERGED, EXIT_OK};
