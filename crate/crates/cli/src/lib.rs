//! Library surface of the pipeline binary; exposed so integration and
//! acceptance tests can drive the subcommands in-process.

#![forbid(unsafe_code)]

pub mod config;
pub mod error;
pub mod pipeline;

pub use config::{Cli, Command, PipelineConfig, RunArgs};
pub use error::CliError;
