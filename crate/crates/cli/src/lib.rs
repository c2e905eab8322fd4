//! Command-line front end for `rdfilter`: configuration, subcommands and CSV
//! output. The binary is a thin wrapper over [`cli::build`] and
//! [`cli::execute`].

pub mod cli;
pub mod commands;
pub mod config;
pub mod output;

pub use config::{parse_config, ConfigError, ProblemKind, RunConfig, StepSize, KEYS};
pub use output::{emit_csv, read_csv, write_csv};
