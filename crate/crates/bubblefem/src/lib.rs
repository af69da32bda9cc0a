//! Command-line front end for `bubblefem-core`: configuration files, output
//! formats, the subcommands and the acceptance runner behind `selftest`.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::run;
pub use config::{CommandKind, RunConfig};
pub use error::CliError;
