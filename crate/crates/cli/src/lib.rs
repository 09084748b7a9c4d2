//! Pipeline and configuration behind the `mulberry` command.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod pipeline;

pub use config::{ModelSelection, RunConfig};
pub use error::{CliError, CliResult};
