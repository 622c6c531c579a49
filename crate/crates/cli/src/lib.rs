//! File formats, reports and subcommands for the `compcap` tool.

pub mod commands;
pub mod error;
pub mod model_file;
pub mod problem_file;
pub mod report;
pub mod trace_file;

pub use error::CliError;
