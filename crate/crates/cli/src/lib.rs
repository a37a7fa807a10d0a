//! Front-end for the `signet` binary: network files, reports, trajectory
//! CSV and the subcommand implementations.

pub mod commands;
pub mod error;
pub mod network;
pub mod report;
pub mod trajectory_csv;

pub use error::{CliError, CliResult, ExitStatus};
