//! Batch front-end for `macalloc`: problem files, CSV traces and reports.

pub mod commands;
pub mod error;
pub mod format;
pub mod problem;

pub use error::CliError;
pub use problem::Problem;
