//! Library side of the `ecc` command-line tool: curve-file I/O, grid
//! resampling and the subcommand implementations.

pub mod commands;
pub mod error;
pub mod io;
pub mod resample;

pub use error::{CliError, Result};
