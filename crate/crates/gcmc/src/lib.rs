//! Command-line front end for `gcmc-core`: argument parsing, file formats,
//! JSON and CSV reports and plot data.
//!
//! [`run`] is the whole program; the binary only forwards its arguments and
//! exit status.

pub mod cli;
pub mod error;
pub mod formats;
pub mod plot;
pub mod range;
pub mod report;

pub use cli::{parallel_scan, run};
pub use error::{CliError, EXIT_INVALID, EXIT_OK, EXIT_VIOLATION};
