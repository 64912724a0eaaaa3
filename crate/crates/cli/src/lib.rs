//! Command-line front end: `gen-data`, `sweep`, `eval-repr` and `report`.
//!
//! Exit codes are 0 on success, 1 on a hard error and 2 when a sweep
//! finished with some failed jobs. Errors go to stderr as
//! `{"error": {"kind": …, "message": …}}`.

pub mod commands;
pub mod config;
pub mod error;
pub mod export;

pub use commands::{run, Cli, Command, Status};
pub use config::{DatasetSource, RunConfig};
pub use error::{CliError, CliResult};
pub use export::{CurveExport, Meta};
