//! Command-line driver for `aspa-core`: reading program files, the
//! subcommands of the `aspa` binary, JSON output and the benchmark runner.

pub mod bench;
pub mod cli;
pub mod output;
pub mod source;

pub use source::AppError;
