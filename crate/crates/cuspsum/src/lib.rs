//! Command-line runner for `cuspsum-core`: the `TAUC` coefficient cache,
//! single experiments, sweeps over `M` ladders and self-verification suites.

pub mod cache;
pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod runner;
pub mod sweep;
pub mod verify;

pub use error::{exit, CliError};
