//! Command line layer of corrugate: run configuration, output directories,
//! the build, formal, compare, verify and export subcommands.

pub mod build;
pub mod compare;
pub mod config;
pub mod error;
pub mod export;
pub mod formal;
pub mod outdir;
pub mod tables;
pub mod verify;

pub use build::{cmd_build, BuildSummary};
pub use compare::{cmd_compare, CompareSummary};
pub use config::RunConfig;
pub use error::{CliError, Result};
pub use export::cmd_export;
pub use formal::{cmd_formal, FormalSummary};
pub use verify::{cmd_verify, Criterion, VerifyReport};
