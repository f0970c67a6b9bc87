//! Experiment orchestration for `renormforge-core`: configuration, the CLI
//! commands, run reports, and the acceptance suite.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod constructions;
pub mod report;

pub use commands::{run, Command};
pub use config::{ConfigError, ExperimentConfig};
pub use report::{emit, Check, RunReport, Table};
