//! Experiment runner for `stein-core`: TOML configs, parallel replication,
//! reports, draw spools and the `stein` command-line tool.

pub mod config;
pub mod gof;
pub mod io;
pub mod report;
pub mod runner;
pub mod spool;
pub mod sweep;

pub use config::{ConfigError, Experiment, ExperimentConfig};
pub use runner::{run, run_experiment, RunError, RunOptions, RunReport};
