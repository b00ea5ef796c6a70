//! Experiment runner for the nmrqc simulator.

pub mod config;
pub mod output;
pub mod runner;

pub use config::{CliError, CliResult, Experiment, ExperimentConfig};
pub use runner::{run, Report};
