//! Experiment drivers: configuration, sweeps, tabular output and the CLI.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod output;

pub use config::{Experiment, RunConfig, Solver};
pub use output::{ErrorRecord, ExperimentOutput, RowMeta, Table};
