//! Experiment driver for the disordered zero-range process.

pub mod analysis;
pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod phase;
pub mod selftest;
pub mod svg;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
