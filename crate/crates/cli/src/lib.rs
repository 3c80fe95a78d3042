//! Experiment runner for the regularity laboratory: configuration parsing,
//! the run/trace pipelines, and report emission (CSV ledgers, claim
//! summaries, SVG charts).

pub mod config;
pub mod experiment;
pub mod svg;

pub use config::{parse_config, serialize_config, ConfigError, ConfigValue};
pub use experiment::{list_fixtures, run_experiment, run_trace, CliError, ExperimentConfig};
