//! Config-driven orchestration for the metalab laboratory: parse and
//! validate experiment configs, run the matching pipeline, and write
//! deterministic CSV reports.

pub mod config;
pub mod experiment;

pub use config::{validate_config, ConfigError, ExperimentConfig, ExperimentKind};
pub use experiment::{config_hash, run_experiment, RunOptions, RunReport};
