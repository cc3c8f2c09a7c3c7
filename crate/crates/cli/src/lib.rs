//! Reproducible experiment runner over `mohardy-core`.

pub mod config;
pub mod experiments;
pub mod families;
pub mod output;

pub use config::{ConfigError, ExperimentConfig};
pub use experiments::{list_experiments, run_experiment, run_with_threads, Outcome, RunError, EXPERIMENTS};
