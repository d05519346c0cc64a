//! Experiment harness: environments, dataset ingestion, seeded trial runs and outputs.

pub mod config;
pub mod dataset;
pub mod env;
pub mod output;
pub mod runner;
pub mod summary;
pub mod validate;

pub use config::{Algorithm, ExperimentConfig, Instance};
pub use runner::{run_experiment, ExperimentOutput, TrialRecord};
pub use summary::{summarize, Summary};
