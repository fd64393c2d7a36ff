//! Batch runner for the laboratory's experiments.

pub mod config;
pub mod run;

pub use config::{catalog_list, load_config, CatalogEntry, Experiment, ExperimentConfig, ValidationError};
pub use run::{run, RunError, RunSettings};
