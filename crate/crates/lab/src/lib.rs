//! Experiment harness for the symmetric binary perceptron lab.
//!
//! A run is described by an [`ExperimentConfig`], executed replica-parallel
//! by [`run_experiment`], and persisted by [`write_outputs`]. Records are a
//! pure function of the config and the base seed: worker count and timing
//! never change them (timings are opt-in and off by default).

pub mod config;
pub mod error;
pub mod experiments;
pub mod record;
pub mod runner;

pub use config::{ExperimentConfig, ExperimentKind, OutputFormat};
pub use error::{LabError, Result};
pub use record::{load_jsonl, Record, SCHEMA_VERSION};
pub use runner::{run_experiment, write_outputs, RunReport};
