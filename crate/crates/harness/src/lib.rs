//! Experiment harness for the `ecmc-core` samplers.
//!
//! Each experiment reads an [`ExperimentConfig`], runs seeded replicates on
//! a rayon pool, and writes CSV tables (see `SCHEMA.md`) and SVG figures to
//! the output directory.

pub mod config;
pub mod experiments;
pub mod output;
pub mod seeds;
pub mod svg;

pub use config::{ExperimentConfig, ExperimentKind};
pub use experiments::{run_experiment, Report};
