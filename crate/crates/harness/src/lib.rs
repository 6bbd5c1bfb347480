//! Experiment harness for data-driven robust beamforming: configuration,
//! database generation, neighborhood builds, codebook design, parameter
//! sweeps emitting CSV/JSON plot data, and a self-verification suite.

pub mod config;
mod error;
pub mod experiment;
pub mod verify;

pub use config::{ExperimentConfig, SweepSpec};
pub use error::HarnessError;
