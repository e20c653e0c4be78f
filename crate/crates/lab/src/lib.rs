//! Configuration, experiment runners and output formats for the shadow-limit
//! laboratory. The numerics live in `shadowlab-core`.

pub mod config;
pub mod output;
pub mod runner;

pub use config::{ConfigError, ExperimentConfig};
pub use runner::{run_stability, run_sweep, run_truncation, JacobianMode, RunError, Sweep};
