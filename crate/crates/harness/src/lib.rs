//! Experiment harness: seeded instances and environments, baselines, regret
//! accounting and reproducible CSV/JSON outputs.

pub mod baselines;
pub mod config;
pub mod generate;
pub mod output;
pub mod regret;
pub mod run;

pub use config::{Algorithm, ExperimentConfig};
pub use run::{run_experiment, ExperimentResult, Summary};
