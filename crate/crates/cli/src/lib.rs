//! Experiment harness for the `sgmcmc` samplers: JSON configs, shipped
//! presets, dataset ingestion, multi-seed runs and comparison tables.

pub mod compare;
pub mod config;
pub mod error;
pub mod landsat;
pub mod presets;
pub mod run;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
pub use run::{run_experiment, run_seed, BuiltModel, RunSummary, SeedSummary};

/// Environment variable naming the directory that relative dataset paths
/// are resolved against.
pub const DATA_DIR_ENV: &str = "SGMCMC_DATA_DIR";
