//! Stochastic-gradient MCMC samplers with adaptive drift.
//!
//! The crate provides the SGLD family of transition kernels (plain, momentum
//! drift, adaptive drift, preconditioned, and Hamiltonian), a chain driver,
//! the benchmark energy models used to compare them, and posterior summaries.

pub mod diagnostics;
pub mod error;
pub mod mlp;
pub mod models;
pub mod noise;
pub mod param;
pub mod rng;
pub mod samplers;
pub mod schedule;

pub use error::{Error, Result};
pub use models::EnergyModel;
pub use param::ParamVector;
pub use rng::RngStream;
pub use samplers::{run_chain, run_chain_with, ChainSpec, Divergence, Kernel, SamplerSpec, Trace};
pub use schedule::Schedule;

/// Library version, recorded in run summaries.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
