//! Chain driver: repeatedly draws a stochastic gradient and steps a kernel,
//! keeping post-burn-in samples at the thinning interval.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{regularized_grad, SamplerSpec};
use crate::error::{config, Error, Result};
use crate::models::EnergyModel;
use crate::param::ParamVector;
use crate::rng::RngStream;
use crate::schedule::Schedule;

/// Everything the driver needs besides the model, the start point and the RNG.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub sampler: SamplerSpec,
    pub temperature: f64,
    pub schedule: Schedule,
    pub iterations: u64,
    pub burn_in: u64,
    pub thinning: u64,
    /// Evaluate the full energy at each retained sample.
    pub record_energy: bool,
    /// Optional wall-clock stopping rule, checked every 256 iterations.
    pub time_budget: Option<Duration>,
}

impl ChainSpec {
    pub fn validate(&self) -> Result<()> {
        self.sampler.validate()?;
        self.schedule.validate()?;
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return config(format!("temperature must be non-negative, got {}", self.temperature));
        }
        if self.thinning == 0 {
            return config("thinning must be at least 1");
        }
        if self.burn_in >= self.iterations {
            return config(format!(
                "burn-in ({}) must be smaller than the iteration count ({})",
                self.burn_in, self.iterations
            ));
        }
        Ok(())
    }

    pub fn expected_samples(&self) -> u64 {
        (self.iterations - self.burn_in) / self.thinning
    }
}

/// Where and why a chain stopped early.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub iteration: u64,
    pub what: String,
    pub theta: Vec<f64>,
}

/// Retained samples of one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub samples: Vec<ParamVector>,
    /// Iteration number (1-based) at which each sample was taken.
    pub iterations: Vec<u64>,
    /// Full energy per retained sample; empty when not recorded.
    pub energies: Vec<f64>,
    pub burn_in: u64,
    pub thinning: u64,
    pub seed: u64,
    pub stream_id: u64,
    /// Iterations actually completed.
    pub iterations_run: u64,
    pub divergence: Option<Divergence>,
    /// Largest `‖m ⊘ √(V + λ)‖∞` seen (ASGLD only).
    pub max_bias_ratio: Option<f64>,
    /// Final kernel iterate, retained or not.
    pub last: ParamVector,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn diverged(&self) -> bool {
        self.divergence.is_some()
    }

    pub fn dim(&self) -> usize {
        self.last.len()
    }

    /// CSV with columns `iteration,energy,theta_0..theta_{d-1}`. The energy
    /// column is empty when energies were not recorded. Floats use the
    /// shortest round-trip representation, so equal traces give equal bytes.
    pub fn to_csv(&self, include_theta: bool) -> String {
        let mut s = String::from("iteration,energy");
        if include_theta {
            for i in 0..self.dim() {
                s.push_str(&format!(",theta_{i}"));
            }
        }
        s.push('\n');
        for (k, it) in self.iterations.iter().enumerate() {
            s.push_str(&it.to_string());
            s.push(',');
            if let Some(e) = self.energies.get(k) {
                s.push_str(&format!("{e:?}"));
            }
            if include_theta {
                for v in self.samples[k].iter() {
                    s.push_str(&format!(",{v:?}"));
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Runs one chain. Configuration problems are returned as errors; numerical
/// divergence ends the chain early and is reported on the trace.
pub fn run_chain<M: EnergyModel + ?Sized>(
    model: &M,
    spec: &ChainSpec,
    theta0: ParamVector,
    rng: &mut RngStream,
) -> Result<Trace> {
    run_chain_with(model, spec, theta0, rng, |_, _| {})
}

/// As [`run_chain`], calling `observe(iteration, θ)` after every iteration.
pub fn run_chain_with<M, F>(
    model: &M,
    spec: &ChainSpec,
    theta0: ParamVector,
    rng: &mut RngStream,
    mut observe: F,
) -> Result<Trace>
where
    M: EnergyModel + ?Sized,
    F: FnMut(u64, &[f64]),
{
    spec.validate()?;
    if theta0.len() != model.dim() {
        return Err(Error::Dimension {
            expected: model.dim(),
            got: theta0.len(),
        });
    }
    if !theta0.is_finite() {
        return config("initial point must be finite");
    }

    let mut kernel = spec.sampler.init(theta0, spec.temperature)?;
    let per_epoch = model.iterations_per_epoch().max(1);
    let capacity = spec.expected_samples().min(1 << 22) as usize;
    let mut trace = Trace {
        samples: Vec::with_capacity(capacity),
        iterations: Vec::with_capacity(capacity),
        energies: Vec::new(),
        burn_in: spec.burn_in,
        thinning: spec.thinning,
        seed: rng.seed(),
        stream_id: rng.stream_id(),
        iterations_run: 0,
        divergence: None,
        max_bias_ratio: kernel.bias_ratio(),
        last: kernel.theta().clone(),
    };
    let started = Instant::now();

    for t in 1..=spec.iterations {
        let epoch = (t - 1) / per_epoch;
        let lr = spec.schedule.rate(epoch);
        let theta = kernel.theta();
        let g = match kernel.weight_decay() {
            Some(wd) => regularized_grad(&model.stoch_loss_grad(theta, rng), theta, wd),
            None => model.stoch_grad_at(theta, epoch, rng),
        };
        if let Err(e) = kernel.step(&g, lr, rng) {
            match e {
                Error::NonFinite { what, theta, .. } => {
                    trace.divergence = Some(Divergence {
                        iteration: t,
                        what: what.to_string(),
                        theta,
                    });
                    break;
                }
                other => return Err(other),
            }
        }
        trace.iterations_run = t;
        if let Some(r) = kernel.bias_ratio() {
            let m = trace.max_bias_ratio.get_or_insert(0.0);
            *m = m.max(r);
        }
        let theta = kernel.theta();
        observe(t, theta);
        if t > spec.burn_in && (t - spec.burn_in) % spec.thinning == 0 {
            if spec.record_energy {
                trace.energies.push(model.energy_at(theta, epoch));
            }
            trace.samples.push(theta.clone());
            trace.iterations.push(t);
        }
        if let Some(budget) = spec.time_budget {
            if t % 256 == 0 && started.elapsed() >= budget {
                break;
            }
        }
    }
    trace.last = kernel.theta().clone();
    Ok(trace)
}
