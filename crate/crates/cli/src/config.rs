//! Experiment configuration files (JSON).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sgmcmc::diagnostics::GridSpec;
use sgmcmc::mlp::{Prior, PriorSwitch};
use sgmcmc::samplers::ChainSpec;
use sgmcmc::{SamplerSpec, Schedule};

use crate::error::{bad_config, CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelConfig {
    Gaussian {
        #[serde(default = "default_covariance")]
        covariance: [[f64; 2]; 2],
    },
    Mixture5 {},
    Ravine {
        #[serde(default = "default_ravine_n")]
        n: usize,
        batch: usize,
        #[serde(default = "default_theta_true")]
        theta_true: [f64; 2],
        #[serde(default = "one")]
        noise_sd: f64,
        #[serde(default)]
        data_seed: u64,
        /// Load `x,y` rows from this CSV instead of simulating.
        #[serde(default)]
        data: Option<PathBuf>,
    },
    Mlp {
        layers: Vec<usize>,
        batch: usize,
        prior: Prior,
        #[serde(default)]
        prior_switch: Option<PriorSwitch>,
        train: PathBuf,
        test: PathBuf,
    },
}

impl ModelConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelConfig::Gaussian { .. } => "gaussian",
            ModelConfig::Mixture5 {} => "mixture5",
            ModelConfig::Ravine { .. } => "ravine",
            ModelConfig::Mlp { .. } => "mlp",
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ModelConfig::Gaussian { covariance } => {
                sgmcmc::models::CorrelatedGaussian::new(*covariance)?;
            }
            ModelConfig::Mixture5 {} => {}
            ModelConfig::Ravine { n, batch, noise_sd, .. } => {
                if *batch == 0 || batch > n {
                    return bad_config(format!("ravine minibatch {batch} must lie in 1..={n}"));
                }
                if !(*noise_sd >= 0.0) {
                    return bad_config("ravine noise_sd must be non-negative");
                }
            }
            ModelConfig::Mlp {
                layers,
                batch,
                prior,
                prior_switch,
                ..
            } => {
                sgmcmc::mlp::Mlp::new(layers)?;
                if *batch == 0 {
                    return bad_config("mlp minibatch must be positive");
                }
                prior.validate()?;
                if let Some(s) = prior_switch {
                    s.prior.validate()?;
                }
            }
        }
        Ok(())
    }
}

/// Starting point of each chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitConfig {
    /// Zeros for the toy targets, He-uniform for networks.
    #[default]
    Auto,
    Zeros,
    /// Independent `N(0, sd²)` coordinates, drawn from the seed's init stream.
    Normal { sd: f64 },
    Point { theta: Vec<f64> },
    HeUniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Sample counts at which the running covariance error is reported.
    #[serde(default = "default_checkpoints")]
    pub cov_checkpoints: Vec<usize>,
    /// Grid for sample-based and exact energy contours (2-D models).
    #[serde(default)]
    pub contour: Option<GridSpec>,
    #[serde(default)]
    pub bandwidth: Option<[f64; 2]>,
    #[serde(default = "one")]
    pub mode_radius: f64,
    /// Test accuracy of the current iterate every this many epochs.
    #[serde(default)]
    pub accuracy_every_epochs: Option<u64>,
    /// Write every k-th retained network sample to a checkpoint file.
    #[serde(default)]
    pub checkpoint_every: Option<u64>,
    /// Full-data energy at each retained sample. Defaults to on, except for
    /// the ravine model where each evaluation touches every data point.
    #[serde(default)]
    pub record_energy: Option<bool>,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            cov_checkpoints: default_checkpoints(),
            contour: None,
            bandwidth: None,
            mode_radius: 1.0,
            accuracy_every_epochs: None,
            checkpoint_every: None,
            record_energy: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub model: ModelConfig,
    pub sampler: SamplerSpec,
    #[serde(default = "one")]
    pub temperature: f64,
    pub schedule: Schedule,
    /// Exactly one of `iterations` and `epochs` must be set.
    #[serde(default)]
    pub iterations: Option<u64>,
    #[serde(default)]
    pub epochs: Option<u64>,
    pub burn_in: u64,
    #[serde(default = "one_u64")]
    pub thinning: u64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub init: InitConfig,
    #[serde(default)]
    pub time_budget_secs: Option<f64>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
}

fn one() -> f64 {
    1.0
}
fn one_u64() -> u64 {
    1
}
fn default_covariance() -> [[f64; 2]; 2] {
    [[1.0, 0.9], [0.9, 1.0]]
}
fn default_ravine_n() -> usize {
    10_000
}
fn default_theta_true() -> [f64; 2] {
    [20.0, 10.0]
}
fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3, 4, 5]
}
fn default_output() -> PathBuf {
    PathBuf::from("runs")
}
fn default_checkpoints() -> Vec<usize> {
    vec![1_000, 10_000, 100_000]
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every field; called before any data is read or chain is run.
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return bad_config("name must not be empty");
        }
        self.model.validate()?;
        if self.sampler.is_optimizer() && !matches!(self.model, ModelConfig::Mlp { .. } | ModelConfig::Ravine { .. }) {
            return bad_config("optimizers need a data-based model (ravine or mlp)");
        }
        match (self.iterations, self.epochs) {
            (Some(_), Some(_)) | (None, None) => return bad_config("set exactly one of `iterations` and `epochs`"),
            (Some(0), _) | (_, Some(0)) => return bad_config("run length must be positive"),
            _ => {}
        }
        if self.seeds.is_empty() {
            return bad_config("seeds must not be empty");
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return bad_config("seeds must be distinct");
        }
        if let Some(t) = self.time_budget_secs {
            if !(t > 0.0 && t.is_finite()) {
                return bad_config("time_budget_secs must be positive");
            }
        }
        if let InitConfig::Normal { sd } = self.init {
            if !(sd >= 0.0 && sd.is_finite()) {
                return bad_config("init sd must be non-negative");
            }
        }
        if let InitConfig::HeUniform = self.init {
            if !matches!(self.model, ModelConfig::Mlp { .. }) {
                return bad_config("he-uniform init applies to mlp models only");
            }
        }
        if let Some(g) = &self.diagnostics.contour {
            g.validate()?;
        }
        if let Some([hx, hy]) = self.diagnostics.bandwidth {
            if !(hx > 0.0 && hy > 0.0) {
                return bad_config("bandwidth must be positive");
            }
        }
        if self.diagnostics.cov_checkpoints.windows(2).any(|w| w[1] <= w[0]) {
            return bad_config("cov_checkpoints must be strictly increasing");
        }
        if matches!(self.diagnostics.accuracy_every_epochs, Some(0)) || matches!(self.diagnostics.checkpoint_every, Some(0)) {
            return bad_config("diagnostic intervals must be positive");
        }
        self.sampler.validate()?;
        self.schedule.validate()?;
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return bad_config("temperature must be non-negative");
        }
        if self.thinning == 0 {
            return bad_config("thinning must be at least 1");
        }
        if let Some(iters) = self.iterations {
            if self.burn_in >= iters {
                return bad_config(format!("burn_in ({}) must be below iterations ({iters})", self.burn_in));
            }
        }
        Ok(())
    }

    /// Total iterations given the model's iterations per epoch.
    pub fn total_iterations(&self, per_epoch: u64) -> u64 {
        match (self.iterations, self.epochs) {
            (Some(i), _) => i,
            (None, Some(e)) => e * per_epoch.max(1),
            (None, None) => 0,
        }
    }

    pub fn chain_spec(&self, per_epoch: u64) -> Result<ChainSpec> {
        let spec = ChainSpec {
            sampler: self.sampler,
            temperature: self.temperature,
            schedule: self.schedule,
            iterations: self.total_iterations(per_epoch),
            burn_in: self.burn_in,
            thinning: self.thinning,
            record_energy: self
                .diagnostics
                .record_energy
                .unwrap_or(!matches!(self.model, ModelConfig::Ravine { .. })),
            time_budget: self.time_budget_secs.map(std::time::Duration::from_secs_f64),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Resolves relative dataset paths against `root`.
    pub fn resolve_paths(&mut self, root: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = root.join(&*p);
            }
        };
        match &mut self.model {
            ModelConfig::Mlp { train, test, .. } => {
                fix(train);
                fix(test);
            }
            ModelConfig::Ravine { data: Some(p), .. } => fix(p),
            _ => {}
        }
    }
}
