//! Runs every seed of an experiment and writes its artifacts.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sgmcmc::diagnostics::{
    cov_error, density_contour_from_samples, energy_grid, posterior_mean, CovErrorCurve,
};
use sgmcmc::mlp::{accuracy, accuracy_averaged, sparsity_ratio, Dataset, Mlp, MlpModel, Prior};
use sgmcmc::models::{CorrelatedGaussian, MixtureGaussian5, RavineDataset, RavineRegression, MIXTURE_MEANS};
use sgmcmc::{run_chain_with, Divergence, EnergyModel, ParamVector, RngStream, Trace};

use crate::config::{ExperimentConfig, InitConfig, ModelConfig};
use crate::error::{CliError, Result};
use crate::landsat;

/// Stream ids within one seed: the chain itself and the initial point.
pub const CHAIN_STREAM: u64 = 0;
pub const INIT_STREAM: u64 = 1;

/// Traces of models up to this dimension carry θ columns.
const THETA_COLUMNS_MAX_DIM: usize = 16;

/// A model ready to sample, with any data it needs already loaded.
pub enum BuiltModel {
    Gaussian(CorrelatedGaussian),
    Mixture(MixtureGaussian5),
    Ravine { model: RavineRegression, truth: [f64; 2] },
    Mlp { model: MlpModel, test: Arc<Dataset> },
}

impl BuiltModel {
    pub fn build(cfg: &ModelConfig) -> Result<Self> {
        Ok(match cfg {
            ModelConfig::Gaussian { covariance } => BuiltModel::Gaussian(CorrelatedGaussian::new(*covariance)?),
            ModelConfig::Mixture5 {} => BuiltModel::Mixture(MixtureGaussian5::new()),
            ModelConfig::Ravine {
                n,
                batch,
                theta_true,
                noise_sd,
                data_seed,
                data,
            } => {
                let dataset = match data {
                    Some(path) => RavineDataset::load(path).map_err(|e| CliError::io(path, e))??,
                    None => RavineDataset::generate(*n, *theta_true, *noise_sd, *data_seed)?,
                };
                BuiltModel::Ravine {
                    model: RavineRegression::new(dataset, *batch)?,
                    truth: *theta_true,
                }
            }
            ModelConfig::Mlp {
                layers,
                batch,
                prior,
                prior_switch,
                train,
                test,
            } => {
                let (tr, te) = landsat::load_landsat(train, test)?;
                let mut model = MlpModel::new(Mlp::new(layers)?, Arc::new(tr), *batch, *prior)?;
                if let Some(s) = prior_switch {
                    model = model.with_prior_switch(*s)?;
                }
                BuiltModel::Mlp {
                    model,
                    test: Arc::new(te),
                }
            }
        })
    }

    pub fn energy_model(&self) -> &dyn EnergyModel {
        match self {
            BuiltModel::Gaussian(m) => m,
            BuiltModel::Mixture(m) => m,
            BuiltModel::Ravine { model, .. } => model,
            BuiltModel::Mlp { model, .. } => model,
        }
    }

    pub fn initial_point(&self, init: &InitConfig, seed: u64) -> Result<ParamVector> {
        let d = self.energy_model().dim();
        let mut rng = RngStream::new(seed, INIT_STREAM);
        Ok(match init {
            InitConfig::Auto => match self {
                BuiltModel::Mlp { model, .. } => model.net().init(&mut rng),
                _ => ParamVector::zeros(d),
            },
            InitConfig::Zeros => ParamVector::zeros(d),
            InitConfig::Normal { sd } => {
                let mut v = ParamVector::zeros(d);
                rng.fill_normal(&mut v);
                for x in v.iter_mut() {
                    *x *= sd;
                }
                v
            }
            InitConfig::Point { theta } => {
                if theta.len() != d {
                    return Err(sgmcmc::Error::Dimension { expected: d, got: theta.len() }.into());
                }
                ParamVector::from(theta.as_slice())
            }
            InitConfig::HeUniform => match self {
                BuiltModel::Mlp { model, .. } => model.net().init(&mut rng),
                _ => return Err(CliError::Config("he-uniform init applies to mlp models only".into())),
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyPoint {
    pub epoch: u64,
    pub test_accuracy: f64,
}

/// Per-seed results. Metrics that do not apply to the model are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub diverged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergence: Option<Divergence>,
    pub iterations_run: u64,
    pub samples: usize,
    pub wall_clock_secs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posterior_mean: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_to_truth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cov_error: Option<CovErrorCurve>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_coverage: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sparsity_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_bias_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub accuracy_curve: Vec<AccuracyPoint>,
}

impl SeedSummary {
    /// Scalar metrics by name, used for cross-seed tables.
    pub fn metrics(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        let mut put = |k: &str, v: Option<f64>| {
            if let Some(v) = v {
                out.push((k.to_string(), v));
            }
        };
        put("train_accuracy", self.train_accuracy);
        put("test_accuracy", self.test_accuracy);
        put("sparsity_ratio", self.sparsity_ratio);
        put("distance_to_truth", self.distance_to_truth);
        put("cov_error", self.cov_error.as_ref().and_then(|c| c.errors.last().copied()));
        put(
            "min_mode_coverage",
            self.mode_coverage.as_ref().map(|c| c.iter().cloned().fold(f64::INFINITY, f64::min)),
        );
        if let Some(m) = &self.posterior_mean {
            for (i, v) in m.iter().enumerate() {
                out.push((format!("posterior_mean_{i}"), *v));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub library_version: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<SeedSummary>,
    pub any_diverged: bool,
    pub wall_clock_secs: f64,
}

/// Trace plus summary of one seed.
pub struct SeedOutcome {
    pub summary: SeedSummary,
    pub trace: Trace,
}

/// Runs one seed without touching the filesystem.
pub fn run_seed(cfg: &ExperimentConfig, built: &BuiltModel, seed: u64) -> Result<SeedOutcome> {
    let model = built.energy_model();
    let per_epoch = model.iterations_per_epoch();
    let spec = cfg.chain_spec(per_epoch)?;
    let theta0 = built.initial_point(&cfg.init, seed)?;
    let mut rng = RngStream::new(seed, CHAIN_STREAM);

    let mut curve = Vec::new();
    let acc_every = match (built, cfg.diagnostics.accuracy_every_epochs) {
        (BuiltModel::Mlp { .. }, Some(e)) => e * per_epoch,
        _ => 0,
    };
    let started = Instant::now();
    let trace = run_chain_with(model, &spec, theta0, &mut rng, |t, theta| {
        if acc_every > 0 && t % acc_every == 0 {
            if let BuiltModel::Mlp { model, test } = built {
                if let Ok(a) = accuracy(model.net(), theta, test) {
                    curve.push(AccuracyPoint {
                        epoch: t / per_epoch,
                        test_accuracy: a,
                    });
                }
            }
        }
    })?;
    let wall = started.elapsed().as_secs_f64();

    let mut s = SeedSummary {
        seed,
        diverged: trace.diverged(),
        divergence: trace.divergence.clone(),
        iterations_run: trace.iterations_run,
        samples: trace.len(),
        wall_clock_secs: wall,
        posterior_mean: None,
        distance_to_truth: None,
        cov_error: None,
        mode_coverage: None,
        train_accuracy: None,
        test_accuracy: None,
        sparsity_ratio: None,
        max_bias_ratio: trace.max_bias_ratio,
        accuracy_curve: curve,
    };
    if let Some(d) = &trace.divergence {
        log::warn!("seed {seed}: non-finite {} at iteration {}", d.what, d.iteration);
    }
    if trace.is_empty() {
        log::warn!("seed {seed}: no samples retained");
        return Ok(SeedOutcome { summary: s, trace });
    }

    if model.dim() <= THETA_COLUMNS_MAX_DIM {
        s.posterior_mean = Some(posterior_mean(&trace.samples)?.into_vec());
    }
    match built {
        BuiltModel::Gaussian(g) => {
            s.cov_error = Some(cov_error(&trace.samples, g.covariance(), &cfg.diagnostics.cov_checkpoints)?);
        }
        BuiltModel::Mixture(_) => {
            let r2 = cfg.diagnostics.mode_radius.powi(2);
            let n = trace.len() as f64;
            s.mode_coverage = Some(
                MIXTURE_MEANS
                    .iter()
                    .map(|mu| {
                        let hits = trace
                            .samples
                            .iter()
                            .filter(|p| (p[0] - mu[0]).powi(2) + (p[1] - mu[1]).powi(2) <= r2)
                            .count();
                        hits as f64 / n
                    })
                    .collect(),
            );
        }
        BuiltModel::Ravine { truth, .. } => {
            let m = s.posterior_mean.as_ref().expect("two-dimensional");
            s.distance_to_truth = Some(((m[0] - truth[0]).powi(2) + (m[1] - truth[1]).powi(2)).sqrt());
        }
        BuiltModel::Mlp { model, test } => {
            s.train_accuracy = Some(accuracy_averaged(model.net(), &trace.samples, model.data())?);
            s.test_accuracy = Some(accuracy_averaged(model.net(), &trace.samples, test)?);
            let last_epoch = trace.iterations_run.saturating_sub(1) / per_epoch.max(1);
            if let Prior::Mixture(p) = model.prior_at(last_epoch) {
                s.sparsity_ratio = Some(sparsity_ratio(trace.samples.last().expect("non-empty"), p)?);
            }
        }
    }
    Ok(SeedOutcome { summary: s, trace })
}

fn write(path: PathBuf, contents: &str) -> Result<()> {
    std::fs::write(&path, contents).map_err(|e| CliError::io(path, e))
}

fn write_seed_artifacts(cfg: &ExperimentConfig, out: &Path, o: &SeedOutcome) -> Result<()> {
    let seed = o.summary.seed;
    let dim = o.trace.dim();
    write(out.join(format!("trace_seed{seed}.csv")), &o.trace.to_csv(dim <= THETA_COLUMNS_MAX_DIM))?;
    if let Some(c) = &o.summary.cov_error {
        write(out.join(format!("cov_error_seed{seed}.csv")), &c.to_csv())?;
    }
    if let (Some(grid), 2, true) = (&cfg.diagnostics.contour, dim, o.trace.len() >= 100) {
        let bw = cfg.diagnostics.bandwidth.map(|[x, y]| (x, y));
        let kde = density_contour_from_samples(&o.trace.samples, grid, bw)?;
        write(out.join(format!("contour_seed{seed}.csv")), &kde.to_csv())?;
    }
    if !o.summary.accuracy_curve.is_empty() {
        let mut s = String::from("epoch,test_accuracy\n");
        for p in &o.summary.accuracy_curve {
            s.push_str(&format!("{},{:?}\n", p.epoch, p.test_accuracy));
        }
        write(out.join(format!("accuracy_seed{seed}.csv")), &s)?;
    }
    if let Some(every) = cfg.diagnostics.checkpoint_every {
        let mut s = String::from("iteration");
        for i in 0..dim {
            s.push_str(&format!(",theta_{i}"));
        }
        s.push('\n');
        for (k, (it, th)) in o.trace.iterations.iter().zip(&o.trace.samples).enumerate() {
            if (k as u64 + 1) % every == 0 {
                s.push_str(&it.to_string());
                for v in th.iter() {
                    s.push_str(&format!(",{v:?}"));
                }
                s.push('\n');
            }
        }
        write(out.join(format!("checkpoint_seed{seed}.csv")), &s)?;
    }
    Ok(())
}

/// Validates, loads data, runs all seeds in parallel and writes the trace,
/// diagnostic CSVs and `summary.json` under `out`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    cfg.validate()?;
    let built = BuiltModel::build(&cfg.model)?;
    cfg.chain_spec(built.energy_model().iterations_per_epoch())?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let started = Instant::now();

    if let (Some(grid), 2) = (&cfg.diagnostics.contour, built.energy_model().dim()) {
        write(out.join("energy_grid.csv"), &energy_grid(built.energy_model(), grid)?.to_csv())?;
    }
    let seeds: Vec<SeedSummary> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let o = run_seed(cfg, &built, seed)?;
            write_seed_artifacts(cfg, out, &o)?;
            log::info!("{} seed {seed}: {} samples in {:.1}s", cfg.name, o.summary.samples, o.summary.wall_clock_secs);
            Ok(o.summary)
        })
        .collect::<Result<_>>()?;

    let summary = RunSummary {
        library_version: sgmcmc::VERSION.to_string(),
        config: cfg.clone(),
        any_diverged: seeds.iter().any(|s| s.diverged),
        seeds,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    };
    write(
        out.join("summary.json"),
        &serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    Ok(summary)
}
