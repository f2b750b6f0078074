use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sgmcmc_cli::compare::compare;
use sgmcmc_cli::landsat;
use sgmcmc_cli::{presets, run_experiment, CliError, ExperimentConfig, Result, DATA_DIR_ENV};

#[derive(Parser)]
#[command(name = "sgmcmc", version, about = "Run and compare stochastic-gradient MCMC experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed of one experiment.
    Run {
        /// Config file (JSON).
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        /// Name of a shipped preset instead of a file.
        #[arg(long)]
        preset: Option<String>,
        /// Comma-separated seeds, overriding the config.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run several experiments on the same model and tabulate mean ± standard error.
    Compare {
        /// Config files or preset names.
        #[arg(long, num_args = 1.., required = true)]
        configs: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate the Landsat files and write scaled CSV copies.
    IngestLandsat {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the shipped presets.
    ListPresets,
    /// Print a preset as JSON.
    ShowPreset { name: String },
}

fn data_root() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("data"))
}

fn load_config(spec: &str) -> Result<ExperimentConfig> {
    let path = Path::new(spec);
    let mut cfg = if path.exists() {
        ExperimentConfig::load(path)?
    } else {
        presets::preset(spec)?
    };
    cfg.resolve_paths(&data_root());
    Ok(cfg)
}

fn override_seeds(cfg: &mut ExperimentConfig, seeds: &Option<Vec<u64>>) -> Result<()> {
    if let Some(s) = seeds {
        cfg.seeds = s.clone();
        cfg.validate()?;
    }
    Ok(())
}

fn write(path: PathBuf, text: &str) -> Result<()> {
    std::fs::write(&path, text).map_err(|e| CliError::io(path, e))
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            preset,
            seeds,
            out,
        } => {
            let mut cfg = match (config, preset) {
                (Some(path), _) => {
                    let mut c = ExperimentConfig::load(&path)?;
                    c.resolve_paths(&data_root());
                    c
                }
                (None, Some(name)) => load_config(&name)?,
                (None, None) => unreachable!("clap enforces one of --config/--preset"),
            };
            override_seeds(&mut cfg, &seeds)?;
            let out = out.unwrap_or_else(|| cfg.output.clone());
            let summary = run_experiment(&cfg, &out)?;
            for s in &summary.seeds {
                let metrics: Vec<String> = s.metrics().iter().map(|(k, v)| format!("{k}={v:.4}")).collect();
                println!(
                    "seed {:>3}  {}{}",
                    s.seed,
                    if s.diverged { "DIVERGED " } else { "" },
                    metrics.join(" ")
                );
            }
            println!("summary written to {}", out.join("summary.json").display());
            Ok(if summary.any_diverged { ExitCode::from(1) } else { ExitCode::SUCCESS })
        }
        Command::Compare { configs, seeds, out } => {
            let mut cfgs = Vec::with_capacity(configs.len());
            for c in &configs {
                let mut cfg = load_config(c)?;
                override_seeds(&mut cfg, &seeds)?;
                cfgs.push(cfg);
            }
            let rows = compare(&cfgs, &out)?;
            for r in &rows {
                println!("{:<24} {:<22} {:>12.4} ± {:.4} (n={})", r.config, r.metric, r.mean, r.std_error, r.n);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::IngestLandsat { train, test, out } => {
            let (tr, te) = landsat::load_landsat(&train, &test)?;
            std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
            write(out.join("train.csv"), &landsat::write_ingested(&tr))?;
            write(out.join("test.csv"), &landsat::write_ingested(&te))?;
            let meta = serde_json::json!({
                "train_rows": tr.len(),
                "test_rows": te.len(),
                "train_class_counts": landsat::class_counts(&tr),
                "test_class_counts": landsat::class_counts(&te),
            });
            write(out.join("meta.json"), &serde_json::to_string_pretty(&meta).expect("json"))?;
            println!("{} train / {} test rows written to {}", tr.len(), te.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::ListPresets => {
            for name in presets::names() {
                let cfg = presets::preset(name)?;
                println!("{name:<22} {}", cfg.description);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ShowPreset { name } => {
            println!("{}", presets::preset(&name)?.to_json());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
