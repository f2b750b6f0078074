//! Cross-seed tables of run summaries.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{bad_config, CliError, Result};
use crate::run::{run_experiment, RunSummary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub config: String,
    pub sampler: String,
    pub metric: String,
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

/// Mean and standard error (`s / √n`, zero for a single value).
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One row per (run, metric); diverged seeds are left out of the averages.
pub fn tabulate(summaries: &[RunSummary]) -> Result<Vec<ComparisonRow>> {
    if let Some(first) = summaries.first() {
        if summaries.iter().any(|s| s.config.model != first.config.model) {
            return bad_config("compared runs must share the same model specification");
        }
    }
    let mut rows = Vec::new();
    for s in summaries {
        let mut by_metric: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for seed in s.seeds.iter().filter(|x| !x.diverged) {
            for (k, v) in seed.metrics() {
                by_metric.entry(k).or_default().push(v);
            }
        }
        for (metric, values) in by_metric {
            let (mean, std_error) = mean_se(&values);
            rows.push(ComparisonRow {
                config: s.config.name.clone(),
                sampler: s.config.sampler.name().to_string(),
                metric,
                mean,
                std_error,
                n: values.len(),
            });
        }
    }
    Ok(rows)
}

pub fn to_csv(rows: &[ComparisonRow]) -> String {
    let mut s = String::from("config,sampler,metric,mean,std_error,n\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{:?},{:?},{}\n",
            r.config, r.sampler, r.metric, r.mean, r.std_error, r.n
        ));
    }
    s
}

/// Runs every config into `out/<name>/` and writes `comparison.csv` and
/// `comparison.json` under `out`.
pub fn compare(configs: &[ExperimentConfig], out: &Path) -> Result<Vec<ComparisonRow>> {
    if configs.is_empty() {
        return bad_config("nothing to compare");
    }
    for c in configs {
        c.validate()?;
        if c.model != configs[0].model {
            return bad_config(format!(
                "config `{}` uses a different model from `{}`",
                c.name, configs[0].name
            ));
        }
    }
    let mut summaries = Vec::with_capacity(configs.len());
    for c in configs {
        summaries.push(run_experiment(c, &out.join(&c.name))?);
    }
    let rows = tabulate(&summaries)?;
    let csv = out.join("comparison.csv");
    std::fs::write(&csv, to_csv(&rows)).map_err(|e| CliError::io(csv, e))?;
    let json = out.join("comparison.json");
    std::fs::write(&json, serde_json::to_string_pretty(&rows).expect("rows serialize"))
        .map_err(|e| CliError::io(json, e))?;
    Ok(rows)
}
