//! End-to-end acceptance checks. Each test prints one PASS/FAIL line and
//! then asserts. Run with `cargo test -p sgmcmc-cli --test acceptance -- --nocapture`.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use sgmcmc::diagnostics::mse_scaling;
use sgmcmc::mlp::{sparsity_ratio, sparsity_threshold, Dataset, MixturePrior, Mlp, MlpModel, Prior};
use sgmcmc::models::{finite_difference_grad, CorrelatedGaussian, MixtureGaussian5, RavineDataset, RavineRegression};
use sgmcmc::samplers::asgld_bias_bound;
use sgmcmc::{EnergyModel, ParamVector, RngStream, SamplerSpec};
use sgmcmc_cli::config::ModelConfig;
use sgmcmc_cli::presets::preset;
use sgmcmc_cli::{run_experiment, run_seed, BuiltModel, ExperimentConfig, RunSummary};

fn data_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn load(name: &str) -> ExperimentConfig {
    let mut c = preset(name).unwrap();
    c.resolve_paths(&data_root());
    c
}

fn run(name: &str) -> (RunSummary, Duration) {
    let cfg = load(name);
    let dir = tempfile::tempdir().unwrap();
    let t = Instant::now();
    let s = run_experiment(&cfg, dir.path()).unwrap();
    (s, t.elapsed())
}

fn report(n: u32, what: &str, pass: bool, detail: &str) {
    println!(
        "acceptance criterion {n:>2} [{}] {what}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} ({what}) failed: {detail}");
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(1e-8)
}

#[test]
fn criterion_01_ravine_estimates() {
    let started = Instant::now();
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, need_within, within) in [
        ("ravine-msgld", 4, true),
        ("ravine-asgld", 3, true),
        ("ravine-sgld", 3, false),
        ("ravine-sghmc", 3, false),
        ("ravine-psgld", 3, false),
    ] {
        let (s, _) = run(name);
        let dists: Vec<Option<f64>> = s.seeds.iter().map(|x| x.distance_to_truth).collect();
        let count = if within {
            dists.iter().filter(|d| matches!(d, Some(d) if *d <= 0.5)).count()
        } else {
            dists.iter().filter(|d| !matches!(d, Some(d) if *d <= 2.0)).count()
        };
        ok &= count >= need_within;
        let means: Vec<String> = s
            .seeds
            .iter()
            .map(|x| match &x.posterior_mean {
                Some(m) => format!("({:.2},{:.2})", m[0], m[1]),
                None => "diverged".into(),
            })
            .collect();
        detail.push(format!(
            "{name} {} {count}/5 (need {need_within}) {}",
            if within { "within 0.5:" } else { "off by > 2:" },
            means.join(" ")
        ));
    }
    let elapsed = started.elapsed();
    ok &= elapsed <= Duration::from_secs(600);
    report(1, "ravine posterior means", ok, &format!("{}; {:.0?}", detail.join("; "), elapsed));
}

// The 10^4 checkpoint carries a per-seed spread of about 0.035 against a
// gap of about 0.01 to the 10^5 value, so the curve is averaged over 100
// fixed seeds. The time limit applies to each sampler's batch.
const GAUSSIAN_SEEDS: u64 = 100;

#[test]
fn criterion_02_gaussian_covariance() {
    let mut ok = true;
    let mut detail = Vec::new();
    for name in ["gaussian-sgld", "gaussian-msgld", "gaussian-asgld"] {
        let cfg = load(name);
        let built = BuiltModel::build(&cfg.model).unwrap();
        let started = Instant::now();
        let curves: Vec<_> = (1..=GAUSSIAN_SEEDS)
            .map(|seed| run_seed(&cfg, &built, seed).unwrap().summary.cov_error.unwrap())
            .collect();
        let elapsed = started.elapsed();
        assert!(curves.iter().all(|c| c.checkpoints == vec![1_000, 10_000, 100_000]));
        let mean: Vec<f64> = (0..3)
            .map(|k| curves.iter().map(|c| c.errors[k]).sum::<f64>() / curves.len() as f64)
            .collect();
        ok &= mean[2] < 0.1 && mean[0] > mean[1] && mean[1] > mean[2];
        ok &= elapsed <= Duration::from_secs(30);
        detail.push(format!(
            "{name} {:.3} -> {:.3} -> {:.3} ({:.1?})",
            mean[0], mean[1], mean[2], elapsed
        ));
    }
    report(
        2,
        "gaussian covariance error",
        ok,
        &format!("mean over {GAUSSIAN_SEEDS} seeds: {}", detail.join("; ")),
    );
}

#[test]
fn criterion_03_mixture_coverage() {
    let mut ok = true;
    let mut detail = Vec::new();
    for name in ["mixture-msgld", "mixture-asgld"] {
        let (s, elapsed) = run(name);
        let worst = s
            .seeds
            .iter()
            .flat_map(|x| x.mode_coverage.clone().unwrap())
            .fold(f64::INFINITY, f64::min);
        ok &= worst >= 0.01 && elapsed <= Duration::from_secs(360);
        detail.push(format!("{name} smallest per-mode share {:.3} in {:.1?}", worst, elapsed));
    }
    report(3, "mixture mode coverage", ok, &detail.join("; "));
}

#[test]
fn criterion_04_landsat_accuracy() {
    let started = Instant::now();
    let mean_test = |s: &RunSummary| {
        let v: Vec<f64> = s.seeds.iter().filter_map(|x| x.test_accuracy).collect();
        assert_eq!(v.len(), s.seeds.len(), "a seed produced no samples");
        v.iter().sum::<f64>() / v.len() as f64
    };
    let (msgld, _) = run("landsat-msgld");
    let (sgld, _) = run("landsat-sgld");
    let (m, s) = (mean_test(&msgld), mean_test(&sgld));
    let elapsed = started.elapsed();
    let ok = m >= 89.5 && m > s && elapsed <= Duration::from_secs(1200);
    report(
        4,
        "landsat test accuracy",
        ok,
        &format!("msgld {m:.2}% vs sgld {s:.2}% over 5 seeds; {:.0?}", elapsed),
    );
}

fn with_sampler(cfg: &ExperimentConfig, sampler: SamplerSpec) -> ExperimentConfig {
    let mut c = cfg.clone();
    c.sampler = sampler;
    c
}

#[test]
fn criterion_05_zero_drift_reduction() {
    let mut ok = true;
    let mut detail = Vec::new();
    for name in ["gaussian-asgld", "mixture-asgld", "ravine-asgld", "landsat-asgld"] {
        let mut cfg = load(name);
        match cfg.model {
            ModelConfig::Mlp { .. } => {
                cfg.epochs = Some(3);
                cfg.burn_in = 0;
            }
            _ => {
                cfg.iterations = Some(3_000);
                cfg.burn_in = 0;
            }
        }
        let built = BuiltModel::build(&cfg.model).unwrap();
        for seed in [1, 2] {
            let trace = |s| run_seed(&with_sampler(&cfg, s), &built, seed).unwrap().trace;
            let base = trace(SamplerSpec::Sgld);
            let m = trace(SamplerSpec::Msgld { a: 0.0, beta1: 0.9 });
            let a = trace(SamplerSpec::Asgld {
                a: 0.0,
                beta1: 0.9,
                beta2: 0.999,
                lambda: 1e-5,
            });
            let same = base.samples == m.samples && base.samples == a.samples && base.to_csv(true) == a.to_csv(true);
            ok &= same && !base.samples.is_empty();
            if !same {
                detail.push(format!("{name} seed {seed} differs"));
            }
        }
        detail.push(format!("{} ok", cfg.model.kind()));
    }
    report(5, "a = 0 reduces to SGLD", ok, &detail.join(", "));
}

#[test]
fn criterion_06_asgld_bias_bound() {
    let c = asgld_bias_bound(0.9, 0.999);
    assert!((c - 7.270).abs() < 1e-3, "{c}");
    let limit = 7.270 + 1e-9;
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    for name in ["gaussian-asgld", "mixture-asgld", "ravine-asgld", "landsat-asgld", "landsat-asgld-sparse"] {
        let (s, _) = run(name);
        for x in &s.seeds {
            worst = worst.max(x.max_bias_ratio.expect("asgld reports its ratio"));
            runs += 1;
        }
    }
    report(
        6,
        "asgld drift ratio bound",
        worst <= limit,
        &format!("max over {runs} runs = {worst:.4} (limit {limit})"),
    );
}

fn random_points(dim: usize, lo: f64, hi: f64, n: usize, seed: u64) -> Vec<ParamVector> {
    let mut rng = RngStream::new(seed, 0);
    (0..n)
        .map(|_| (0..dim).map(|_| rng.uniform(lo, hi)).collect::<Vec<_>>().into())
        .collect()
}

fn worst_fd<M: EnergyModel>(m: &M, pts: &[ParamVector], h: f64) -> f64 {
    pts.iter()
        .map(|p| rel_err(&m.grad(p), &finite_difference_grad(m, p, h)))
        .fold(0.0, f64::max)
}

fn landsat_subset(rows: usize) -> Arc<Dataset> {
    let (tr, _) = sgmcmc_cli::landsat::load_landsat(
        &data_root().join("landsat/sat.trn"),
        &data_root().join("landsat/sat.tst"),
    )
    .unwrap();
    let features = tr.features[..rows * tr.n_features].to_vec();
    let labels = tr.labels[..rows].to_vec();
    Arc::new(Dataset::new(features, labels, tr.n_features, tr.n_classes).unwrap())
}

#[test]
fn criterion_07_finite_differences() {
    let mut errs = Vec::new();
    errs.push((
        "gaussian",
        worst_fd(&CorrelatedGaussian::standard(), &random_points(2, -6.0, 6.0, 100, 1), 1e-5),
    ));
    errs.push(("mixture", worst_fd(&MixtureGaussian5::new(), &random_points(2, -7.0, 7.0, 100, 2), 1e-5)));
    let ravine = RavineRegression::new(RavineDataset::generate(10_000, [20.0, 10.0], 1.0, 2020).unwrap(), 100).unwrap();
    errs.push(("ravine", worst_fd(&ravine, &random_points(2, -30.0, 30.0, 100, 3), 1e-6)));
    let net = Mlp::new(&[36, 8, 6]).unwrap();
    for (label, prior) in [
        ("mlp gaussian prior", Prior::standard_normal()),
        ("mlp mixture prior", Prior::Mixture(MixturePrior::SPARSE_DEFAULT)),
    ] {
        let m = MlpModel::new(net.clone(), landsat_subset(10), 5, prior).unwrap();
        errs.push((label, worst_fd(&m, &random_points(net.dim(), -0.5, 0.5, 100, 4), 1e-6)));
    }
    let ok = errs.iter().all(|(_, e)| *e < 1e-5);
    let detail: Vec<String> = errs.iter().map(|(k, e)| format!("{k} {e:.1e}")).collect();
    report(7, "gradients vs finite differences (100 points each)", ok, &detail.join(", "));
}

fn all_pairs(n: usize) -> Vec<[usize; 2]> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| [i, j])).collect()
}

fn average(grads: Vec<ParamVector>) -> Vec<f64> {
    let mut acc = vec![0.0; grads[0].len()];
    for g in &grads {
        for (a, v) in acc.iter_mut().zip(g.iter()) {
            *a += v;
        }
    }
    acc.iter().map(|a| a / grads.len() as f64).collect()
}

#[test]
fn criterion_08_minibatch_unbiasedness() {
    let pairs = all_pairs(5);
    let mut worst: f64 = 0.0;
    let ravine = RavineRegression::new(RavineDataset::generate(5, [20.0, 10.0], 1.0, 11).unwrap(), 2).unwrap();
    for theta in random_points(2, -25.0, 25.0, 20, 5) {
        let mean = average(pairs.iter().map(|p| ravine.batch_grad(&theta, p)).collect());
        worst = worst.max(rel_err(&mean, &ravine.grad(&theta)));
    }
    let net = Mlp::new(&[36, 8, 6]).unwrap();
    for prior in [Prior::standard_normal(), Prior::Mixture(MixturePrior::SPARSE_DEFAULT)] {
        let m = MlpModel::new(net.clone(), landsat_subset(5), 2, prior).unwrap();
        for theta in random_points(net.dim(), -0.5, 0.5, 5, 6) {
            let mean = average(pairs.iter().map(|p| m.batch_grad(&theta, p, 0).unwrap()).collect());
            worst = worst.max(rel_err(&mean, &m.grad(&theta)));
        }
    }
    report(
        8,
        "minibatch gradient unbiased (N=5, n=2, all 10 subsets)",
        worst <= 1e-12,
        &format!("worst relative gap {worst:.1e}"),
    );
}

#[test]
fn criterion_09_mse_scaling() {
    let started = Instant::now();
    let seeds: Vec<u64> = (1..=50).collect();
    let rows = mse_scaling(
        &CorrelatedGaussian::standard(),
        SamplerSpec::Sgld,
        1.0,
        0.1,
        &[1_000, 4_000],
        &seeds,
        &ParamVector::zeros(2),
        &[0.0, 0.0],
    )
    .unwrap();
    let ratio = rows[0].mse / rows[1].mse;
    let elapsed = started.elapsed();
    report(
        9,
        "ergodic-mean MSE scaling",
        ratio >= 2.0 && elapsed <= Duration::from_secs(120),
        &format!(
            "MSE {:.2e} at L=1000, {:.2e} at L=4000, ratio {ratio:.2}; {:.1?}",
            rows[0].mse, rows[1].mse, elapsed
        ),
    );
}

#[test]
fn criterion_10_sparsity() {
    let p = MixturePrior::SPARSE_DEFAULT;
    let t = sparsity_threshold(&p).unwrap();
    let dens = |v: f64| (-t * t / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt();
    let slab = p.lambda * dens(p.slab_variance);
    let spike = (1.0 - p.lambda) * dens(p.spike_variance);
    let gap = ((slab - spike) / spike).abs();
    let cases: [(&[f64], f64); 4] = [
        (&[0.0, 0.0, 0.0], 0.0),
        (&[1.0, -1.0, 1.0, -1.0], 100.0),
        (&[0.0, 0.001, 0.05, -0.5], 50.0),
        (&[0.019, -0.021, 0.3, 0.0, -0.0199], 40.0),
    ];
    let counts_ok = cases.iter().all(|(v, want)| sparsity_ratio(v, &p).unwrap() == *want);
    report(
        10,
        "sparsity threshold and ratio",
        gap < 1e-10 && counts_ok,
        &format!("threshold {t:.6}, component gap {gap:.1e}, hand counts {}", if counts_ok { "match" } else { "differ" }),
    );
}
