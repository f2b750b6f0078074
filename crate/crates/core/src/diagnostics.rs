//! Summaries computed from retained samples.

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::models::EnergyModel;
use crate::param::ParamVector;
use crate::rng::RngStream;
use crate::samplers::{run_chain_with, ChainSpec, SamplerSpec};
use crate::schedule::Schedule;

/// Coordinatewise mean of the samples.
pub fn posterior_mean(samples: &[ParamVector]) -> Result<ParamVector> {
    let first = samples.first().ok_or(Error::EmptyTrace)?;
    let mut mean = ParamVector::zeros(first.len());
    for s in samples {
        if s.len() != first.len() {
            return Err(Error::Dimension {
                expected: first.len(),
                got: s.len(),
            });
        }
        for (m, v) in mean.iter_mut().zip(s.iter()) {
            *m += v;
        }
    }
    let n = samples.len() as f64;
    for m in mean.iter_mut() {
        *m /= n;
    }
    Ok(mean)
}

/// Mean absolute entrywise error of the running 2×2 sample covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovErrorCurve {
    pub checkpoints: Vec<usize>,
    pub errors: Vec<f64>,
}

impl CovErrorCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("samples,cov_error\n");
        for (c, e) in self.checkpoints.iter().zip(&self.errors) {
            s.push_str(&format!("{c},{e:?}\n"));
        }
        s
    }

    /// True when every error is strictly below the previous one.
    pub fn is_decreasing(&self) -> bool {
        self.errors.windows(2).all(|w| w[1] < w[0])
    }
}

/// At each checkpoint `L`, `(1/4) Σ_ij |S_L(i,j) − Σ(i,j)|` where `S_L` is the
/// unbiased sample covariance of the first `L` samples. Checkpoints below 2
/// or beyond the sample count are skipped.
pub fn cov_error(samples: &[ParamVector], target: [[f64; 2]; 2], checkpoints: &[usize]) -> Result<CovErrorCurve> {
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return config("checkpoints must be strictly increasing");
    }
    if let Some(s) = samples.iter().find(|s| s.len() != 2) {
        return Err(Error::Dimension { expected: 2, got: s.len() });
    }
    let mut curve = CovErrorCurve {
        checkpoints: Vec::new(),
        errors: Vec::new(),
    };
    // Welford updates keep the running covariance stable over long traces.
    let mut mean = [0.0; 2];
    let mut m2 = [[0.0; 2]; 2];
    let mut next = checkpoints.iter().copied().filter(|&c| c >= 2 && c <= samples.len()).peekable();
    for (k, s) in samples.iter().enumerate() {
        let n = (k + 1) as f64;
        let d = [s[0] - mean[0], s[1] - mean[1]];
        mean[0] += d[0] / n;
        mean[1] += d[1] / n;
        let d2 = [s[0] - mean[0], s[1] - mean[1]];
        for i in 0..2 {
            for j in 0..2 {
                m2[i][j] += d[i] * d2[j];
            }
        }
        if next.peek() == Some(&(k + 1)) {
            next.next();
            let mut err = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    err += (m2[i][j] / (n - 1.0) - target[i][j]).abs();
                }
            }
            curve.checkpoints.push(k + 1);
            curve.errors.push(err / 4.0);
        }
    }
    Ok(curve)
}

/// Rectangular grid over `[x_min, x_max] × [y_min, y_max]` with `nx × ny`
/// nodes, both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn square(lo: f64, hi: f64, n: usize) -> Self {
        Self {
            x_min: lo,
            x_max: hi,
            y_min: lo,
            y_max: hi,
            nx: n,
            ny: n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return config("grid needs at least 2 nodes per axis");
        }
        if !(self.x_min < self.x_max && self.y_min < self.y_max) {
            return config("grid ranges must be increasing");
        }
        Ok(())
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (self.x_max - self.x_min) * i as f64 / (self.nx - 1) as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + (self.y_max - self.y_min) * j as f64 / (self.ny - 1) as f64
    }
}

/// Energy values on a grid, stored row by row (`values[j * nx + i]` is the
/// value at `(x_i, y_j)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl ContourGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.spec.nx + i]
    }

    /// Grid indices of the smallest value.
    pub fn argmin(&self) -> (usize, usize) {
        let k = self
            .values
            .iter()
            .enumerate()
            .fold(0, |best, (k, v)| if *v < self.values[best] { k } else { best });
        (k % self.spec.nx, k / self.spec.nx)
    }

    /// Long format: `x,y,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,value\n");
        for j in 0..self.spec.ny {
            for i in 0..self.spec.nx {
                s.push_str(&format!("{:?},{:?},{:?}\n", self.spec.x(i), self.spec.y(j), self.at(i, j)));
            }
        }
        s
    }
}

/// Exact energy of a two-parameter model on the grid.
pub fn energy_grid<M: EnergyModel + ?Sized>(model: &M, spec: &GridSpec) -> Result<ContourGrid> {
    spec.validate()?;
    if model.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: model.dim(),
        });
    }
    let mut values = Vec::with_capacity(spec.nx * spec.ny);
    for j in 0..spec.ny {
        for i in 0..spec.nx {
            values.push(model.energy(&[spec.x(i), spec.y(j)]));
        }
    }
    Ok(ContourGrid { spec: *spec, values })
}

/// Silverman's rule for a 2-D product Gaussian kernel: `h_j = σ_j n^{-1/6}`.
pub fn silverman_bandwidth(samples: &[ParamVector]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::EmptyTrace);
    }
    let mean = posterior_mean(samples)?;
    let n = samples.len() as f64;
    let var = |k: usize| samples.iter().map(|s| (s[k] - mean[k]).powi(2)).sum::<f64>() / (n - 1.0);
    let f = n.powf(-1.0 / 6.0);
    Ok((var(0).sqrt() * f, var(1).sqrt() * f))
}

/// Kernel density estimate of two-parameter samples, returned as
/// `−log density` on the grid. Each cell sums every kernel in log space, so
/// cells far from all samples keep an exact, finite value instead of
/// underflowing. `bandwidth = None` uses [`silverman_bandwidth`].
pub fn density_contour_from_samples(
    samples: &[ParamVector],
    spec: &GridSpec,
    bandwidth: Option<(f64, f64)>,
) -> Result<ContourGrid> {
    spec.validate()?;
    if samples.len() < 100 {
        return config(format!("density estimate needs at least 100 samples, got {}", samples.len()));
    }
    if let Some(s) = samples.iter().find(|s| s.len() != 2) {
        return Err(Error::Dimension { expected: 2, got: s.len() });
    }
    let (hx, hy) = match bandwidth {
        Some(b) => b,
        None => silverman_bandwidth(samples)?,
    };
    if !(hx > 0.0 && hy > 0.0 && hx.is_finite() && hy.is_finite()) {
        return config(format!("bandwidth must be positive, got ({hx}, {hy})"));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s[0] / hx).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s[1] / hy).collect();
    let log_norm = (samples.len() as f64 * 2.0 * std::f64::consts::PI * hx * hy).ln();
    let mut values = Vec::with_capacity(spec.nx * spec.ny);
    for j in 0..spec.ny {
        let gy = spec.y(j) / hy;
        for i in 0..spec.nx {
            let gx = spec.x(i) / hx;
            // Online log-sum-exp of -(Δ²)/2 over all samples.
            let (mut max, mut sum) = (f64::NEG_INFINITY, 0.0);
            for (sx, sy) in xs.iter().zip(&ys) {
                let e = -0.5 * ((gx - sx).powi(2) + (gy - sy).powi(2));
                if e > max {
                    sum = sum * (max - e).exp() + 1.0;
                    max = e;
                } else {
                    sum += (e - max).exp();
                }
            }
            values.push(log_norm - max - sum.ln());
        }
    }
    Ok(ContourGrid { spec: *spec, values })
}

/// Pearson correlation coefficient.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.len() < 2 {
        return config("correlation needs at least two points");
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    Ok(sab / (saa * sbb).sqrt())
}

/// Replication mean squared error of the ergodic mean for one chain length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub length: u64,
    pub mse: f64,
}

pub fn mse_table_csv(rows: &[MseRow]) -> String {
    let mut s = String::from("length,mse\n");
    for r in rows {
        s.push_str(&format!("{},{:?}\n", r.length, r.mse));
    }
    s
}

/// For each chain length `L`, runs one chain per seed from `theta0` at a
/// constant step size and averages `‖θ̄_L − target‖²` over seeds, where
/// `θ̄_L` is the mean of all `L` iterates.
#[allow(clippy::too_many_arguments)]
pub fn mse_scaling<M: EnergyModel + ?Sized>(
    model: &M,
    sampler: SamplerSpec,
    temperature: f64,
    lr: f64,
    lengths: &[u64],
    seeds: &[u64],
    theta0: &ParamVector,
    target: &[f64],
) -> Result<Vec<MseRow>> {
    if seeds.is_empty() {
        return config("need at least one seed");
    }
    if target.len() != model.dim() {
        return Err(Error::Dimension {
            expected: model.dim(),
            got: target.len(),
        });
    }
    let mut rows = Vec::with_capacity(lengths.len());
    for &length in lengths {
        let spec = ChainSpec {
            sampler,
            temperature,
            schedule: Schedule::constant(lr),
            iterations: length,
            burn_in: 0,
            thinning: length.max(1),
            record_energy: false,
            time_budget: None,
        };
        let mut total = 0.0;
        for &seed in seeds {
            let mut sum = vec![0.0; model.dim()];
            let mut rng = RngStream::new(seed, 0);
            let trace = run_chain_with(model, &spec, theta0.clone(), &mut rng, |_, th| {
                for (s, v) in sum.iter_mut().zip(th) {
                    *s += v;
                }
            })?;
            if let Some(d) = trace.divergence {
                return Err(Error::NonFinite {
                    what: "theta",
                    iteration: d.iteration,
                    theta: d.theta,
                });
            }
            let n = trace.iterations_run as f64;
            total += sum.iter().zip(target).map(|(s, t)| (s / n - t).powi(2)).sum::<f64>();
        }
        rows.push(MseRow {
            length,
            mse: total / seeds.len() as f64,
        });
    }
    Ok(rows)
}
