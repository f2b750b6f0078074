use std::path::Path;

use super::EnergyModel;
use crate::error::{config, Result};
use crate::param::ParamVector;
use crate::rng::RngStream;

/// `f_θ(x) = (x-1)² + 2 sin(θ1 x) + θ1/30 + cos(θ2 x - 1) - θ2/20`.
pub fn ravine_predict(theta: &[f64], x: f64) -> f64 {
    (x - 1.0).powi(2) + 2.0 * (theta[0] * x).sin() + theta[0] / 30.0 + (theta[1] * x - 1.0).cos()
        - theta[1] / 20.0
}

/// `∇_θ f_θ(x)`.
pub fn ravine_grad_f(theta: &[f64], x: f64) -> [f64; 2] {
    [
        2.0 * x * (theta[0] * x).cos() + 1.0 / 30.0,
        -x * (theta[1] * x - 1.0).sin() - 1.0 / 20.0,
    ]
}

/// Pairs `(x_i, y_i)` for the ravine regression.
#[derive(Debug, Clone, PartialEq)]
pub struct RavineDataset {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl RavineDataset {
    /// `x ~ U[-2, 4]`, `y = f_θ(x) + noise_sd * N(0, 1)`.
    ///
    /// Draw order per row is `x` then the noise, so the dataset is fixed by
    /// the seed alone.
    pub fn generate(n: usize, theta_true: [f64; 2], noise_sd: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return config("ravine dataset needs at least one row");
        }
        let mut rng = RngStream::new(seed, 0);
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let xi = rng.uniform(-2.0, 4.0);
            let e = rng.normal();
            x.push(xi);
            y.push(ravine_predict(&theta_true, xi) + noise_sd * e);
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// CSV with header `x,y`. Values are written with round-trip precision.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y\n");
        for (x, y) in self.x.iter().zip(&self.y) {
            s.push_str(&format!("{x:?},{y:?}\n"));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "x,y" => {}
            _ => return config("ravine CSV must start with header `x,y`"),
        }
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |p: Option<&str>| -> Result<f64> {
                p.and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| crate::Error::Config(format!("bad ravine CSV row at line {}", i + 1)))
            };
            x.push(parse(parts.next())?);
            y.push(parse(parts.next())?);
            if parts.next().is_some() {
                return config(format!("bad ravine CSV row at line {}", i + 1));
            }
        }
        if x.is_empty() {
            return config("ravine CSV has no rows");
        }
        Ok(Self { x, y })
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv())
    }

    pub fn load(path: &Path) -> std::io::Result<Result<Self>> {
        Ok(Self::from_csv(&std::fs::read_to_string(path)?))
    }
}

/// Nonlinear regression with a standard-normal prior on both parameters:
/// `U(θ) = Σ_i (y_i - f_θ(x_i))²/2 + ‖θ‖²/2`.
#[derive(Debug, Clone)]
pub struct RavineRegression {
    data: RavineDataset,
    batch: usize,
}

impl RavineRegression {
    pub fn new(data: RavineDataset, batch: usize) -> Result<Self> {
        if batch == 0 {
            return config("minibatch size must be positive");
        }
        if batch > data.len() {
            return config(format!("minibatch size {batch} exceeds dataset size {}", data.len()));
        }
        Ok(Self { data, batch })
    }

    pub fn data(&self) -> &RavineDataset {
        &self.data
    }

    pub fn batch_size(&self) -> usize {
        self.batch
    }

    /// `-(N/n) Σ_{i ∈ batch} (y_i - f_θ(x_i)) ∇f_θ(x_i) + θ`.
    pub fn batch_grad(&self, theta: &[f64], batch: &[usize]) -> ParamVector {
        let scale = self.data.len() as f64 / batch.len() as f64;
        let (mut g0, mut g1) = (0.0, 0.0);
        for &i in batch {
            let x = self.data.x[i];
            let r = self.data.y[i] - ravine_predict(theta, x);
            let df = ravine_grad_f(theta, x);
            g0 += r * df[0];
            g1 += r * df[1];
        }
        ParamVector::from_vec(vec![-scale * g0 + theta[0], -scale * g1 + theta[1]])
    }
}

impl EnergyModel for RavineRegression {
    fn dim(&self) -> usize {
        2
    }

    fn energy(&self, theta: &[f64]) -> f64 {
        let sse: f64 = self
            .data
            .x
            .iter()
            .zip(&self.data.y)
            .map(|(&x, &y)| (y - ravine_predict(theta, x)).powi(2))
            .sum();
        0.5 * sse + 0.5 * (theta[0] * theta[0] + theta[1] * theta[1])
    }

    fn grad(&self, theta: &[f64]) -> ParamVector {
        let all: Vec<usize> = (0..self.data.len()).collect();
        self.batch_grad(theta, &all)
    }

    fn stoch_grad(&self, theta: &[f64], rng: &mut RngStream) -> ParamVector {
        let batch = rng.sample_indices(self.data.len(), self.batch);
        self.batch_grad(theta, &batch)
    }

    fn stoch_loss_grad(&self, theta: &[f64], rng: &mut RngStream) -> ParamVector {
        let batch = rng.sample_indices(self.data.len(), self.batch);
        let mut g = self.batch_grad(theta, &batch);
        let n = self.data.len() as f64;
        g[0] = (g[0] - theta[0]) / n;
        g[1] = (g[1] - theta[1]) / n;
        g
    }

    fn iterations_per_epoch(&self) -> u64 {
        self.data.len().div_ceil(self.batch) as u64
    }
}
