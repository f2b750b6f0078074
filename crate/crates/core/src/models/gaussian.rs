use std::f64::consts::PI;

use super::{injected_noise_grad, EnergyModel};
use crate::error::{config, Result};
use crate::param::ParamVector;
use crate::rng::RngStream;

/// Zero-mean bivariate Gaussian target. The stochastic gradient is the exact
/// gradient plus `N(0, I_2)` noise.
#[derive(Debug, Clone)]
pub struct CorrelatedGaussian {
    cov: [[f64; 2]; 2],
    prec: [[f64; 2]; 2],
    log_norm: f64,
}

impl CorrelatedGaussian {
    pub fn new(cov: [[f64; 2]; 2]) -> Result<Self> {
        let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
        if cov[0][1] != cov[1][0] || cov[0][0] <= 0.0 || det <= 0.0 {
            return config("covariance must be symmetric positive definite");
        }
        let prec = [
            [cov[1][1] / det, -cov[0][1] / det],
            [-cov[1][0] / det, cov[0][0] / det],
        ];
        Ok(Self {
            cov,
            prec,
            log_norm: (2.0 * PI).ln() + 0.5 * det.ln(),
        })
    }

    /// Σ = [[1, 0.9], [0.9, 1]].
    pub fn standard() -> Self {
        Self::new([[1.0, 0.9], [0.9, 1.0]]).expect("fixed covariance is positive definite")
    }

    pub fn covariance(&self) -> [[f64; 2]; 2] {
        self.cov
    }

    pub fn precision(&self) -> [[f64; 2]; 2] {
        self.prec
    }
}

impl EnergyModel for CorrelatedGaussian {
    fn dim(&self) -> usize {
        2
    }

    fn energy(&self, theta: &[f64]) -> f64 {
        let g = self.grad(theta);
        0.5 * (theta[0] * g[0] + theta[1] * g[1]) + self.log_norm
    }

    /// Σ⁻¹θ.
    fn grad(&self, theta: &[f64]) -> ParamVector {
        let p = &self.prec;
        ParamVector::from_vec(vec![
            p[0][0] * theta[0] + p[0][1] * theta[1],
            p[1][0] * theta[0] + p[1][1] * theta[1],
        ])
    }

    fn stoch_grad(&self, theta: &[f64], rng: &mut RngStream) -> ParamVector {
        injected_noise_grad(self, theta, rng)
    }
}
