use super::{check_gradient, check_temperature, check_theta, noise_scale};
use crate::error::{config, Result};
use crate::param::ParamVector;
use crate::rng::RngStream;

/// Plain SGLD: `θ' = θ - ε g + N(0, 2ετ I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SgldState {
    pub theta: ParamVector,
    pub temperature: f64,
    pub t: u64,
}

impl SgldState {
    pub fn new(theta: ParamVector, temperature: f64) -> Self {
        Self {
            theta,
            temperature,
            t: 0,
        }
    }

    pub fn step(&mut self, g: &[f64], lr: f64, rng: &mut RngStream) -> Result<()> {
        check_gradient(g, &self.theta, self.t)?;
        check_temperature(self.temperature)?;
        let tau = self.temperature;
        let s = noise_scale(lr, tau);
        for (th, &gi) in self.theta.iter_mut().zip(g) {
            *th -= lr * gi;
            if tau > 0.0 {
                *th += s * rng.normal();
            }
        }
        self.t += 1;
        check_theta(&self.theta, self.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsgldParams {
    /// Smoothing factor of the squared-gradient average.
    pub beta: f64,
    pub lambda: f64,
    pub temperature: f64,
}

impl PsgldParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return config(format!("pSGLD beta must lie in (0, 1), got {}", self.beta));
        }
        if !(self.lambda > 0.0) {
            return config(format!("pSGLD lambda must be positive, got {}", self.lambda));
        }
        Ok(())
    }
}

/// Preconditioned SGLD with the diagonal RMSprop preconditioner
/// `G = diag(1 ⊘ (λ1 + √V))`. The `Γ(θ)` correction term is not applied.
#[derive(Debug, Clone, PartialEq)]
pub struct PsgldState {
    pub theta: ParamVector,
    pub v: ParamVector,
    pub params: PsgldParams,
    pub t: u64,
}

impl PsgldState {
    pub fn new(theta: ParamVector, params: PsgldParams) -> Result<Self> {
        params.validate()?;
        let d = theta.len();
        Ok(Self {
            theta,
            v: ParamVector::zeros(d),
            params,
            t: 0,
        })
    }

    /// Current preconditioner diagonal.
    pub fn preconditioner(&self) -> ParamVector {
        self.v.iter().map(|v| 1.0 / (self.params.lambda + v.sqrt())).collect::<Vec<_>>().into()
    }

    pub fn step(&mut self, g: &[f64], lr: f64, rng: &mut RngStream) -> Result<()> {
        check_gradient(g, &self.theta, self.t)?;
        let PsgldParams { beta, lambda, temperature: tau } = self.params;
        check_temperature(tau)?;
        for i in 0..g.len() {
            self.v[i] = beta * self.v[i] + (1.0 - beta) * g[i] * g[i];
            let precond = 1.0 / (lambda + self.v[i].sqrt());
            self.theta[i] -= lr * precond * g[i];
            if tau > 0.0 {
                self.theta[i] += noise_scale(lr, tau * precond) * rng.normal();
            }
        }
        self.t += 1;
        check_theta(&self.theta, self.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SghmcParams {
    /// Momentum retention; the friction is `1 - beta1`.
    pub beta1: f64,
    pub temperature: f64,
}

impl SghmcParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta1 >= 0.0 && self.beta1 < 1.0) {
            return config(format!("SGHMC beta1 must lie in [0, 1), got {}", self.beta1));
        }
        Ok(())
    }
}

/// SGHMC in momentum-SGD form:
/// `v' = β1 v - ε g + N(0, 2(1-β1) ε τ I)`, `θ' = θ + v'`.
#[derive(Debug, Clone, PartialEq)]
pub struct SghmcState {
    pub theta: ParamVector,
    pub velocity: ParamVector,
    pub params: SghmcParams,
    pub t: u64,
}

impl SghmcState {
    pub fn new(theta: ParamVector, params: SghmcParams) -> Result<Self> {
        params.validate()?;
        let d = theta.len();
        Ok(Self {
            theta,
            velocity: ParamVector::zeros(d),
            params,
            t: 0,
        })
    }

    pub fn step(&mut self, g: &[f64], lr: f64, rng: &mut RngStream) -> Result<()> {
        check_gradient(g, &self.theta, self.t)?;
        let SghmcParams { beta1, temperature: tau } = self.params;
        check_temperature(tau)?;
        let s = noise_scale((1.0 - beta1) * lr, tau);
        for i in 0..g.len() {
            let mut v = beta1 * self.velocity[i] - lr * g[i];
            if tau > 0.0 {
                v += s * rng.normal();
            }
            self.velocity[i] = v;
            self.theta[i] += v;
        }
        self.t += 1;
        check_theta(&self.theta, self.t)
    }
}
