//! Langevin kernels whose drift carries an adaptive bias built from past
//! stochastic gradients.
//!
//! Per iteration: θ moves with the current gradient plus `a` times the bias
//! formed from the averages *before* this iteration's gradient is folded in,
//! then the averages are updated with the same gradient. No bias correction
//! is applied to the averages.

use super::{check_gradient, check_temperature, check_theta, noise_scale};
use crate::error::{config, Result};
use crate::param::ParamVector;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsgldParams {
    /// Bias factor.
    pub a: f64,
    /// Smoothing factor of the gradient average.
    pub beta1: f64,
    pub temperature: f64,
}

impl MsgldParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta1 > 0.0 && self.beta1 <= 1.0) {
            return config(format!("MSGLD beta1 must lie in (0, 1], got {}", self.beta1));
        }
        if !self.a.is_finite() {
            return config("MSGLD bias factor must be finite");
        }
        Ok(())
    }
}

/// Momentum SGLD: `θ' = θ - ε (g + a m) + N(0, 2ετ I)`, then
/// `m ← β1 m + (1 - β1) g`.
#[derive(Debug, Clone, PartialEq)]
pub struct MsgldState {
    pub theta: ParamVector,
    pub m: ParamVector,
    pub params: MsgldParams,
    pub t: u64,
}

impl MsgldState {
    pub fn new(theta: ParamVector, params: MsgldParams) -> Result<Self> {
        params.validate()?;
        let d = theta.len();
        Ok(Self {
            theta,
            m: ParamVector::zeros(d),
            params,
            t: 0,
        })
    }

    pub fn step(&mut self, g: &[f64], lr: f64, rng: &mut RngStream) -> Result<()> {
        check_gradient(g, &self.theta, self.t)?;
        let MsgldParams { a, beta1, temperature: tau } = self.params;
        check_temperature(tau)?;
        let s = noise_scale(lr, tau);
        for i in 0..g.len() {
            self.theta[i] -= lr * (g[i] + a * self.m[i]);
            if tau > 0.0 {
                self.theta[i] += s * rng.normal();
            }
        }
        for i in 0..g.len() {
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g[i];
        }
        self.t += 1;
        check_theta(&self.theta, self.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsgldParams {
    pub a: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Added to `V` before the square root.
    pub lambda: f64,
    pub temperature: f64,
}

impl AsgldParams {
    pub fn validate(&self) -> Result<()> {
        let AsgldParams { a, beta1, beta2, lambda, .. } = *self;
        if !(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0) {
            return config(format!("ASGLD smoothing factors must lie in (0, 1), got {beta1}, {beta2}"));
        }
        if beta1 * beta1 >= beta2 {
            return config(format!("ASGLD requires beta1^2 < beta2, got beta1={beta1}, beta2={beta2}"));
        }
        if !(lambda > 0.0) {
            return config(format!("ASGLD lambda must be positive, got {lambda}"));
        }
        if !a.is_finite() {
            return config("ASGLD bias factor must be finite");
        }
        Ok(())
    }
}

/// `C = sqrt((1-β1)² / (1-β2) / (1 - β1²/β2))`.
///
/// Upper bound on `‖m ⊘ √V‖∞` for the undamped averages whenever
/// `β1² < β2`; adding `λ > 0` under the root only shrinks the ratio.
pub fn asgld_bias_bound(beta1: f64, beta2: f64) -> f64 {
    ((1.0 - beta1).powi(2) / (1.0 - beta2) / (1.0 - beta1 * beta1 / beta2)).sqrt()
}

/// Adam SGLD: `θ' = θ - ε (g + a m ⊘ √(V + λ1)) + N(0, 2ετ I)`, then
/// `m ← β1 m + (1-β1) g` and `V ← β2 V + (1-β2) g ⊙ g`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsgldState {
    pub theta: ParamVector,
    pub m: ParamVector,
    pub v: ParamVector,
    pub params: AsgldParams,
    pub t: u64,
}

impl AsgldState {
    pub fn new(theta: ParamVector, params: AsgldParams) -> Result<Self> {
        params.validate()?;
        let d = theta.len();
        Ok(Self {
            theta,
            m: ParamVector::zeros(d),
            v: ParamVector::zeros(d),
            params,
            t: 0,
        })
    }

    /// `‖m ⊘ √(V + λ1)‖∞` for the current averages.
    pub fn bias_ratio(&self) -> f64 {
        let lambda = self.params.lambda;
        self.m
            .iter()
            .zip(self.v.iter())
            .fold(0.0_f64, |acc, (m, v)| acc.max(m.abs() / (v + lambda).sqrt()))
    }

    pub fn step(&mut self, g: &[f64], lr: f64, rng: &mut RngStream) -> Result<()> {
        check_gradient(g, &self.theta, self.t)?;
        let AsgldParams {
            a,
            beta1,
            beta2,
            lambda,
            temperature: tau,
        } = self.params;
        check_temperature(tau)?;
        let s = noise_scale(lr, tau);
        for i in 0..g.len() {
            let bias = self.m[i] / (self.v[i] + lambda).sqrt();
            self.theta[i] -= lr * (g[i] + a * bias);
            if tau > 0.0 {
                self.theta[i] += s * rng.normal();
            }
        }
        for i in 0..g.len() {
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g[i];
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g[i] * g[i];
        }
        self.t += 1;
        debug_assert!(
            self.bias_ratio() <= asgld_bias_bound(beta1, beta2) + 1e-9,
            "ASGLD bias ratio {} exceeds bound {}",
            self.bias_ratio(),
            asgld_bias_bound(beta1, beta2)
        );
        check_theta(&self.theta, self.t)
    }
}
