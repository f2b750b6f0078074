//! SGD and Adam baselines on the averaged, L2-regularized loss
//! `-(1/n) Σ log f(x_i|θ) + (λ/2) ‖θ‖²`.

use super::{check_gradient, check_theta};
use crate::error::{config, Result};
use crate::param::ParamVector;

/// `loss_grad + weight_decay * θ`.
pub fn regularized_grad(loss_grad: &[f64], theta: &[f64], weight_decay: f64) -> ParamVector {
    loss_grad
        .iter()
        .zip(theta)
        .map(|(g, t)| g + weight_decay * t)
        .collect::<Vec<_>>()
        .into()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgdState {
    pub theta: ParamVector,
    pub t: u64,
}

impl SgdState {
    pub fn new(theta: ParamVector) -> Self {
        Self { theta, t: 0 }
    }

    pub fn step(&mut self, g_reg: &[f64], lr: f64) -> Result<()> {
        check_gradient(g_reg, &self.theta, self.t)?;
        for (th, g) in self.theta.iter_mut().zip(g_reg) {
            *th -= lr * g;
        }
        self.t += 1;
        check_theta(&self.theta, self.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta1 >= 0.0 && self.beta1 < 1.0 && self.beta2 >= 0.0 && self.beta2 < 1.0) {
            return config("Adam smoothing factors must lie in [0, 1)");
        }
        if !(self.eps > 0.0) {
            return config("Adam epsilon must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub theta: ParamVector,
    pub m: ParamVector,
    pub v: ParamVector,
    pub params: AdamParams,
    pub t: u64,
}

impl AdamState {
    pub fn new(theta: ParamVector, params: AdamParams) -> Result<Self> {
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

    pub fn step(&mut self, g_reg: &[f64], lr: f64) -> Result<()> {
        check_gradient(g_reg, &self.theta, self.t)?;
        let AdamParams { beta1, beta2, eps } = self.params;
        self.t += 1;
        let c1 = 1.0 - beta1.powf(self.t as f64);
        let c2 = 1.0 - beta2.powf(self.t as f64);
        for i in 0..g_reg.len() {
            let g = g_reg[i];
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g;
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            self.theta[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        check_theta(&self.theta, self.t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adam_first_step_is_bias_corrected() {
        let eps = 1e-8;
        let mut s = AdamState::new(
            ParamVector::zeros(2),
            AdamParams {
                beta1: 0.9,
                beta2: 0.999,
                eps,
            },
        )
        .unwrap();
        s.step(&[1.0, 0.0], 0.01).unwrap();
        // m_hat = (1, 0), v_hat = (1, 0)
        assert!((s.m[0] / 0.1 - 1.0).abs() < 1e-12);
        assert!((s.v[0] / (1.0 - 0.999) - 1.0).abs() < 1e-9);
        assert!((s.theta[0] + 0.01 / (1.0 + eps)).abs() < 1e-12);
        assert_eq!(s.theta[1], 0.0);
    }

    #[test]
    fn sgd_zero_gradient_no_move() {
        let mut s = SgdState::new(ParamVector::from(&[1.0, -2.0][..]));
        let g = regularized_grad(&[0.0, 0.0], &s.theta, 0.0);
        s.step(&g, 0.1).unwrap();
        assert_eq!(&s.theta[..], &[1.0, -2.0]);
    }

    #[test]
    fn sgd_pure_weight_decay() {
        let theta = ParamVector::from(&[1.0, -2.0][..]);
        let mut s = SgdState::new(theta.clone());
        let (lr, wd) = (0.1, 5e-4);
        let g = regularized_grad(&[0.0, 0.0], &s.theta, wd);
        s.step(&g, lr).unwrap();
        for i in 0..2 {
            assert!((s.theta[i] - (theta[i] - lr * wd * theta[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn adam_validation() {
        let p = AdamParams {
            beta1: 1.0,
            beta2: 0.999,
            eps: 1e-8,
        };
        assert!(p.validate().is_err());
    }

    proptest::proptest! {
        #[test]
        fn adam_second_moment_non_negative(grads in proptest::collection::vec(-1e3f64..1e3, 1..50)) {
            let params = AdamParams { beta1: 0.9, beta2: 0.999, eps: 1e-8 };
            let mut s = AdamState::new(ParamVector::zeros(1), params).unwrap();
            for g in grads {
                s.step(&[g], 1e-3).unwrap();
                proptest::prop_assert!(s.v[0] >= 0.0);
            }
        }
    }
}
