//! Energy models: `U(θ) = -log likelihood - log prior`, its exact gradient,
//! and a stochastic gradient estimator.

mod gaussian;
mod mixture;
mod ravine;

pub use gaussian::CorrelatedGaussian;
pub use mixture::{MixtureGaussian5, MIXTURE_MEANS};
pub use ravine::{ravine_grad_f, ravine_predict, RavineDataset, RavineRegression};

use crate::param::ParamVector;
use crate::rng::RngStream;

/// Target distribution seen through its energy function.
///
/// Implementations are immutable after construction and may be queried from
/// several chains at once.
pub trait EnergyModel: Send + Sync {
    fn dim(&self) -> usize;

    fn energy(&self, theta: &[f64]) -> f64;

    fn grad(&self, theta: &[f64]) -> ParamVector;

    /// Unbiased estimate of `grad(theta)`. All randomness comes from `rng`.
    fn stoch_grad(&self, theta: &[f64], rng: &mut RngStream) -> ParamVector;

    /// Stochastic gradient for models whose energy changes with the epoch
    /// (prior switching). Defaults to [`EnergyModel::stoch_grad`].
    fn stoch_grad_at(&self, theta: &[f64], _epoch: u64, rng: &mut RngStream) -> ParamVector {
        self.stoch_grad(theta, rng)
    }

    fn energy_at(&self, theta: &[f64], _epoch: u64) -> f64 {
        self.energy(theta)
    }

    /// Minibatch gradient of the average negative log-likelihood, without
    /// any prior or penalty term. Used by the SGD/Adam baselines. Models with
    /// no data term fall back to the energy gradient.
    fn stoch_loss_grad(&self, theta: &[f64], rng: &mut RngStream) -> ParamVector {
        self.stoch_grad(theta, rng)
    }

    /// Iterations that make up one pass over the data.
    fn iterations_per_epoch(&self) -> u64 {
        1
    }
}

/// `grad(θ) + e` with `e ~ N(0, I_d)`, one fresh draw per call.
pub fn injected_noise_grad<M: EnergyModel + ?Sized>(
    model: &M,
    theta: &[f64],
    rng: &mut RngStream,
) -> ParamVector {
    let mut g = model.grad(theta);
    for v in g.iter_mut() {
        *v += rng.normal();
    }
    g
}

/// Central finite-difference gradient of `model.energy`.
pub fn finite_difference_grad<M: EnergyModel + ?Sized>(model: &M, theta: &[f64], h: f64) -> ParamVector {
    let mut probe = theta.to_vec();
    let mut out = ParamVector::zeros(theta.len());
    for i in 0..theta.len() {
        let x = probe[i];
        probe[i] = x + h;
        let up = model.energy(&probe);
        probe[i] = x - h;
        let down = model.energy(&probe);
        probe[i] = x;
        out[i] = (up - down) / (2.0 * h);
    }
    out
}

impl<M: EnergyModel + ?Sized> EnergyModel for Box<M> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn energy(&self, theta: &[f64]) -> f64 {
        (**self).energy(theta)
    }
    fn grad(&self, theta: &[f64]) -> ParamVector {
        (**self).grad(theta)
    }
    fn stoch_grad(&self, theta: &[f64], rng: &mut RngStream) -> ParamVector {
        (**self).stoch_grad(theta, rng)
    }
    fn stoch_grad_at(&self, theta: &[f64], epoch: u64, rng: &mut RngStream) -> ParamVector {
        (**self).stoch_grad_at(theta, epoch, rng)
    }
    fn energy_at(&self, theta: &[f64], epoch: u64) -> f64 {
        (**self).energy_at(theta, epoch)
    }
    fn stoch_loss_grad(&self, theta: &[f64], rng: &mut RngStream) -> ParamVector {
        (**self).stoch_loss_grad(theta, rng)
    }
    fn iterations_per_epoch(&self) -> u64 {
        (**self).iterations_per_epoch()
    }
}
