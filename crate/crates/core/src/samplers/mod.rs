//! One-step transition kernels and the chain driver.
//!
//! Every kernel follows the same per-iteration contract: the caller draws a
//! stochastic gradient at the current θ (model randomness first), then the
//! kernel moves θ, drawing its step noise from the same stream, and finally
//! folds the gradient into any running averages. The adaptive-drift kernels
//! therefore use the averages built from gradients up to the previous
//! iterate when they move θ.

mod adaptive;
mod baseline;
mod chain;
mod optim;

pub use adaptive::{asgld_bias_bound, AsgldParams, AsgldState, MsgldParams, MsgldState};
pub use baseline::{PsgldParams, PsgldState, SghmcParams, SghmcState, SgldState};
pub use chain::{run_chain, run_chain_with, ChainSpec, Divergence, Trace};
pub use optim::{regularized_grad, AdamParams, AdamState, SgdState};

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::param::ParamVector;
use crate::rng::RngStream;

/// Sampler or optimizer choice together with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SamplerSpec {
    Sgld,
    Msgld {
        a: f64,
        beta1: f64,
    },
    Asgld {
        a: f64,
        beta1: f64,
        beta2: f64,
        lambda: f64,
    },
    Psgld {
        beta: f64,
        lambda: f64,
    },
    Sghmc {
        beta1: f64,
    },
    /// Plain SGD on the averaged loss plus `weight_decay/2 ‖θ‖²`.
    Sgd {
        #[serde(default)]
        weight_decay: f64,
    },
    /// Bias-corrected Adam on the same objective.
    Adam {
        beta1: f64,
        beta2: f64,
        eps: f64,
        #[serde(default)]
        weight_decay: f64,
    },
}

impl SamplerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SamplerSpec::Sgld => "sgld",
            SamplerSpec::Msgld { .. } => "msgld",
            SamplerSpec::Asgld { .. } => "asgld",
            SamplerSpec::Psgld { .. } => "psgld",
            SamplerSpec::Sghmc { .. } => "sghmc",
            SamplerSpec::Sgd { .. } => "sgd",
            SamplerSpec::Adam { .. } => "adam",
        }
    }

    /// Optimizers step on the averaged loss, samplers on the energy.
    pub fn is_optimizer(&self) -> bool {
        matches!(self, SamplerSpec::Sgd { .. } | SamplerSpec::Adam { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SamplerSpec::Sgld => Ok(()),
            SamplerSpec::Msgld { a, beta1 } => MsgldParams { a, beta1, temperature: 0.0 }.validate(),
            SamplerSpec::Asgld { a, beta1, beta2, lambda } => AsgldParams {
                a,
                beta1,
                beta2,
                lambda,
                temperature: 0.0,
            }
            .validate(),
            SamplerSpec::Psgld { beta, lambda } => PsgldParams { beta, lambda, temperature: 0.0 }.validate(),
            SamplerSpec::Sghmc { beta1 } => SghmcParams { beta1, temperature: 0.0 }.validate(),
            SamplerSpec::Sgd { weight_decay } => {
                if !(weight_decay >= 0.0) {
                    return config("weight decay must be non-negative");
                }
                Ok(())
            }
            SamplerSpec::Adam {
                beta1,
                beta2,
                eps,
                weight_decay,
            } => {
                AdamParams { beta1, beta2, eps }.validate()?;
                if !(weight_decay >= 0.0) {
                    return config("weight decay must be non-negative");
                }
                Ok(())
            }
        }
    }

    /// Fresh kernel state at `theta0`.
    pub fn init(&self, theta0: ParamVector, temperature: f64) -> Result<Kernel> {
        self.validate()?;
        if !(temperature >= 0.0 && temperature.is_finite()) {
            return config(format!("temperature must be non-negative, got {temperature}"));
        }
        Ok(match *self {
            SamplerSpec::Sgld => Kernel::Sgld(SgldState::new(theta0, temperature)),
            SamplerSpec::Msgld { a, beta1 } => Kernel::Msgld(MsgldState::new(theta0, MsgldParams { a, beta1, temperature })?),
            SamplerSpec::Asgld { a, beta1, beta2, lambda } => Kernel::Asgld(AsgldState::new(
                theta0,
                AsgldParams {
                    a,
                    beta1,
                    beta2,
                    lambda,
                    temperature,
                },
            )?),
            SamplerSpec::Psgld { beta, lambda } => {
                Kernel::Psgld(PsgldState::new(theta0, PsgldParams { beta, lambda, temperature })?)
            }
            SamplerSpec::Sghmc { beta1 } => Kernel::Sghmc(SghmcState::new(theta0, SghmcParams { beta1, temperature })?),
            SamplerSpec::Sgd { weight_decay } => Kernel::Sgd(SgdState::new(theta0), weight_decay),
            SamplerSpec::Adam {
                beta1,
                beta2,
                eps,
                weight_decay,
            } => Kernel::Adam(AdamState::new(theta0, AdamParams { beta1, beta2, eps })?, weight_decay),
        })
    }
}

/// Running state of any kernel.
#[derive(Debug, Clone)]
pub enum Kernel {
    Sgld(SgldState),
    Msgld(MsgldState),
    Asgld(AsgldState),
    Psgld(PsgldState),
    Sghmc(SghmcState),
    Sgd(SgdState, f64),
    Adam(AdamState, f64),
}

impl Kernel {
    pub fn theta(&self) -> &ParamVector {
        match self {
            Kernel::Sgld(s) => &s.theta,
            Kernel::Msgld(s) => &s.theta,
            Kernel::Asgld(s) => &s.theta,
            Kernel::Psgld(s) => &s.theta,
            Kernel::Sghmc(s) => &s.theta,
            Kernel::Sgd(s, _) => &s.theta,
            Kernel::Adam(s, _) => &s.theta,
        }
    }

    pub fn iteration(&self) -> u64 {
        match self {
            Kernel::Sgld(s) => s.t,
            Kernel::Msgld(s) => s.t,
            Kernel::Asgld(s) => s.t,
            Kernel::Psgld(s) => s.t,
            Kernel::Sghmc(s) => s.t,
            Kernel::Sgd(s, _) => s.t,
            Kernel::Adam(s, _) => s.t,
        }
    }

    pub fn is_optimizer(&self) -> bool {
        matches!(self, Kernel::Sgd(..) | Kernel::Adam(..))
    }

    /// Weight-decay coefficient added to the loss gradient for optimizers.
    pub fn weight_decay(&self) -> Option<f64> {
        match self {
            Kernel::Sgd(_, wd) | Kernel::Adam(_, wd) => Some(*wd),
            _ => None,
        }
    }

    /// `‖m ⊘ √(V + λ)‖∞` for ASGLD, `None` otherwise.
    pub fn bias_ratio(&self) -> Option<f64> {
        match self {
            Kernel::Asgld(s) => Some(s.bias_ratio()),
            _ => None,
        }
    }

    /// Advances one iteration with gradient `g` (for optimizers, the
    /// regularized loss gradient).
    pub fn step(&mut self, g: &[f64], lr: f64, rng: &mut RngStream) -> Result<()> {
        match self {
            Kernel::Sgld(s) => s.step(g, lr, rng),
            Kernel::Msgld(s) => s.step(g, lr, rng),
            Kernel::Asgld(s) => s.step(g, lr, rng),
            Kernel::Psgld(s) => s.step(g, lr, rng),
            Kernel::Sghmc(s) => s.step(g, lr, rng),
            Kernel::Sgd(s, _) => s.step(g, lr),
            Kernel::Adam(s, _) => s.step(g, lr),
        }
    }
}

pub(crate) fn check_gradient(g: &[f64], theta: &[f64], t: u64) -> Result<()> {
    if g.len() != theta.len() {
        return Err(Error::Dimension {
            expected: theta.len(),
            got: g.len(),
        });
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "gradient",
            iteration: t,
            theta: theta.to_vec(),
        });
    }
    Ok(())
}

pub(crate) fn check_theta(theta: &[f64], t: u64) -> Result<()> {
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "theta",
            iteration: t,
            theta: theta.to_vec(),
        });
    }
    Ok(())
}

pub(crate) fn check_temperature(tau: f64) -> Result<()> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return config(format!("temperature must be non-negative, got {tau}"));
    }
    Ok(())
}

/// `sqrt(2 lr τ)`, the standard deviation of the Langevin step noise.
#[inline]
pub(crate) fn noise_scale(lr: f64, tau: f64) -> f64 {
    (2.0 * lr * tau).sqrt()
}
