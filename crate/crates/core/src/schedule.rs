//! Learning-rate schedules indexed by epoch.

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

/// Learning rate as a function of the epoch index `k`.
///
/// Within an epoch every iteration uses the same rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Schedule {
    Constant { lr: f64 },
    /// `lr * gamma^floor(k / every)`.
    StepDecay { lr: f64, gamma: f64, every: u64 },
}

impl Schedule {
    pub fn constant(lr: f64) -> Self {
        Schedule::Constant { lr }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Schedule::Constant { lr } => {
                if !(lr > 0.0 && lr.is_finite()) {
                    return config(format!("learning rate must be positive, got {lr}"));
                }
                Ok(())
            }
            Schedule::StepDecay { lr, gamma, every } => step_decay_rate(lr, gamma, every, 0).map(|_| ()),
        }
    }

    pub fn initial(&self) -> f64 {
        match *self {
            Schedule::Constant { lr } | Schedule::StepDecay { lr, .. } => lr,
        }
    }

    /// Rate for epoch `k`. Assumes the schedule has been validated.
    pub fn rate(&self, epoch: u64) -> f64 {
        match *self {
            Schedule::Constant { lr } => lr,
            Schedule::StepDecay { lr, gamma, every } => lr * gamma.powi((epoch / every) as i32),
        }
    }
}

/// `lr0 * gamma^floor(k / every)`.
pub fn step_decay_rate(lr0: f64, gamma: f64, every: u64, k: u64) -> Result<f64> {
    if !(lr0 > 0.0 && lr0.is_finite()) {
        return config(format!("initial learning rate must be positive, got {lr0}"));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return config(format!("decay factor must lie in (0, 1], got {gamma}"));
    }
    if every == 0 {
        return config("decay period must be at least one epoch");
    }
    Ok(lr0 * gamma.powi((k / every) as i32))
}
