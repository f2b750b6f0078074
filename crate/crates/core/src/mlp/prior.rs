use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

/// Two-component zero-mean Gaussian mixture on each weight: a slab
/// `N(0, σ1²)` with weight λ and a spike `N(0, σ0²)` with weight 1 − λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixturePrior {
    pub lambda: f64,
    pub slab_variance: f64,
    pub spike_variance: f64,
}

impl MixturePrior {
    pub const SPARSE_DEFAULT: MixturePrior = MixturePrior {
        lambda: 1e-7,
        slab_variance: 0.02,
        spike_variance: 1e-5,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return config(format!("mixture weight must lie in (0, 1), got {}", self.lambda));
        }
        if !(self.spike_variance > 0.0 && self.spike_variance < self.slab_variance && self.slab_variance.is_finite()) {
            return config("need 0 < spike variance < slab variance");
        }
        Ok(())
    }

    /// Log densities of the weighted slab and spike at `w`.
    fn log_parts(&self, w: f64) -> (f64, f64) {
        let slab = self.lambda.ln() - 0.5 * (2.0 * PI * self.slab_variance).ln() - w * w / (2.0 * self.slab_variance);
        let spike =
            (1.0 - self.lambda).ln() - 0.5 * (2.0 * PI * self.spike_variance).ln() - w * w / (2.0 * self.spike_variance);
        (slab, spike)
    }

    /// Posterior probability that `w` belongs to the slab.
    pub fn slab_responsibility(&self, w: f64) -> f64 {
        let (slab, spike) = self.log_parts(w);
        1.0 / (1.0 + (spike - slab).exp())
    }

    /// `−log[λ N(w; 0, σ1²) + (1−λ) N(w; 0, σ0²)]`.
    pub fn neg_log_density(&self, w: f64) -> f64 {
        let (a, b) = self.log_parts(w);
        let m = a.max(b);
        -(m + ((a - m).exp() + (b - m).exp()).ln())
    }
}

/// Derivative of [`MixturePrior::neg_log_density`] at `w`.
pub fn mixture_prior_loggrad(w: f64, prior: &MixturePrior) -> f64 {
    let r = prior.slab_responsibility(w);
    w * (r / prior.slab_variance + (1.0 - r) / prior.spike_variance)
}

/// Magnitude at which the weighted slab and spike densities are equal;
/// weights at or above it are counted as active connections.
pub fn sparsity_threshold(prior: &MixturePrior) -> Result<f64> {
    let MixturePrior {
        lambda,
        slab_variance: s1,
        spike_variance: s0,
    } = *prior;
    if !(s0 > 0.0 && s0 < s1) {
        return config("sparsity threshold needs 0 < spike variance < slab variance");
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return config(format!("mixture weight must lie in (0, 1), got {lambda}"));
    }
    let log_odds = ((1.0 - lambda) / lambda * (s1 / s0).sqrt()).ln();
    Ok((log_odds * 2.0 * s0 * s1 / (s1 - s0)).sqrt())
}

/// Percentage of coordinates with `|θ_k| ≥ threshold`.
pub fn sparsity_ratio(theta: &[f64], prior: &MixturePrior) -> Result<f64> {
    let t = sparsity_threshold(prior)?;
    if theta.is_empty() {
        return Ok(0.0);
    }
    let active = theta.iter().filter(|w| w.abs() >= t).count();
    Ok(100.0 * active as f64 / theta.len() as f64)
}

/// Prior on every network parameter, biases included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Prior {
    Gaussian { variance: f64 },
    Mixture(MixturePrior),
}

impl Prior {
    pub fn standard_normal() -> Self {
        Prior::Gaussian { variance: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Prior::Gaussian { variance } if !(*variance > 0.0 && variance.is_finite()) => {
                config(format!("prior variance must be positive, got {variance}"))
            }
            Prior::Gaussian { .. } => Ok(()),
            Prior::Mixture(m) => m.validate(),
        }
    }

    /// `−log π(θ)`, normalizing constants included.
    pub fn energy(&self, theta: &[f64]) -> f64 {
        match self {
            Prior::Gaussian { variance } => {
                let c = 0.5 * (2.0 * PI * variance).ln();
                theta.iter().map(|w| w * w / (2.0 * variance) + c).sum()
            }
            Prior::Mixture(m) => theta.iter().map(|&w| m.neg_log_density(w)).sum(),
        }
    }

    /// Adds `−∇ log π(θ)` into `grad`.
    pub fn add_grad(&self, theta: &[f64], grad: &mut [f64]) {
        match self {
            Prior::Gaussian { variance } => {
                for (g, w) in grad.iter_mut().zip(theta) {
                    *g += w / variance;
                }
            }
            Prior::Mixture(m) => {
                for (g, &w) in grad.iter_mut().zip(theta) {
                    *g += mixture_prior_loggrad(w, m);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: MixturePrior = MixturePrior::SPARSE_DEFAULT;

    fn weighted_densities(p: &MixturePrior, w: f64) -> (f64, f64) {
        let n = |v: f64| (-w * w / (2.0 * v)).exp() / (2.0 * PI * v).sqrt();
        (p.lambda * n(p.slab_variance), (1.0 - p.lambda) * n(p.spike_variance))
    }

    fn central_diff(p: &MixturePrior, w: f64, h: f64) -> f64 {
        (p.neg_log_density(w + h) - p.neg_log_density(w - h)) / (2.0 * h)
    }

    #[test]
    fn gradient_is_zero_at_origin() {
        assert_eq!(mixture_prior_loggrad(0.0, &P), 0.0);
    }

    #[test]
    fn slab_dominates_far_out() {
        let g = mixture_prior_loggrad(1.0, &P);
        assert!((g / 50.0 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn spike_dominates_near_zero() {
        let w = 1e-4;
        let g = mixture_prior_loggrad(w, &P);
        assert!((g / (w / P.spike_variance) - 1.0).abs() < 1e-3);
        let fd = central_diff(&P, w, 1e-7);
        assert!(((g - fd) / g).abs() < 1e-8, "{g} vs {fd}");
    }

    #[test]
    fn threshold_value() {
        let t = sparsity_threshold(&P).unwrap();
        assert!((t - 0.01997).abs() < 5e-5, "{t}");
    }

    #[test]
    fn threshold_equalizes_components() {
        for p in [P, MixturePrior { lambda: 0.3, slab_variance: 2.0, spike_variance: 0.1 }] {
            let t = sparsity_threshold(&p).unwrap();
            let (a, b) = weighted_densities(&p, t);
            assert!(((a - b) / b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn threshold_shrinks_with_spike() {
        let mut p = P;
        let mut last = f64::INFINITY;
        for s0 in [1e-5, 1e-8, 1e-12, 1e-16] {
            p.spike_variance = s0;
            let t = sparsity_threshold(&p).unwrap();
            assert!(t < last);
            last = t;
        }
        assert!(last < 1e-6);
    }

    #[test]
    fn threshold_rejects_inverted_variances() {
        let p = MixturePrior { lambda: 0.5, slab_variance: 1e-5, spike_variance: 0.02 };
        assert!(sparsity_threshold(&p).is_err());
        assert!(p.validate().is_err());
    }

    #[test]
    fn ratio_hand_counts() {
        assert_eq!(sparsity_ratio(&[0.0; 7], &P).unwrap(), 0.0);
        assert_eq!(sparsity_ratio(&[1.0, -1.0, 1.0], &P).unwrap(), 100.0);
        assert_eq!(sparsity_ratio(&[0.0, 0.001, 0.05, -0.5], &P).unwrap(), 50.0);
    }

    #[test]
    fn degenerate_mixture_matches_gaussian() {
        let m = MixturePrior { lambda: 1.0, ..P };
        let g = Prior::Gaussian { variance: P.slab_variance };
        let theta = [0.3, -0.01, 0.0, 1.7, -2.2];
        let (a, b) = (Prior::Mixture(m).energy(&theta), g.energy(&theta));
        assert!((a - b).abs() <= 4.0 * f64::EPSILON * b.abs());
        let mut ga = vec![0.0; 5];
        let mut gb = vec![0.0; 5];
        Prior::Mixture(m).add_grad(&theta, &mut ga);
        g.add_grad(&theta, &mut gb);
        for (a, b) in ga.iter().zip(&gb) {
            assert!((a - b).abs() <= 4.0 * f64::EPSILON * b.abs());
        }
    }

    #[test]
    fn unit_gaussian_gradient_is_theta() {
        let theta = [0.5, -1.5, 3.0];
        let mut g = vec![0.0; 3];
        Prior::standard_normal().add_grad(&theta, &mut g);
        assert_eq!(g, theta);
    }

    proptest! {
        #[test]
        fn mixture_gradient_matches_numeric(w in -10.0f64..10.0) {
            let lp = P.neg_log_density(w);
            prop_assert!(lp.is_finite());
            let g = mixture_prior_loggrad(w, &P);
            // Absolute floor near w = 0, where g itself vanishes.
            let h = if w.abs() < 0.1 { 1e-7 } else { 1e-6 * w.abs() };
            let fd = central_diff(&P, w, h);
            prop_assert!((g - fd).abs() <= 1e-6 * g.abs().max(1.0), "w={} g={} fd={}", w, g, fd);
        }

        #[test]
        fn prior_gradient_is_odd(w in -10.0f64..10.0) {
            prop_assert_eq!(mixture_prior_loggrad(-w, &P), -mixture_prior_loggrad(w, &P));
        }
    }
}
