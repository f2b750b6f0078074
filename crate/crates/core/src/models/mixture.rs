use std::f64::consts::PI;

use super::{injected_noise_grad, EnergyModel};
use crate::param::ParamVector;
use crate::rng::RngStream;

pub const MIXTURE_MEANS: [[f64; 2]; 5] = [[-3.0, -3.0], [-3.0, 0.0], [0.0, 0.0], [3.0, 0.0], [3.0, 3.0]];

/// Equal-weight mixture of five isotropic Gaussians with variance 1/2,
/// `π(θ) = Σ_i (1/(10π)) exp(-‖θ - μ_i‖²)`.
///
/// Evaluated with log-sum-exp so far-from-mode points stay finite.
#[derive(Debug, Clone, Default)]
pub struct MixtureGaussian5;

impl MixtureGaussian5 {
    pub fn new() -> Self {
        Self
    }

    /// Energy and gradient in one pass.
    pub fn energy_grad(&self, theta: &[f64]) -> (f64, ParamVector) {
        let mut logits = [0.0; 5];
        for (l, mu) in logits.iter_mut().zip(MIXTURE_MEANS.iter()) {
            let dx = theta[0] - mu[0];
            let dy = theta[1] - mu[1];
            *l = -(dx * dx + dy * dy);
        }
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut weights = [0.0; 5];
        let mut total = 0.0;
        for (w, l) in weights.iter_mut().zip(logits.iter()) {
            *w = (l - max).exp();
            total += *w;
        }
        let lse = max + total.ln();
        let mut g = ParamVector::zeros(2);
        for (w, mu) in weights.iter().zip(MIXTURE_MEANS.iter()) {
            let r = w / total;
            g[0] += r * 2.0 * (theta[0] - mu[0]);
            g[1] += r * 2.0 * (theta[1] - mu[1]);
        }
        ((10.0 * PI).ln() - lse, g)
    }

    /// `exp(-U)`. The `1/(10π)` weights give total mass 1/2.
    pub fn unnormalized_density(&self, theta: &[f64]) -> f64 {
        (-self.energy(theta)).exp()
    }

    /// Probability density: equal weights 1/5, variance 1/2 per coordinate.
    pub fn density(&self, theta: &[f64]) -> f64 {
        2.0 * self.unnormalized_density(theta)
    }

    /// One direct draw: pick a component uniformly, then add `N(0, I/2)`.
    pub fn sample_direct(&self, rng: &mut RngStream) -> [f64; 2] {
        let mu = MIXTURE_MEANS[rng.index(5)];
        let s = 0.5_f64.sqrt();
        [mu[0] + s * rng.normal(), mu[1] + s * rng.normal()]
    }
}

impl EnergyModel for MixtureGaussian5 {
    fn dim(&self) -> usize {
        2
    }

    fn energy(&self, theta: &[f64]) -> f64 {
        self.energy_grad(theta).0
    }

    fn grad(&self, theta: &[f64]) -> ParamVector {
        self.energy_grad(theta).1
    }

    fn stoch_grad(&self, theta: &[f64], rng: &mut RngStream) -> ParamVector {
        injected_noise_grad(self, theta, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_values() {
        let m = MixtureGaussian5::new();
        let (u, g) = m.energy_grad(&[0.0, 0.0]);
        let expected = -((1.0 / (10.0 * PI)) * (1.0 + 2.0 * (-9.0f64).exp() + 2.0 * (-18.0f64).exp())).ln();
        assert!((u - expected).abs() < 1e-12);
        assert!((u - 3.4473).abs() < 1e-3);
        assert!(g[0].abs() < 1e-12 && g[1].abs() < 1e-12);
    }

    #[test]
    fn gradient_vanishes_at_far_mode() {
        let g = MixtureGaussian5::new().grad(&[-3.0, -3.0]);
        assert!(g.norm2() < 1e-3);
    }

    #[test]
    fn finite_far_away() {
        let m = MixtureGaussian5::new();
        for p in [[100.0, 0.0], [-70.7, 70.7], [0.0, -100.0], [1e3, 1e3]] {
            let (u, g) = m.energy_grad(&p);
            assert!(u.is_finite() && g.is_finite(), "{p:?}");
        }
    }

    #[test]
    fn density_integrates_to_one() {
        let m = MixtureGaussian5::new();
        let h = 0.02;
        let n = 1000;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = -10.0 + (i as f64 + 0.5) * h;
                let y = -10.0 + (j as f64 + 0.5) * h;
                total += m.density(&[x, y]);
            }
        }
        assert!((total * h * h - 1.0).abs() < 1e-6);
    }

    #[test]
    fn unnormalized_mass_is_half() {
        let m = MixtureGaussian5::new();
        let h = 0.02;
        let mut total = 0.0;
        for i in 0..1000 {
            for j in 0..1000 {
                let p = [-10.0 + (i as f64 + 0.5) * h, -10.0 + (j as f64 + 0.5) * h];
                total += m.unnormalized_density(&p);
            }
        }
        assert!((total * h * h - 0.5).abs() < 1e-6);
    }

    #[test]
    fn point_symmetric() {
        let m = MixtureGaussian5::new();
        for p in [[0.3, -1.7], [2.5, 2.5], [-4.0, 1.0], [10.0, -3.3]] {
            let (a, b) = (m.energy(&p), m.energy(&[-p[0], -p[1]]));
            assert!((a - b).abs() <= 8.0 * f64::EPSILON * a.abs().max(1.0), "{p:?}");
        }
    }

    proptest::proptest! {
        #[test]
        fn symmetric_under_negation(x in -12.0f64..12.0, y in -12.0f64..12.0) {
            let m = MixtureGaussian5::new();
            let (a, b) = (m.energy(&[x, y]), m.energy(&[-x, -y]));
            proptest::prop_assert!((a - b).abs() <= 8.0 * f64::EPSILON * a.abs().max(1.0));
        }
    }
}
