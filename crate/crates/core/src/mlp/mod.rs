//! Bayesian multilayer perceptron classifier.

mod net;
mod prior;

pub use net::{Layer, Mlp};
pub use prior::{mixture_prior_loggrad, sparsity_ratio, sparsity_threshold, MixturePrior, Prior};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::models::EnergyModel;
use crate::param::ParamVector;
use crate::rng::RngStream;

/// Labelled rows, features stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<f64>,
    pub labels: Vec<usize>,
    pub n_features: usize,
    pub n_classes: usize,
}

impl Dataset {
    pub fn new(features: Vec<f64>, labels: Vec<usize>, n_features: usize, n_classes: usize) -> Result<Self> {
        if n_features == 0 || features.len() != labels.len() * n_features {
            return config(format!(
                "{} feature values do not form {} rows of {n_features}",
                features.len(),
                labels.len()
            ));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= n_classes) {
            return config(format!("label {bad} out of range for {n_classes} classes"));
        }
        Ok(Self {
            features,
            labels,
            n_features,
            n_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }
}

/// Switches the prior once the chain reaches a given epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSwitch {
    pub epoch: u64,
    pub prior: Prior,
}

/// Posterior energy of an [`Mlp`] on a training set:
/// `U(θ) = Σ_i −log p(y_i | x_i, θ) − log π(θ)`.
#[derive(Debug, Clone)]
pub struct MlpModel {
    net: Mlp,
    data: Arc<Dataset>,
    batch: usize,
    prior: Prior,
    switch: Option<PriorSwitch>,
}

impl MlpModel {
    pub fn new(net: Mlp, data: Arc<Dataset>, batch: usize, prior: Prior) -> Result<Self> {
        if data.n_features != net.inputs() {
            return Err(Error::Dimension {
                expected: net.inputs(),
                got: data.n_features,
            });
        }
        if data.n_classes > net.classes() {
            return config(format!(
                "dataset has {} classes but the network outputs {}",
                data.n_classes,
                net.classes()
            ));
        }
        if batch == 0 || batch > data.len() {
            return config(format!("minibatch size {batch} must lie in 1..={}", data.len()));
        }
        prior.validate()?;
        Ok(Self {
            net,
            data,
            batch,
            prior,
            switch: None,
        })
    }

    pub fn with_prior_switch(mut self, switch: PriorSwitch) -> Result<Self> {
        switch.prior.validate()?;
        self.switch = Some(switch);
        Ok(self)
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn prior_at(&self, epoch: u64) -> &Prior {
        match &self.switch {
            Some(s) if epoch >= s.epoch => &s.prior,
            _ => &self.prior,
        }
    }

    /// Sum of per-row NLL gradients over `rows`, and the summed loss.
    pub fn nll_grad(&self, theta: &[f64], rows: &[usize]) -> Result<(f64, ParamVector)> {
        if theta.len() != self.net.dim() {
            return Err(Error::Dimension {
                expected: self.net.dim(),
                got: theta.len(),
            });
        }
        let mut g = ParamVector::zeros(self.net.dim());
        let mut loss = 0.0;
        for &i in rows {
            loss += self.net.accumulate_nll_grad(theta, self.data.row(i), self.data.labels[i], &mut g);
        }
        Ok((loss, g))
    }

    /// `(N/|rows|) Σ_rows ∇(−log f) − ∇log π` for an explicit minibatch.
    pub fn batch_grad(&self, theta: &[f64], rows: &[usize], epoch: u64) -> Result<ParamVector> {
        if rows.is_empty() {
            return config("minibatch must not be empty");
        }
        let (_, mut g) = self.nll_grad(theta, rows)?;
        let scale = self.data.len() as f64 / rows.len() as f64;
        for v in g.iter_mut() {
            *v *= scale;
        }
        self.prior_at(epoch).add_grad(theta, &mut g);
        Ok(g)
    }

    fn full_energy(&self, theta: &[f64], prior: &Prior) -> f64 {
        let nll: f64 = (0..self.data.len())
            .map(|i| self.net.nll(theta, self.data.row(i), self.data.labels[i]))
            .sum();
        nll + prior.energy(theta)
    }

    fn draw_rows(&self, rng: &mut RngStream) -> Vec<usize> {
        rng.sample_indices(self.data.len(), self.batch)
    }
}

impl EnergyModel for MlpModel {
    fn dim(&self) -> usize {
        self.net.dim()
    }

    fn energy(&self, theta: &[f64]) -> f64 {
        self.full_energy(theta, &self.prior)
    }

    fn grad(&self, theta: &[f64]) -> ParamVector {
        let all: Vec<usize> = (0..self.data.len()).collect();
        self.batch_grad(theta, &all, 0).expect("dimension checked by caller")
    }

    fn stoch_grad(&self, theta: &[f64], rng: &mut RngStream) -> ParamVector {
        self.stoch_grad_at(theta, 0, rng)
    }

    fn stoch_grad_at(&self, theta: &[f64], epoch: u64, rng: &mut RngStream) -> ParamVector {
        let rows = self.draw_rows(rng);
        self.batch_grad(theta, &rows, epoch).expect("dimension checked by caller")
    }

    fn energy_at(&self, theta: &[f64], epoch: u64) -> f64 {
        self.full_energy(theta, self.prior_at(epoch))
    }

    fn stoch_loss_grad(&self, theta: &[f64], rng: &mut RngStream) -> ParamVector {
        let rows = self.draw_rows(rng);
        let (_, mut g) = self.nll_grad(theta, &rows).expect("dimension checked by caller");
        let n = rows.len() as f64;
        for v in g.iter_mut() {
            *v /= n;
        }
        g
    }

    fn iterations_per_epoch(&self) -> u64 {
        self.data.len().div_ceil(self.batch) as u64
    }
}

fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in p.iter().enumerate() {
        if *v > p[best] {
            best = i;
        }
    }
    best
}

/// Percentage of rows whose most probable class is the label.
pub fn accuracy(net: &Mlp, theta: &[f64], data: &Dataset) -> Result<f64> {
    accuracy_averaged(net, std::slice::from_ref(&ParamVector::from(theta)), data)
}

/// Accuracy of the model average: class probabilities are averaged over
/// `samples` before the argmax.
pub fn accuracy_averaged(net: &Mlp, samples: &[ParamVector], data: &Dataset) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyTrace);
    }
    if data.is_empty() {
        return config("cannot score an empty dataset");
    }
    let mut avg = vec![0.0; data.len() * net.classes()];
    for theta in samples {
        let probs = net.predict(theta, &data.features)?;
        for (a, p) in avg.chunks_mut(net.classes()).zip(probs) {
            for (ai, pi) in a.iter_mut().zip(p) {
                *ai += pi;
            }
        }
    }
    let correct = avg
        .chunks(net.classes())
        .zip(&data.labels)
        .filter(|(p, &l)| argmax(p) == l)
        .count();
    Ok(100.0 * correct as f64 / data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::finite_difference_grad;

    fn toy(n: usize, seed: u64) -> Arc<Dataset> {
        let mut rng = RngStream::new(seed, 7);
        let features: Vec<f64> = (0..n * 6).map(|_| rng.normal()).collect();
        let labels = (0..n).map(|i| i % 3).collect();
        Arc::new(Dataset::new(features, labels, 6, 3).unwrap())
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
        num / den.max(1e-12)
    }

    #[test]
    fn backprop_matches_finite_differences() {
        let net = Mlp::new(&[6, 5, 3]).unwrap();
        for prior in [Prior::standard_normal(), Prior::Mixture(MixturePrior::SPARSE_DEFAULT)] {
            let model = MlpModel::new(net.clone(), toy(8, 1), 4, prior).unwrap();
            let mut rng = RngStream::new(2, 0);
            for _ in 0..20 {
                let theta: ParamVector = (0..net.dim()).map(|_| rng.normal()).collect::<Vec<_>>().into();
                let g = model.grad(&theta);
                let fd = finite_difference_grad(&model, &theta, 1e-6);
                assert!(rel_err(&g, &fd) < 1e-5, "{prior:?}: {}", rel_err(&g, &fd));
            }
        }
    }

    #[test]
    fn gaussian_prior_term_is_theta() {
        let net = Mlp::new(&[6, 3]).unwrap();
        let model = MlpModel::new(net.clone(), toy(4, 3), 2, Prior::standard_normal()).unwrap();
        let theta: ParamVector = (0..net.dim()).map(|i| i as f64 * 0.01).collect::<Vec<_>>().into();
        let (_, nll) = model.nll_grad(&theta, &[0, 1, 2, 3]).unwrap();
        let full = model.grad(&theta);
        for i in 0..net.dim() {
            assert!((full[i] - nll[i] - theta[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn prior_switch_changes_energy() {
        let net = Mlp::new(&[6, 3]).unwrap();
        let model = MlpModel::new(net.clone(), toy(4, 3), 2, Prior::standard_normal())
            .unwrap()
            .with_prior_switch(PriorSwitch {
                epoch: 5,
                prior: Prior::Mixture(MixturePrior::SPARSE_DEFAULT),
            })
            .unwrap();
        let theta = ParamVector::from(vec![0.1; net.dim()]);
        assert_eq!(model.energy_at(&theta, 4), model.energy(&theta));
        assert_ne!(model.energy_at(&theta, 5), model.energy(&theta));
    }

    #[test]
    fn averaging_identical_samples_is_plain_accuracy() {
        let net = Mlp::new(&[6, 4, 3]).unwrap();
        let data = toy(30, 4);
        let theta = net.init(&mut RngStream::new(5, 0));
        let single = accuracy(&net, &theta, &data).unwrap();
        let many = accuracy_averaged(&net, &vec![theta.clone(); 7], &data).unwrap();
        assert_eq!(single, many);
        assert!(accuracy_averaged(&net, &[], &data).is_err());
    }

    #[test]
    fn separable_set_is_learned() {
        // Label = sign of the first feature; SGD on the averaged loss fits it.
        let mut rng = RngStream::new(8, 0);
        let n = 200;
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n {
            let x = [rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)];
            labels.push(usize::from(x[0] > 0.0));
            features.extend_from_slice(&x);
        }
        let data = Arc::new(Dataset::new(features, labels, 2, 2).unwrap());
        let net = Mlp::new(&[2, 8, 2]).unwrap();
        let model = MlpModel::new(net.clone(), data.clone(), 20, Prior::standard_normal()).unwrap();
        let mut theta = net.init(&mut RngStream::new(1, 0));
        for _ in 0..3000 {
            let g = model.stoch_loss_grad(&theta, &mut rng);
            for (t, gi) in theta.iter_mut().zip(g.iter()) {
                *t -= 0.5 * gi;
            }
        }
        assert!(accuracy(&net, &theta, &data).unwrap() >= 97.0);
    }

    #[test]
    fn rejects_mismatched_data() {
        let net = Mlp::new(&[5, 3]).unwrap();
        assert!(MlpModel::new(net, toy(4, 1), 2, Prior::standard_normal()).is_err());
        let net = Mlp::new(&[6, 3]).unwrap();
        assert!(MlpModel::new(net.clone(), toy(4, 1), 0, Prior::standard_normal()).is_err());
        assert!(MlpModel::new(net, toy(4, 1), 5, Prior::standard_normal()).is_err());
        assert!(Dataset::new(vec![0.0; 5], vec![0, 1], 2, 2).is_err());
        assert!(Dataset::new(vec![0.0; 4], vec![0, 2], 2, 2).is_err());
    }
}
