use crate::error::{config, Error, Result};
use crate::param::ParamVector;
use crate::rng::RngStream;

/// Fully connected ReLU network with a softmax output.
///
/// Parameters are stored layer by layer: the weight matrix (row-major,
/// `out × in`) followed by the bias vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mlp {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

/// Weights and biases of one affine layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Mlp {
    pub fn new(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 {
            return config("a network needs at least an input and an output layer");
        }
        if sizes.contains(&0) {
            return config("layer sizes must be positive");
        }
        let mut offsets = vec![0];
        for w in sizes.windows(2) {
            let last = *offsets.last().unwrap();
            offsets.push(last + w[0] * w[1] + w[1]);
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            offsets,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn inputs(&self) -> usize {
        self.sizes[0]
    }

    pub fn classes(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    fn layers(&self) -> usize {
        self.sizes.len() - 1
    }

    /// `(weights, biases)` slices of layer `k`.
    fn split<'a>(&self, theta: &'a [f64], k: usize) -> (&'a [f64], &'a [f64]) {
        let (fan_in, fan_out) = (self.sizes[k], self.sizes[k + 1]);
        let start = self.offsets[k];
        let w_end = start + fan_in * fan_out;
        (&theta[start..w_end], &theta[w_end..self.offsets[k + 1]])
    }

    pub fn unflatten(&self, theta: &[f64]) -> Result<Vec<Layer>> {
        self.check_dim(theta)?;
        Ok((0..self.layers())
            .map(|k| {
                let (w, b) = self.split(theta, k);
                Layer {
                    weights: w.to_vec(),
                    biases: b.to_vec(),
                }
            })
            .collect())
    }

    pub fn flatten(&self, layers: &[Layer]) -> Result<ParamVector> {
        if layers.len() != self.layers() {
            return config(format!("expected {} layers, got {}", self.layers(), layers.len()));
        }
        let mut out = Vec::with_capacity(self.dim());
        for (k, l) in layers.iter().enumerate() {
            let (fan_in, fan_out) = (self.sizes[k], self.sizes[k + 1]);
            if l.weights.len() != fan_in * fan_out || l.biases.len() != fan_out {
                return config(format!("layer {k} has the wrong shape"));
            }
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        Ok(out.into())
    }

    /// He-uniform weights, `U(±√(6/fan_in))`, and zero biases.
    pub fn init(&self, rng: &mut RngStream) -> ParamVector {
        let mut theta = ParamVector::zeros(self.dim());
        for k in 0..self.layers() {
            let (fan_in, fan_out) = (self.sizes[k], self.sizes[k + 1]);
            let bound = (6.0 / fan_in as f64).sqrt();
            let start = self.offsets[k];
            for w in &mut theta[start..start + fan_in * fan_out] {
                *w = rng.uniform(-bound, bound);
            }
        }
        theta
    }

    fn check_dim(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: theta.len(),
            });
        }
        Ok(())
    }

    /// Output logits for one input row.
    pub fn logits(&self, theta: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(theta)?;
        if x.len() != self.inputs() {
            return Err(Error::Dimension {
                expected: self.inputs(),
                got: x.len(),
            });
        }
        let mut act = x.to_vec();
        for k in 0..self.layers() {
            let z = self.affine(theta, k, &act);
            act = if k + 1 < self.layers() { relu(z) } else { z };
        }
        Ok(act)
    }

    /// Class probabilities for every row of `x` (row-major, `rows × inputs`).
    pub fn predict(&self, theta: &[f64], x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let p = self.inputs();
        if x.len() % p != 0 {
            return config(format!("feature buffer length {} is not a multiple of {p}", x.len()));
        }
        x.chunks(p).map(|row| self.logits(theta, row).map(softmax)).collect()
    }

    fn affine(&self, theta: &[f64], k: usize, input: &[f64]) -> Vec<f64> {
        let (w, b) = self.split(theta, k);
        let fan_in = self.sizes[k];
        b.iter()
            .enumerate()
            .map(|(j, bj)| bj + dot(&w[j * fan_in..(j + 1) * fan_in], input))
            .collect()
    }

    /// Adds `∇_θ [−log p(label | x, θ)]` into `grad` and returns the loss.
    /// Derivative of ReLU at 0 is taken as 0.
    pub(crate) fn accumulate_nll_grad(&self, theta: &[f64], x: &[f64], label: usize, grad: &mut [f64]) -> f64 {
        let n_layers = self.layers();
        // acts[k] is the input to layer k; acts[n_layers] holds the logits.
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(n_layers + 1);
        acts.push(x.to_vec());
        for k in 0..n_layers {
            let z = self.affine(theta, k, &acts[k]);
            acts.push(if k + 1 < n_layers { relu(z) } else { z });
        }
        let logits = &acts[n_layers];
        let lse = log_sum_exp(logits);
        let loss = lse - logits[label];
        let mut delta: Vec<f64> = logits.iter().map(|z| (z - lse).exp()).collect();
        delta[label] -= 1.0;

        for k in (0..n_layers).rev() {
            let (fan_in, fan_out) = (self.sizes[k], self.sizes[k + 1]);
            let input = &acts[k];
            let start = self.offsets[k];
            let w_end = start + fan_in * fan_out;
            {
                let (gw, gb) = grad[start..self.offsets[k + 1]].split_at_mut(fan_in * fan_out);
                for j in 0..fan_out {
                    let d = delta[j];
                    gb[j] += d;
                    if d != 0.0 {
                        for (g, a) in gw[j * fan_in..(j + 1) * fan_in].iter_mut().zip(input) {
                            *g += d * a;
                        }
                    }
                }
            }
            if k > 0 {
                let w = &theta[start..w_end];
                let mut back = vec![0.0; fan_in];
                for j in 0..fan_out {
                    let d = delta[j];
                    if d != 0.0 {
                        for (bi, wji) in back.iter_mut().zip(&w[j * fan_in..(j + 1) * fan_in]) {
                            *bi += d * wji;
                        }
                    }
                }
                for (bi, a) in back.iter_mut().zip(input) {
                    if *a <= 0.0 {
                        *bi = 0.0;
                    }
                }
                delta = back;
            }
        }
        loss
    }

    /// Negative log-likelihood of one labelled row.
    pub(crate) fn nll(&self, theta: &[f64], x: &[f64], label: usize) -> f64 {
        let mut act = x.to_vec();
        for k in 0..self.layers() {
            let z = self.affine(theta, k, &act);
            act = if k + 1 < self.layers() { relu(z) } else { z };
        }
        log_sum_exp(&act) - act[label]
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn relu(mut z: Vec<f64>) -> Vec<f64> {
    for v in &mut z {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    z
}

pub(crate) fn log_sum_exp(z: &[f64]) -> f64 {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub(crate) fn softmax(z: Vec<f64>) -> Vec<f64> {
    let lse = log_sum_exp(&z);
    z.into_iter().map(|v| (v - lse).exp()).collect()
}
