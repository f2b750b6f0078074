use crate::error::{config, Result};
use crate::param::ParamVector;
use crate::rng::RngStream;

/// Draws a `dim`-vector of independent `N(0, 2 * lr * temperature)` entries.
///
/// Zero temperature returns the zero vector and consumes no randomness.
pub fn gaussian_step_noise(
    dim: usize,
    lr: f64,
    temperature: f64,
    rng: &mut RngStream,
) -> Result<ParamVector> {
    if dim == 0 {
        return config("noise dimension must be positive");
    }
    if !(lr > 0.0) {
        return config(format!("learning rate must be positive, got {lr}"));
    }
    if !(temperature >= 0.0) {
        return config(format!("temperature must be non-negative, got {temperature}"));
    }
    let mut out = ParamVector::zeros(dim);
    if temperature > 0.0 {
        let scale = (2.0 * lr * temperature).sqrt();
        rng.fill_normal(&mut out);
        out.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(out)
}
