//! First-order measures of an optimal stimulus.

use crate::error::{Error, Result};
use crate::fft::fft2_real;
use crate::stimulus::{dot, Stimulus, StimulusSet};

/// Magnitude-spectrum non-sparsity `(‖F‖₁/‖F‖₂ − 1)/(√M − 1)` over the `M`
/// DFT bins: 0 for a single bin, 1 for a flat spectrum.
pub fn spectral_complexity(x_hat: &Stimulus) -> Result<f64> {
    let spectrum = fft2_real(x_hat.values(), x_hat.height(), x_hat.width());
    let l1: f64 = spectrum.iter().map(|c| c.norm()).sum();
    let l2: f64 = spectrum.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(l2 > 0.0) {
        return Err(Error::ZeroVector);
    }
    let m = spectrum.len() as f64;
    if spectrum.len() == 1 {
        return Ok(0.0);
    }
    Ok(((l1 / l2 - 1.0) / (m.sqrt() - 1.0)).clamp(0.0, 1.0))
}

/// Mean rectified inner product between the unit-normalized optimal stimulus
/// and unit-normalized task stimuli, over the `top_fraction` largest values.
pub fn explanation_power(x_hat: &Stimulus, task: &StimulusSet, top_fraction: f64) -> Result<f64> {
    if !(top_fraction > 0.0 && top_fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "top_fraction {top_fraction} outside (0, 1]"
        )));
    }
    if task.is_empty() {
        return Err(Error::EmptySet);
    }
    let u = x_hat.unit();
    let mut scores = Vec::with_capacity(task.len());
    for t in task.items() {
        t.check_shape(x_hat.shape())?;
        scores.push(dot(&u, &t.unit()).max(0.0));
    }
    scores.sort_by(|a, b| b.total_cmp(a));
    let k = ((top_fraction * scores.len() as f64).ceil() as usize).clamp(1, scores.len());
    Ok(scores[..k].iter().sum::<f64>() / k as f64)
}
