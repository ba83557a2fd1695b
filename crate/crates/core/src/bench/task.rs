//! Synthetic labeled task stimuli: oriented Gabor textures, one orientation
//! and carrier frequency per class, with per-item jitter.

use std::f64::consts::PI;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::seed_path;
use crate::stimulus::{average_energy, Stimulus, StimulusSet};
use crate::targets::Target;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaskSpec {
    pub n_classes: usize,
    pub samples_per_class: usize,
    pub height: usize,
    pub width: usize,
    /// Carrier frequencies (cycles/pixel) are drawn per class from this range.
    pub frequency_range: (f64, f64),
    /// Gaussian envelope width as a fraction of the shorter side.
    pub envelope: f64,
    /// Uniform jitter half-widths.
    pub orientation_jitter: f64,
    pub frequency_jitter: f64,
    pub phase_jitter: f64,
    pub position_jitter: f64,
    /// Additive white noise, relative to the clean pattern's RMS.
    pub noise: f64,
    /// Common energy of all items; `None` uses the raw items' average.
    pub energy: Option<f64>,
    pub seed: u64,
}

impl Default for TaskSpec {
    fn default() -> Self {
        Self {
            n_classes: 8,
            samples_per_class: 16,
            height: 21,
            width: 21,
            frequency_range: (0.08, 0.3),
            envelope: 0.3,
            orientation_jitter: 0.2,
            frequency_jitter: 0.15,
            phase_jitter: PI,
            position_jitter: 1.5,
            noise: 0.3,
            energy: None,
            seed: 0,
        }
    }
}

impl TaskSpec {
    pub fn for_shape(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            ..Self::default()
        }
    }

    pub fn without_jitter(mut self) -> Self {
        self.orientation_jitter = 0.0;
        self.frequency_jitter = 0.0;
        self.phase_jitter = 0.0;
        self.position_jitter = 0.0;
        self.noise = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        if self.n_classes < 2 {
            return bad("task needs at least 2 classes");
        }
        if self.samples_per_class == 0 || self.height == 0 || self.width == 0 {
            return bad("task sizes must be positive");
        }
        let (lo, hi) = self.frequency_range;
        if !(lo > 0.0 && lo <= hi && hi <= 0.5) {
            return bad("frequency range must lie in (0, 0.5]");
        }
        if !(self.envelope > 0.0) {
            return bad("envelope must be positive");
        }
        let jitters = [
            self.orientation_jitter,
            self.frequency_jitter,
            self.phase_jitter,
            self.position_jitter,
            self.noise,
        ];
        if jitters.iter().any(|j| !(*j >= 0.0) || !j.is_finite()) {
            return bad("jitter widths must be finite and non-negative");
        }
        if matches!(self.energy, Some(e) if !(e > 0.0 && e.is_finite())) {
            return bad("energy must be positive");
        }
        Ok(())
    }

    /// Errors unless the patches fit `target`'s input.
    pub fn check_target(&self, target: &dyn Target) -> Result<()> {
        if target.input_shape() != (self.height, self.width) {
            return Err(Error::ShapeMismatch {
                expected: target.input_shape(),
                actual: (self.height, self.width),
            });
        }
        Ok(())
    }
}

fn jitter(rng: &mut crate::rng::Rng, half_width: f64) -> f64 {
    if half_width > 0.0 {
        rng.random_range(-half_width..=half_width)
    } else {
        0.0
    }
}

/// Labeled stimuli, mean-free and rescaled to a common energy.
pub fn generate_task_stimuli(spec: &TaskSpec) -> Result<StimulusSet> {
    spec.validate()?;
    let (h, w) = (spec.height, spec.width);
    let sigma = spec.envelope * h.min(w) as f64;
    let (cy, cx) = ((h as f64 - 1.0) / 2.0, (w as f64 - 1.0) / 2.0);
    let mut raw = Vec::with_capacity(spec.n_classes * spec.samples_per_class);
    let mut labels = Vec::with_capacity(raw.capacity());
    for class in 0..spec.n_classes {
        let mut rng = rng_from_seed(seed_path!(spec.seed, "class", class));
        let (lo, hi) = spec.frequency_range;
        let frequency = if lo < hi { rng.random_range(lo..hi) } else { lo };
        let orientation = PI * class as f64 / spec.n_classes as f64;
        let phase = rng.random_range(0.0..2.0 * PI);
        for item in 0..spec.samples_per_class {
            let mut rng = rng_from_seed(seed_path!(spec.seed, "class", class, "item", item));
            let theta = orientation + jitter(&mut rng, spec.orientation_jitter);
            let f = frequency * (1.0 + jitter(&mut rng, spec.frequency_jitter));
            let phi = phase + jitter(&mut rng, spec.phase_jitter);
            let dy = jitter(&mut rng, spec.position_jitter);
            let dx = jitter(&mut rng, spec.position_jitter);
            let (s, c) = theta.sin_cos();
            let mut v: Vec<f64> = (0..h * w)
                .map(|i| {
                    let y = (i / w) as f64 - cy - dy;
                    let x = (i % w) as f64 - cx - dx;
                    let env = (-(x * x + y * y) / (2.0 * sigma * sigma)).exp();
                    env * (2.0 * PI * f * (x * c + y * s) + phi).cos()
                })
                .collect();
            if spec.noise > 0.0 {
                let rms = (v.iter().map(|a| a * a).sum::<f64>() / v.len() as f64).sqrt();
                for a in v.iter_mut() {
                    *a += spec.noise * rms * rng.sample::<f64, _>(StandardNormal);
                }
            }
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            v.iter_mut().for_each(|a| *a -= mean);
            raw.push(Stimulus::new(v, h, w)?);
            labels.push(class);
        }
    }
    let energy = match spec.energy {
        Some(e) => e,
        None => average_energy(&StimulusSet::new(raw.clone())?)?,
    };
    let items = raw
        .iter()
        .map(|x| x.with_energy(energy))
        .collect::<Result<Vec<_>>>()?;
    StimulusSet::labeled(items, labels)
}
