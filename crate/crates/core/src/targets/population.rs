//! Random network populations with recorded hyperparameter draws.

use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::sthor::{SthorNetwork, SthorSpec};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::seed_path;

/// Ranges the population sampler draws from. Discrete sets are sampled
/// uniformly; `(lo, hi)` pairs uniformly on the interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperRanges {
    /// Filter counts for every level except the top one, which keeps
    /// `top_layer_neurons`.
    pub n_filters: Vec<usize>,
    pub pool_exponent: Vec<f64>,
    pub pool_size: Vec<usize>,
    pub norm_strength: (f64, f64),
    pub norm_threshold: (f64, f64),
}

impl Default for HyperRanges {
    fn default() -> Self {
        Self {
            n_filters: vec![8, 16, 32],
            pool_exponent: vec![1.0, 2.0, 10.0],
            pool_size: vec![3, 5],
            norm_strength: (0.5, 2.0),
            norm_threshold: (0.01, 0.1),
        }
    }
}

impl HyperRanges {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        if self.n_filters.is_empty() || self.pool_exponent.is_empty() || self.pool_size.is_empty()
        {
            return bad("hyperparameter ranges must be non-empty");
        }
        if self.n_filters.contains(&0) || self.pool_size.contains(&0) {
            return bad("filter counts and pool sizes must be positive");
        }
        if self.pool_exponent.iter().any(|p| !(*p > 0.0)) {
            return bad("pool exponents must be positive");
        }
        for (name, (lo, hi)) in [
            ("norm_strength", self.norm_strength),
            ("norm_threshold", self.norm_threshold),
        ] {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidSpec(format!("{name}: empty range")));
            }
        }
        if !(self.norm_threshold.0 > 0.0) || self.norm_strength.0 < 0.0 {
            return bad("normalization threshold must be positive, strength non-negative");
        }
        Ok(())
    }
}

/// Hyperparameters drawn for one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkManifest {
    pub index: usize,
    pub spec: SthorSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationManifest {
    pub seed: u64,
    pub base_spec: SthorSpec,
    pub ranges: HyperRanges,
    pub networks: Vec<NetworkManifest>,
}

impl PopulationManifest {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Rebuilds the networks; weights follow from each spec's seed.
    pub fn build(&self) -> Result<Population> {
        let networks = self
            .networks
            .iter()
            .map(|m| SthorNetwork::new(m.spec.clone()).map(Arc::new))
            .collect::<Result<Vec<_>>>()?;
        Ok(Population {
            networks,
            manifest: self.clone(),
        })
    }
}

pub type PopulationEntry = Arc<SthorNetwork>;

#[derive(Debug, Clone)]
pub struct Population {
    pub networks: Vec<PopulationEntry>,
    pub manifest: PopulationManifest,
}

/// Picks odd kernel sizes (≥ 3) so the composed receptive field equals
/// `spec.input_size`, spreading the budget evenly with the larger kernels
/// in the early levels.
fn close_geometry(spec: &mut SthorSpec) -> Result<()> {
    for level in spec.levels.iter_mut() {
        level.kernel_size = 1;
    }
    let minimal = spec.receptive_field();
    let levels = spec.levels.len();
    let need = spec.input_size as isize - minimal as isize;
    // each level needs at least 2 (kernel 3); increments come in steps of 2
    if need < 2 * levels as isize || need % 2 != 0 {
        return Err(Error::InvalidSpec(format!(
            "no odd kernel sizes close input size {} (pooling and normalization consume {})",
            spec.input_size, minimal
        )));
    }
    let steps = (need / 2) as usize;
    for (i, level) in spec.levels.iter_mut().enumerate() {
        let share = steps / levels + usize::from(i < steps % levels);
        level.kernel_size = 1 + 2 * share;
    }
    Ok(())
}

/// Draws `n_networks` variants of `base_spec`. Each variant redraws the
/// intermediate filter counts, pool sizes and exponents, normalization
/// constants and weight seed, then re-derives kernel sizes so the receptive
/// field still matches `base_spec.input_size`.
pub fn sample_network_population(
    base_spec: &SthorSpec,
    n_networks: usize,
    ranges: &HyperRanges,
    seed: u64,
) -> Result<Population> {
    if n_networks == 0 {
        return Err(Error::TooFew {
            required: 1,
            actual: 0,
        });
    }
    ranges.validate()?;
    base_spec.validate()?;
    let mut entries = Vec::with_capacity(n_networks);
    for index in 0..n_networks {
        let mut rng = rng_from_seed(seed_path!(seed, "network", index));
        let mut spec = base_spec.clone();
        let top = spec.levels.len() - 1;
        for (i, level) in spec.levels.iter_mut().enumerate() {
            if i < top {
                level.n_filters = *ranges.n_filters.choose(&mut rng).expect("non-empty");
            }
            level.pool.size = *ranges.pool_size.choose(&mut rng).expect("non-empty");
            level.pool.exponent = *ranges.pool_exponent.choose(&mut rng).expect("non-empty");
            let (lo, hi) = ranges.norm_strength;
            level.normalization.strength = if lo < hi { rng.random_range(lo..hi) } else { lo };
            let (lo, hi) = ranges.norm_threshold;
            level.normalization.threshold = if lo < hi { rng.random_range(lo..hi) } else { lo };
        }
        spec.weight_seed = rng.random();
        close_geometry(&mut spec)?;
        entries.push(NetworkManifest { index, spec });
    }
    PopulationManifest {
        seed,
        base_spec: base_spec.clone(),
        ranges: ranges.clone(),
        networks: entries,
    }
    .build()
}
