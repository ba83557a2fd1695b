//! Randomly weighted convolutional cascades.
//!
//! One level is valid-mode convolution → activation → p-norm pooling →
//! divisive normalization. Feature maps are stored channel-last
//! (`[y][x][c]`). The top layer reads the spatially central unit of every
//! channel of the last level.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Target;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::seed_path;

pub const WEIGHTS_MAGIC: [u8; 4] = *b"STHW";
pub const WEIGHTS_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Halfwave,
    Clipped { lo: f64, hi: f64 },
}

impl Activation {
    fn apply(&self, v: f64) -> f64 {
        match *self {
            Activation::Identity => v,
            Activation::Halfwave => v.max(0.0),
            Activation::Clipped { lo, hi } => v.clamp(lo, hi),
        }
    }
}

/// `(Σ |v|^p)^(1/p)` over `size × size` windows. Size 1 passes values through.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoolSpec {
    pub size: usize,
    pub stride: usize,
    pub exponent: f64,
}

/// `v / (threshold + strength · ‖local‖)`, where the local energy spans a
/// `(2·radius + 1)²` window over all channels (valid mode).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub enabled: bool,
    pub radius: usize,
    pub strength: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSpec {
    pub kernel_size: usize,
    pub n_filters: usize,
    pub activation: Activation,
    pub pool: PoolSpec,
    pub normalization: NormSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SthorSpec {
    /// Side of the square input; must equal the composed receptive field.
    pub input_size: usize,
    pub top_layer_neurons: usize,
    pub weight_seed: u64,
    pub levels: Vec<LevelSpec>,
}

const DEFAULT_NORM: NormSpec = NormSpec {
    enabled: true,
    radius: 1,
    strength: 1.0,
    threshold: 0.1,
};

impl SthorSpec {
    /// One level, 11×11 receptive field, 32 outputs.
    pub fn default_l1() -> Self {
        Self {
            input_size: 11,
            top_layer_neurons: 32,
            weight_seed: 0,
            levels: vec![LevelSpec {
                kernel_size: 7,
                n_filters: 32,
                activation: Activation::Halfwave,
                pool: PoolSpec {
                    size: 3,
                    stride: 1,
                    exponent: 2.0,
                },
                normalization: DEFAULT_NORM,
            }],
        }
    }

    /// Two levels, 21×21 receptive field, 32 outputs.
    pub fn default_l2() -> Self {
        let first = LevelSpec {
            kernel_size: 7,
            n_filters: 16,
            activation: Activation::Halfwave,
            pool: PoolSpec {
                size: 3,
                stride: 1,
                exponent: 2.0,
            },
            normalization: DEFAULT_NORM,
        };
        let second = LevelSpec {
            n_filters: 32,
            ..first.clone()
        };
        Self {
            input_size: 21,
            top_layer_neurons: 32,
            weight_seed: 0,
            levels: vec![first, second],
        }
    }

    pub fn default_for_levels(levels: usize) -> Result<Self> {
        match levels {
            1 => Ok(Self::default_l1()),
            2 => Ok(Self::default_l2()),
            n => Err(Error::InvalidSpec(format!("no default for {n} levels"))),
        }
    }

    /// Receptive field (side length) of one top-layer unit.
    pub fn receptive_field(&self) -> usize {
        let mut size = 1;
        for level in self.levels.iter().rev() {
            if level.normalization.enabled {
                size += 2 * level.normalization.radius;
            }
            size = (size - 1) * level.pool.stride + level.pool.size;
            size += level.kernel_size - 1;
        }
        size
    }

    /// Spatial side of each level's output map.
    fn map_sizes(&self) -> Result<Vec<usize>> {
        let infeasible = |m: String| Err(Error::InvalidSpec(m));
        let mut size = self.input_size;
        let mut sizes = Vec::with_capacity(self.levels.len());
        for (i, level) in self.levels.iter().enumerate() {
            if size < level.kernel_size {
                return infeasible(format!("level {i}: kernel larger than input map"));
            }
            size = size - level.kernel_size + 1;
            if size < level.pool.size || (size - level.pool.size) % level.pool.stride != 0 {
                return infeasible(format!("level {i}: pooling does not tile the map"));
            }
            size = (size - level.pool.size) / level.pool.stride + 1;
            if level.normalization.enabled {
                let win = 2 * level.normalization.radius + 1;
                if size < win {
                    return infeasible(format!("level {i}: normalization window too large"));
                }
                size -= win - 1;
            }
            sizes.push(size);
        }
        Ok(sizes)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.levels.is_empty() {
            return bad("at least one level required".into());
        }
        for (i, l) in self.levels.iter().enumerate() {
            if l.kernel_size == 0 || l.kernel_size % 2 == 0 {
                return bad(format!("level {i}: kernel size must be odd"));
            }
            if l.n_filters == 0 {
                return bad(format!("level {i}: n_filters must be positive"));
            }
            if l.pool.size == 0 || l.pool.stride == 0 || !(l.pool.exponent > 0.0) {
                return bad(format!("level {i}: invalid pooling"));
            }
            let n = l.normalization;
            if n.enabled && (!(n.strength >= 0.0) || !(n.threshold > 0.0)) {
                return bad(format!("level {i}: normalization needs strength ≥ 0, threshold > 0"));
            }
            if let Activation::Clipped { lo, hi } = l.activation {
                if !(lo < hi) {
                    return bad(format!("level {i}: clip range empty"));
                }
            }
        }
        let last = self.levels.last().expect("non-empty");
        if last.n_filters != self.top_layer_neurons {
            return bad(format!(
                "top level has {} filters but top_layer_neurons = {}",
                last.n_filters, self.top_layer_neurons
            ));
        }
        let rf = self.receptive_field();
        if rf != self.input_size {
            return bad(format!(
                "receptive field {rf} does not match input size {}",
                self.input_size
            ));
        }
        self.map_sizes().map(|_| ())
    }

    fn in_channels(&self, level: usize) -> usize {
        if level == 0 {
            1
        } else {
            self.levels[level - 1].n_filters
        }
    }

    fn kernel_len(&self, level: usize) -> usize {
        let k = self.levels[level].kernel_size;
        k * k * self.in_channels(level)
    }
}

/// Immutable network: spec plus per-level kernel banks. Each bank is
/// `n_filters` rows of `kernel_size² · in_channels` weights in
/// `(ky, kx, c)` order.
#[derive(Debug, Clone)]
pub struct SthorNetwork {
    spec: SthorSpec,
    kernels: Vec<DMatrix<f64>>,
    sizes: Vec<usize>,
}

impl SthorNetwork {
    /// Draws zero-mean, unit-norm Gaussian kernels from `spec.weight_seed`.
    pub fn new(spec: SthorSpec) -> Result<Self> {
        spec.validate()?;
        let mut banks = Vec::with_capacity(spec.levels.len());
        for (i, level) in spec.levels.iter().enumerate() {
            let len = spec.kernel_len(i);
            if len < 2 {
                return Err(Error::InvalidSpec(format!(
                    "level {i}: a single-weight kernel cannot be zero-mean and unit-norm"
                )));
            }
            let mut rng = rng_from_seed(seed_path!(spec.weight_seed, "level", i));
            let mut bank = Vec::with_capacity(level.n_filters * len);
            for _ in 0..level.n_filters {
                let mut w: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
                let mean = w.iter().sum::<f64>() / len as f64;
                w.iter_mut().for_each(|v| *v -= mean);
                let n = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                w.iter_mut().for_each(|v| *v /= n);
                bank.extend(w);
            }
            banks.push(bank);
        }
        Self::with_weights(spec, banks)
    }

    /// Uses explicit kernel banks (one flat vector per level).
    pub fn with_weights(spec: SthorSpec, banks: Vec<Vec<f64>>) -> Result<Self> {
        spec.validate()?;
        if banks.len() != spec.levels.len() {
            return Err(Error::DimensionMismatch {
                expected: spec.levels.len(),
                actual: banks.len(),
            });
        }
        let mut kernels = Vec::with_capacity(banks.len());
        for (i, bank) in banks.into_iter().enumerate() {
            let rows = spec.levels[i].n_filters;
            let cols = spec.kernel_len(i);
            if bank.len() != rows * cols {
                return Err(Error::DimensionMismatch {
                    expected: rows * cols,
                    actual: bank.len(),
                });
            }
            if bank.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
            kernels.push(DMatrix::from_row_slice(rows, cols, &bank));
        }
        let sizes = spec.map_sizes()?;
        Ok(Self {
            spec,
            kernels,
            sizes,
        })
    }

    pub fn spec(&self) -> &SthorSpec {
        &self.spec
    }

    /// Kernel banks as flat row-major vectors.
    pub fn weights(&self) -> Vec<Vec<f64>> {
        self.kernels
            .iter()
            .map(|k| {
                let mut flat = Vec::with_capacity(k.len());
                for r in 0..k.nrows() {
                    flat.extend(k.row(r).iter());
                }
                flat
            })
            .collect()
    }

    /// Full output map of the last level (`side × side × channels`).
    pub fn forward(&self, values: &[f64]) -> (usize, Vec<f64>) {
        let mut size = self.spec.input_size;
        let mut channels = 1;
        let mut map = values.to_vec();
        for (i, level) in self.spec.levels.iter().enumerate() {
            let (s, m) = convolve(&map, size, channels, level.kernel_size, &self.kernels[i]);
            size = s;
            channels = level.n_filters;
            map = m;
            if level.activation != Activation::Identity {
                map.iter_mut().for_each(|v| *v = level.activation.apply(*v));
            }
            if level.pool.size > 1 || level.pool.stride > 1 {
                let (s, m) = pool(&map, size, channels, &level.pool);
                size = s;
                map = m;
            }
            if level.normalization.enabled {
                let (s, m) = normalize(&map, size, channels, &level.normalization);
                size = s;
                map = m;
            }
            debug_assert_eq!(size, self.sizes[i]);
        }
        (size, map)
    }
}

fn convolve(
    input: &[f64],
    size: usize,
    channels: usize,
    k: usize,
    kernels: &DMatrix<f64>,
) -> (usize, Vec<f64>) {
    let out = size - k + 1;
    let patch = k * k * channels;
    let mut cols = Vec::with_capacity(patch * out * out);
    for y in 0..out {
        for x in 0..out {
            for ky in 0..k {
                let start = ((y + ky) * size + x) * channels;
                cols.extend_from_slice(&input[start..start + k * channels]);
            }
        }
    }
    let patches = DMatrix::from_vec(patch, out * out, cols);
    // column-major (filters × positions) is exactly channel-last order
    let result = kernels * patches;
    (out, result.data.into())
}

fn pool(input: &[f64], size: usize, channels: usize, spec: &PoolSpec) -> (usize, Vec<f64>) {
    let out = (size - spec.size) / spec.stride + 1;
    let p = spec.exponent;
    let int_p = (p.fract() == 0.0 && p <= 32.0).then_some(p as i32);
    let mut result = vec![0.0; out * out * channels];
    for y in 0..out {
        for x in 0..out {
            let dst = &mut result[(y * out + x) * channels..(y * out + x + 1) * channels];
            for dy in 0..spec.size {
                for dx in 0..spec.size {
                    let src = ((y * spec.stride + dy) * size + x * spec.stride + dx) * channels;
                    for (d, v) in dst.iter_mut().zip(&input[src..src + channels]) {
                        let a = v.abs();
                        *d += match int_p {
                            Some(1) => a,
                            Some(2) => a * a,
                            Some(n) => a.powi(n),
                            None => a.powf(p),
                        };
                    }
                }
            }
            for d in dst.iter_mut() {
                *d = match int_p {
                    Some(1) => *d,
                    Some(2) => d.sqrt(),
                    _ => d.powf(1.0 / p),
                };
            }
        }
    }
    (out, result)
}

fn normalize(input: &[f64], size: usize, channels: usize, spec: &NormSpec) -> (usize, Vec<f64>) {
    let r = spec.radius;
    let out = size - 2 * r;
    let energy: Vec<f64> = input
        .chunks_exact(channels)
        .map(|c| c.iter().map(|v| v * v).sum())
        .collect();
    let mut result = Vec::with_capacity(out * out * channels);
    for y in 0..out {
        for x in 0..out {
            let mut local = 0.0;
            for yy in y..=y + 2 * r {
                for xx in x..=x + 2 * r {
                    local += energy[yy * size + xx];
                }
            }
            let denom = spec.threshold + spec.strength * local.sqrt();
            let center = ((y + r) * size + x + r) * channels;
            result.extend(input[center..center + channels].iter().map(|v| v / denom));
        }
    }
    (out, result)
}

impl Target for SthorNetwork {
    fn input_shape(&self) -> (usize, usize) {
        (self.spec.input_size, self.spec.input_size)
    }

    fn response_dim(&self) -> usize {
        self.spec.top_layer_neurons
    }

    fn respond(&self, values: &[f64]) -> Vec<f64> {
        let (size, map) = self.forward(values);
        let channels = self.spec.top_layer_neurons;
        let c = size / 2;
        let start = (c * size + c) * channels;
        map[start..start + channels].to_vec()
    }
}

/// Binary weight file: 16-byte header (`STHW`, version, level count,
/// reserved), then per level four u32 (filters, in-channels, kernel size,
/// reserved) followed by the bank as little-endian f64.
pub fn write_weights(net: &SthorNetwork, path: impl AsRef<Path>) -> Result<()> {
    let mut out = Vec::new();
    out.extend_from_slice(&WEIGHTS_MAGIC);
    out.extend_from_slice(&WEIGHTS_VERSION.to_le_bytes());
    out.extend_from_slice(&(net.spec.levels.len() as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for (i, bank) in net.weights().iter().enumerate() {
        let level = &net.spec.levels[i];
        for v in [
            level.n_filters,
            net.spec.in_channels(i),
            level.kernel_size,
            0,
        ] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        for w in bank {
            out.extend_from_slice(&w.to_le_bytes());
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

/// Loads a weight file written by [`write_weights`] for `spec`.
pub fn read_weights(spec: SthorSpec, path: impl AsRef<Path>) -> Result<SthorNetwork> {
    let path = path.as_ref();
    let bad = |reason: &str| Error::Format {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut cursor = 0usize;
    let mut take = |n: usize| -> Result<&[u8]> {
        let s = bytes
            .get(cursor..cursor + n)
            .ok_or_else(|| bad("truncated file"))?;
        cursor += n;
        Ok(s)
    };
    let u32_at = |b: &[u8]| u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize;
    if take(4)? != WEIGHTS_MAGIC {
        return Err(bad("bad magic"));
    }
    if u32_at(take(4)?) != WEIGHTS_VERSION as usize {
        return Err(bad("unsupported version"));
    }
    let levels = u32_at(take(4)?);
    take(4)?;
    if levels != spec.levels.len() {
        return Err(bad("level count does not match spec"));
    }
    let mut banks = Vec::with_capacity(levels);
    for i in 0..levels {
        let filters = u32_at(take(4)?);
        let in_ch = u32_at(take(4)?);
        let k = u32_at(take(4)?);
        take(4)?;
        if filters != spec.levels[i].n_filters
            || in_ch != spec.in_channels(i)
            || k != spec.levels[i].kernel_size
        {
            return Err(bad("level geometry does not match spec"));
        }
        let n = filters * in_ch * k * k;
        let raw = take(8 * n)?;
        banks.push(
            raw.chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect(),
        );
    }
    if cursor != bytes.len() {
        return Err(bad("trailing bytes"));
    }
    SthorNetwork::with_weights(spec, banks)
}
