//! Stimuli on the energy sphere, the two constraint projections, and random
//! stimulus generators.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng as _;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::rng::Rng;

/// Relative tolerance for the sphere constraint.
pub const SPHERE_TOL: f64 = 1e-9;

/// A real-valued 2-D pattern with Euclidean norm `energy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stimulus {
    values: Vec<f64>,
    height: usize,
    width: usize,
    energy: f64,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

impl Stimulus {
    /// Wraps `values` as-is; the energy is taken to be their norm.
    pub fn new(values: Vec<f64>, height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidSpec("stimulus shape must be positive".into()));
        }
        if values.len() != height * width {
            return Err(Error::DimensionMismatch {
                expected: height * width,
                actual: values.len(),
            });
        }
        check_finite(&values)?;
        let energy = norm(&values);
        if energy == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            values,
            height,
            width,
            energy,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn norm(&self) -> f64 {
        norm(&self.values)
    }

    pub fn dot(&self, other: &Stimulus) -> f64 {
        dot(&self.values, &other.values)
    }

    /// Unit-norm copy of the values.
    pub fn unit(&self) -> Vec<f64> {
        let n = self.norm();
        self.values.iter().map(|v| v / n).collect()
    }

    /// Same direction, rescaled to energy `e`.
    pub fn with_energy(&self, e: f64) -> Result<Stimulus> {
        project_sphere(&self.values, self.height, self.width, e)
    }

    pub fn negated(&self) -> Stimulus {
        Stimulus {
            values: self.values.iter().map(|v| -v).collect(),
            ..self.clone()
        }
    }

    pub(crate) fn check_shape(&self, expected: (usize, usize)) -> Result<()> {
        if self.shape() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                actual: self.shape(),
            });
        }
        Ok(())
    }

    /// Serializes as `height,width` / `energy` header lines followed by one
    /// comma-separated image row per line.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},{}\n{}\n", self.height, self.width, self.energy);
        for row in self.values.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Stimulus> {
        let bad = |reason: &str| Error::Format {
            path: "<csv>".into(),
            reason: reason.to_string(),
        };
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let shape = lines.next().ok_or_else(|| bad("missing shape line"))?;
        let mut dims = shape.split(',').map(|s| s.trim().parse::<usize>());
        let (height, width) = match (dims.next(), dims.next(), dims.next()) {
            (Some(Ok(h)), Some(Ok(w)), None) => (h, w),
            _ => return Err(bad("shape line must be `height,width`")),
        };
        let energy: f64 = lines
            .next()
            .ok_or_else(|| bad("missing energy line"))?
            .trim()
            .parse()
            .map_err(|_| bad("energy is not a number"))?;
        let values = lines
            .flat_map(|l| l.split(','))
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad("value is not a number"))?;
        if values.len() != height * width {
            return Err(bad("value count does not match shape"));
        }
        project_sphere(&values, height, width, energy)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Stimulus> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Stimulus::from_csv(&text).map_err(|e| match e {
            Error::Format { reason, .. } => Error::Format {
                path: path.to_path_buf(),
                reason,
            },
            other => other,
        })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// 8-bit binary PGM with min→0, max→255.
    pub fn to_pgm(&self) -> Vec<u8> {
        pgm_strip(std::slice::from_ref(self))
    }

    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_pgm())?;
        Ok(())
    }
}

fn to_gray(values: &[f64]) -> Vec<u8> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    values
        .iter()
        .map(|&v| {
            if span > 0.0 {
                ((v - lo) / span * 255.0).round() as u8
            } else {
                128
            }
        })
        .collect()
}

/// Horizontal strip of same-height panels separated by one white column,
/// each panel mapped min→0, max→255 independently.
pub fn pgm_strip(panels: &[Stimulus]) -> Vec<u8> {
    let height = panels.iter().map(|p| p.height).max().unwrap_or(0);
    let width: usize =
        panels.iter().map(|p| p.width).sum::<usize>() + panels.len().saturating_sub(1);
    let mut pixels = vec![255u8; height * width];
    let mut x0 = 0;
    for p in panels {
        let gray = to_gray(&p.values);
        for y in 0..p.height {
            pixels[y * width + x0..y * width + x0 + p.width]
                .copy_from_slice(&gray[y * p.width..(y + 1) * p.width]);
        }
        x0 += p.width + 1;
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(pixels);
    out
}

/// Ordered collection of same-shape stimuli with optional class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusSet {
    items: Vec<Stimulus>,
    labels: Option<Vec<usize>>,
}

impl StimulusSet {
    pub fn new(items: Vec<Stimulus>) -> Result<Self> {
        Self::build(items, None)
    }

    pub fn labeled(items: Vec<Stimulus>, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != items.len() {
            return Err(Error::DimensionMismatch {
                expected: items.len(),
                actual: labels.len(),
            });
        }
        Self::build(items, Some(labels))
    }

    fn build(items: Vec<Stimulus>, labels: Option<Vec<usize>>) -> Result<Self> {
        let first = items.first().ok_or(Error::EmptySet)?;
        let shape = first.shape();
        for item in &items {
            item.check_shape(shape)?;
        }
        Ok(Self { items, labels })
    }

    pub fn items(&self) -> &[Stimulus] {
        &self.items
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.items[0].shape()
    }
}

/// `E · x / ‖x‖`.
pub fn project_sphere(x: &[f64], height: usize, width: usize, energy: f64) -> Result<Stimulus> {
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(Error::InvalidSpec(format!("energy must be positive, got {energy}")));
    }
    if x.len() != height * width {
        return Err(Error::DimensionMismatch {
            expected: height * width,
            actual: x.len(),
        });
    }
    check_finite(x)?;
    let n = norm(x);
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    let s = energy / n;
    Ok(Stimulus {
        values: x.iter().map(|v| v * s).collect(),
        height,
        width,
        energy,
    })
}

/// Projects raw coordinates onto the cone of angle `delta` around `x_hat`,
/// keeping the energy of `x_hat`. Scale of `x` is irrelevant.
pub fn project_cone_raw(x: &[f64], x_hat: &Stimulus, delta: f64) -> Result<Stimulus> {
    if x.len() != x_hat.len() {
        return Err(Error::DimensionMismatch {
            expected: x_hat.len(),
            actual: x.len(),
        });
    }
    check_finite(x)?;
    let e = x_hat.energy;
    let along = dot(x, &x_hat.values) / (e * e);
    let ortho: Vec<f64> = x
        .iter()
        .zip(&x_hat.values)
        .map(|(xi, hi)| xi - along * hi)
        .collect();
    let ortho_norm = norm(&ortho);
    if ortho_norm < 1e-12 * norm(x).max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateDirection);
    }
    let (s, c) = delta.sin_cos();
    let scale = s * e / ortho_norm;
    let values: Vec<f64> = x_hat
        .values
        .iter()
        .zip(&ortho)
        .map(|(hi, oi)| c * hi + scale * oi)
        .collect();
    Ok(Stimulus {
        values,
        height: x_hat.height,
        width: x_hat.width,
        energy: e,
    })
}

pub fn project_cone(x: &Stimulus, x_hat: &Stimulus, delta: f64) -> Result<Stimulus> {
    x.check_shape(x_hat.shape())?;
    project_cone_raw(&x.values, x_hat, delta)
}

/// Random stimulus whose expected Fourier amplitude follows `f^(-alpha)`
/// over radial frequency, with a zero DC bin.
pub fn sample_pink_noise(
    height: usize,
    width: usize,
    alpha: f64,
    energy: f64,
    rng: &mut Rng,
) -> Result<Stimulus> {
    if height == 0 || width == 0 {
        return Err(Error::InvalidSpec("stimulus shape must be positive".into()));
    }
    let white: Vec<f64> = (0..height * width)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let mut spectrum = fft::fft2_real(&white, height, width);
    for ky in 0..height {
        for kx in 0..width {
            let f = fft::radial_frequency(ky, kx, height, width);
            let gain = if f == 0.0 { 0.0 } else { f.powf(-alpha) };
            spectrum[ky * width + kx] *= gain;
        }
    }
    let shaped: Vec<f64> = fft::ifft2(&spectrum, height, width)
        .iter()
        .map(|c: &Complex64| c.re)
        .collect();
    project_sphere(&shaped, height, width, energy)
}

/// Random stimulus orthogonal to `x_hat` with the same energy.
pub fn random_orthogonal_unit(x_hat: &Stimulus, rng: &mut Rng) -> Result<Stimulus> {
    const RETRIES: usize = 100;
    if x_hat.len() < 2 {
        return Err(Error::TooFew {
            required: 2,
            actual: x_hat.len(),
        });
    }
    let e2 = x_hat.energy * x_hat.energy;
    for _ in 0..RETRIES {
        let mut v: Vec<f64> = (0..x_hat.len())
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let raw_norm = norm(&v);
        // two Gram-Schmidt passes keep the residual at round-off level
        for _ in 0..2 {
            let along = dot(&v, &x_hat.values) / e2;
            v.iter_mut()
                .zip(&x_hat.values)
                .for_each(|(vi, hi)| *vi -= along * hi);
        }
        if norm(&v) > 1e-6 * raw_norm {
            return project_sphere(&v, x_hat.height, x_hat.width, x_hat.energy);
        }
    }
    Err(Error::ImprobableFailure(RETRIES))
}

/// Angle between two stimuli in `[0, π]`.
pub fn angular_distance(x: &Stimulus, y: &Stimulus) -> Result<f64> {
    x.check_shape(y.shape())?;
    angle_between(&x.values, &y.values)
}

pub(crate) fn angle_between(x: &[f64], y: &[f64]) -> Result<f64> {
    let (nx, ny) = (norm(x), norm(y));
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot(x, y) / (nx * ny)).clamp(-1.0, 1.0).acos())
}

/// Mean Euclidean norm over the set.
pub fn average_energy(set: &StimulusSet) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(set.items.iter().map(Stimulus::norm).sum::<f64>() / set.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn stim(values: &[f64], h: usize, w: usize) -> Stimulus {
        Stimulus::new(values.to_vec(), h, w).unwrap()
    }

    fn gaussian(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
    }

    #[test]
    fn sphere_projection_normalizes() {
        let s = project_sphere(&[3.0, 4.0], 1, 2, 1.0).unwrap();
        assert!((s.values()[0] - 0.6).abs() < 1e-15);
        assert!((s.values()[1] - 0.8).abs() < 1e-15);
        let again = project_sphere(s.values(), 1, 2, 1.0).unwrap();
        for (a, b) in again.values().iter().zip(s.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let r = project_sphere(&gaussian(121, 3), 11, 11, 2.0).unwrap();
        assert!((r.norm() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn sphere_projection_errors() {
        assert!(matches!(
            project_sphere(&[0.0, 0.0], 1, 2, 1.0),
            Err(Error::ZeroVector)
        ));
        assert!(matches!(
            project_sphere(&[f64::NAN, 1.0], 1, 2, 1.0),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn cone_projection_examples() {
        let x_hat = stim(&[1.0, 0.0, 0.0], 1, 3);
        let x = stim(&[0.0, 1.0, 0.0], 1, 3);
        let out = project_cone(&x, &x_hat, PI / 2.0).unwrap();
        for (a, b) in out.values().iter().zip(x.values()) {
            assert!((a - b).abs() < 1e-15);
        }

        let perturbed = stim(&[1.0, 0.01, -0.02], 1, 3);
        let out = project_cone(&perturbed, &x_hat, 0.1 * PI).unwrap();
        assert!((out.dot(&x_hat) - (0.1 * PI).cos()).abs() < 1e-9);

        let x_hat = project_sphere(&gaussian(121, 1), 11, 11, 1.0).unwrap();
        let x = project_sphere(&gaussian(121, 2), 11, 11, 1.0).unwrap();
        let out = project_cone(&x, &x_hat, 0.3 * PI).unwrap();
        assert!((angular_distance(&out, &x_hat).unwrap() - 0.3 * PI).abs() < 1e-9);
    }

    #[test]
    fn cone_projection_degenerate() {
        let x_hat = stim(&[0.6, 0.8], 1, 2);
        let x = stim(&[1.2, 1.6], 1, 2);
        assert!(matches!(
            project_cone(&x, &x_hat, 0.2),
            Err(Error::DegenerateDirection)
        ));
    }

    #[test]
    fn pink_noise_properties() {
        let mut rng = rng_from_seed(11);
        for alpha in [-4.0, -3.0, -2.0, -1.0, 0.0] {
            let s = sample_pink_noise(11, 11, alpha, 1.5, &mut rng).unwrap();
            assert!((s.norm() - 1.5).abs() < 1e-9);
        }
        let a = sample_pink_noise(8, 9, -2.0, 1.0, &mut rng_from_seed(5)).unwrap();
        let b = sample_pink_noise(8, 9, -2.0, 1.0, &mut rng_from_seed(5)).unwrap();
        assert_eq!(a, b);
        // DC removed
        assert!(a.values().iter().sum::<f64>().abs() < 1e-10);
    }

    fn band_powers(s: &Stimulus) -> (f64, f64) {
        let (h, w) = s.shape();
        let spec = fft::fft2_real(s.values(), h, w);
        let (mut low, mut high) = (0.0, 0.0);
        for ky in 0..h {
            for kx in 0..w {
                let f = fft::radial_frequency(ky, kx, h, w);
                let p = spec[ky * w + kx].norm_sqr();
                if f > 0.0 && f < 0.15 {
                    low += p;
                } else if f >= 0.35 {
                    high += p;
                }
            }
        }
        (low, high)
    }

    #[test]
    fn pink_noise_spectral_tilt() {
        let mut rng = rng_from_seed(21);
        let trials = 40;
        let mut high = [0.0; 2];
        let mut white_ratio = 0.0;
        for _ in 0..trials {
            for (i, alpha) in [-2.0, 0.0].into_iter().enumerate() {
                let s = sample_pink_noise(32, 32, alpha, 1.0, &mut rng).unwrap();
                let (l, h) = band_powers(&s);
                high[i] += h;
                if alpha == 0.0 {
                    white_ratio += l / h;
                }
            }
        }
        assert!(high[0] > high[1]);
        // white noise: per-bin power is flat, so band ratio ≈ bin-count ratio
        let (mut nl, mut nh) = (0.0, 0.0);
        for ky in 0..32 {
            for kx in 0..32 {
                let f = fft::radial_frequency(ky, kx, 32, 32);
                if f > 0.0 && f < 0.15 {
                    nl += 1.0;
                } else if f >= 0.35 {
                    nh += 1.0;
                }
            }
        }
        let ratio = white_ratio / trials as f64;
        assert!((ratio / (nl / nh) - 1.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn orthogonal_unit_examples() {
        let x_hat = stim(&[1.0, 0.0], 1, 2);
        let o = random_orthogonal_unit(&x_hat, &mut rng_from_seed(1)).unwrap();
        assert!(o.values()[0].abs() < 1e-12 && (o.values()[1].abs() - 1.0).abs() < 1e-12);

        let x_hat = project_sphere(&gaussian(121, 9), 11, 11, 1.0).unwrap();
        let a = random_orthogonal_unit(&x_hat, &mut rng_from_seed(1)).unwrap();
        let b = random_orthogonal_unit(&x_hat, &mut rng_from_seed(2)).unwrap();
        assert_ne!(a, b);
        assert!(a.dot(&x_hat).abs() < 1e-9);
        assert!((a.norm() - 1.0).abs() < 1e-9);

        let single = stim(&[1.0], 1, 1);
        assert!(random_orthogonal_unit(&single, &mut rng_from_seed(1)).is_err());
    }

    #[test]
    fn angular_distance_examples() {
        let x = stim(&[1.0, 0.0], 1, 2);
        let y = stim(&[1.0, 1.0], 1, 2);
        assert_eq!(angular_distance(&x, &x).unwrap(), 0.0);
        assert!((angular_distance(&x, &stim(&[0.0, 2.0], 1, 2)).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((angular_distance(&x, &y).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!((angular_distance(&x, &x.negated()).unwrap() - PI).abs() < 1e-15);
    }

    #[test]
    fn average_energy_examples() {
        let set = StimulusSet::new(vec![stim(&[1.0, 0.0], 1, 2), stim(&[0.0, 1.0], 1, 2)]).unwrap();
        assert_eq!(average_energy(&set).unwrap(), 1.0);
        let set = StimulusSet::new(vec![stim(&[1.0, 0.0], 1, 2), stim(&[0.0, 3.0], 1, 2)]).unwrap();
        assert_eq!(average_energy(&set).unwrap(), 2.0);

        let items: Vec<Stimulus> = (0..100)
            .map(|i| stim(&gaussian(121, 100 + i), 11, 11))
            .collect();
        // Kahan-compensated oracle
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for s in &items {
            let n = s.values().iter().map(|v| v * v).sum::<f64>().sqrt();
            let y = n - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        let set = StimulusSet::new(items).unwrap();
        assert!((average_energy(&set).unwrap() - sum / 100.0).abs() < 1e-12);
        assert!(matches!(StimulusSet::new(vec![]), Err(Error::EmptySet)));
    }

    #[test]
    fn csv_and_pgm() {
        let s = project_sphere(&gaussian(6, 4), 2, 3, 1.0).unwrap();
        let back = Stimulus::from_csv(&s.to_csv()).unwrap();
        assert_eq!((back.height(), back.width()), (2, 3));
        for (a, b) in back.values().iter().zip(s.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let pgm = s.to_pgm();
        assert!(pgm.starts_with(b"P5\n3 2\n255\n"));
        let pixels = &pgm[pgm.len() - 6..];
        assert_eq!(*pixels.iter().min().unwrap(), 0);
        assert_eq!(*pixels.iter().max().unwrap(), 255);
        assert!(Stimulus::from_csv("2,3\n1.0\n1,2,3\n").is_err());
    }

    proptest! {
        #[test]
        fn cone_constraints_hold(seed in 0u64..5000, delta in 0.01f64..PI, e in 0.1f64..5.0) {
            let x_hat = project_sphere(&gaussian(25, seed), 5, 5, e).unwrap();
            let x = project_sphere(&gaussian(25, seed + 7919), 5, 5, 1.0).unwrap();
            let out = project_cone(&x, &x_hat, delta).unwrap();
            prop_assert!((out.norm() - e).abs() <= 1e-9 * e);
            prop_assert!((out.dot(&x_hat) / (e * e) - delta.cos()).abs() <= 1e-9);
        }

        #[test]
        fn sphere_projection_idempotent(seed in 0u64..5000, e in 0.1f64..5.0) {
            let once = project_sphere(&gaussian(16, seed), 4, 4, e).unwrap();
            let twice = project_sphere(once.values(), 4, 4, e).unwrap();
            for (a, b) in once.values().iter().zip(twice.values()) {
                prop_assert!((a - b).abs() <= 1e-12 * e.max(1.0));
            }
        }

        #[test]
        fn angular_distance_symmetric(seed in 0u64..5000) {
            let x = stim(&gaussian(9, seed), 3, 3);
            let y = stim(&gaussian(9, seed + 1), 3, 3);
            prop_assert_eq!(angular_distance(&x, &y).unwrap(), angular_distance(&y, &x).unwrap());
        }
    }
}
