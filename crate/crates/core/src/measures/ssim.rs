//! Structural similarity with a Gaussian window, evaluated in valid mode.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::ReconstructionSet;
use crate::stimulus::Stimulus;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimParams {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 1.0,
        }
    }
}

impl SsimParams {
    /// Defaults with the dynamic range set to `max − min` of `reference`.
    pub fn for_reference(reference: &Stimulus) -> Self {
        let v = reference.values();
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            dynamic_range: max - min,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.window == 0
            || !(self.sigma > 0.0)
            || !(self.k1 > 0.0)
            || !(self.k2 > 0.0)
            || !(self.dynamic_range > 0.0)
        {
            return Err(Error::InvalidConfig(
                "SSIM window, sigma, constants and dynamic range must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Normalized 1-D Gaussian; the 2-D window is its outer product.
    pub fn kernel(&self) -> Vec<f64> {
        let c = (self.window as f64 - 1.0) / 2.0;
        let g: Vec<f64> = (0..self.window)
            .map(|i| (-((i as f64 - c).powi(2)) / (2.0 * self.sigma * self.sigma)).exp())
            .collect();
        let s: f64 = g.iter().sum();
        g.into_iter().map(|v| v / s).collect()
    }
}

/// Valid-mode separable filtering of a row-major image.
fn filter(img: &[f64], h: usize, w: usize, g: &[f64]) -> Vec<f64> {
    let k = g.len();
    let (oh, ow) = (h - k + 1, w - k + 1);
    let mut rows = vec![0.0; h * ow];
    for y in 0..h {
        for x in 0..ow {
            rows[y * ow + x] = g.iter().enumerate().map(|(i, c)| c * img[y * w + x + i]).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = g.iter().enumerate().map(|(i, c)| c * rows[(y + i) * ow + x]).sum();
        }
    }
    out
}

/// Mean local SSIM over all window positions.
pub fn ssim(a: &Stimulus, b: &Stimulus, params: &SsimParams) -> Result<f64> {
    params.validate()?;
    b.check_shape(a.shape())?;
    let (h, w) = a.shape();
    if params.window > h || params.window > w {
        return Err(Error::WindowTooLarge {
            window: params.window,
            height: h,
            width: w,
        });
    }
    let g = params.kernel();
    let (av, bv) = (a.values(), b.values());
    let prod = |f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> {
        av.iter().zip(bv).map(|(x, y)| f(*x, *y)).collect()
    };
    let mu_a = filter(av, h, w, &g);
    let mu_b = filter(bv, h, w, &g);
    let aa = filter(&prod(&|x, _| x * x), h, w, &g);
    let bb = filter(&prod(&|_, y| y * y), h, w, &g);
    let ab = filter(&prod(&|x, y| x * y), h, w, &g);
    let c1 = (params.k1 * params.dynamic_range).powi(2);
    let c2 = (params.k2 * params.dynamic_range).powi(2);
    let n = mu_a.len();
    let mut total = 0.0;
    for i in 0..n {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = aa[i] - ma * ma;
        let vb = bb[i] - mb * mb;
        let cov = ab[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
            / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    Ok(total / n as f64)
}

/// Mean SSIM between the reference and each reconstruction, with the
/// dynamic range taken from the reference.
pub fn encoding_specificity(recons: &ReconstructionSet, params: Option<&SsimParams>) -> Result<f64> {
    if recons.reconstructions.is_empty() {
        return Err(Error::EmptySet);
    }
    let p = params
        .copied()
        .unwrap_or_else(|| SsimParams::for_reference(&recons.reference));
    let mut total = 0.0;
    for r in &recons.reconstructions {
        total += ssim(&recons.reference, r, &p)?;
    }
    Ok(total / recons.reconstructions.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::stimulus::sample_pink_noise;
    use crate::targets::ResponseVector;

    fn noise(h: usize, w: usize, alpha: f64, seed: u64) -> Stimulus {
        sample_pink_noise(h, w, alpha, 1.0, &mut rng_from_seed(seed)).unwrap()
    }

    /// Direct 2-D windowed evaluation of the SSIM formula.
    fn oracle(a: &Stimulus, b: &Stimulus, p: &SsimParams) -> f64 {
        let (h, w) = a.shape();
        let k = p.window;
        let c = (k as f64 - 1.0) / 2.0;
        let mut win = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                let r2 = (i as f64 - c).powi(2) + (j as f64 - c).powi(2);
                win[i * k + j] = (-r2 / (2.0 * p.sigma * p.sigma)).exp();
            }
        }
        let s: f64 = win.iter().sum();
        win.iter_mut().for_each(|v| *v /= s);
        let c1 = (p.k1 * p.dynamic_range).powi(2);
        let c2 = (p.k2 * p.dynamic_range).powi(2);
        let mut vals = Vec::new();
        for y in 0..=h - k {
            for x in 0..=w - k {
                let px = |img: &Stimulus, i: usize, j: usize| img.values()[(y + i) * w + x + j];
                let (mut ma, mut mb) = (0.0, 0.0);
                for i in 0..k {
                    for j in 0..k {
                        ma += win[i * k + j] * px(a, i, j);
                        mb += win[i * k + j] * px(b, i, j);
                    }
                }
                let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
                for i in 0..k {
                    for j in 0..k {
                        let (da, db) = (px(a, i, j) - ma, px(b, i, j) - mb);
                        va += win[i * k + j] * da * da;
                        vb += win[i * k + j] * db * db;
                        cov += win[i * k + j] * da * db;
                    }
                }
                vals.push(
                    ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                        / ((ma * ma + mb * mb + c1) * (va + vb + c2)),
                );
            }
        }
        vals.iter().sum::<f64>() / vals.len() as f64
    }

    #[test]
    fn self_similarity_and_symmetry() {
        let a = noise(16, 16, -1.0, 1);
        let b = noise(16, 16, -2.0, 2);
        let p = SsimParams::for_reference(&a);
        assert!((ssim(&a, &a, &p).unwrap() - 1.0).abs() < 1e-12);
        assert!((ssim(&a, &b, &p).unwrap() - ssim(&b, &a, &p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn matches_direct_oracle() {
        for seed in 0..4 {
            let a = noise(16, 16, -1.0, seed);
            let b = noise(16, 16, 0.0, seed + 100);
            let p = SsimParams::for_reference(&a);
            assert!((ssim(&a, &b, &p).unwrap() - oracle(&a, &b, &p)).abs() < 1e-9);
        }
    }

    #[test]
    fn window_and_shape_errors() {
        let a = noise(8, 8, 0.0, 1);
        assert!(matches!(
            ssim(&a, &a, &SsimParams::default()),
            Err(Error::WindowTooLarge { .. })
        ));
        let b = noise(11, 12, 0.0, 1);
        assert!(matches!(
            ssim(&a, &b, &SsimParams::default()),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    fn set(reference: Stimulus, recons: Vec<Stimulus>) -> ReconstructionSet {
        ReconstructionSet {
            reference,
            reference_response: ResponseVector(vec![0.0]),
            fitnesses: vec![1.0; recons.len()],
            reconstructions: recons,
        }
    }

    #[test]
    fn specificity_examples() {
        let x = noise(16, 16, -1.0, 7);
        assert!((encoding_specificity(&set(x.clone(), vec![x.clone(); 3]), None).unwrap() - 1.0).abs() < 1e-12);

        // high-pass stimulus: local means vanish, leaving the structure term
        let hp = noise(16, 16, -4.0, 8);
        let neg = encoding_specificity(&set(hp.clone(), vec![hp.negated()]), None).unwrap();
        let p = SsimParams::for_reference(&hp);
        assert!((neg - oracle(&hp, &hp.negated(), &p)).abs() < 1e-9);
        assert!(neg < -0.9, "{neg}");

        let p = SsimParams::for_reference(&x);

        let others: Vec<Stimulus> = (0..4).map(|s| noise(16, 16, -2.0, 50 + s)).collect();
        let mean = others.iter().map(|o| ssim(&x, o, &p).unwrap()).sum::<f64>() / 4.0;
        let got = encoding_specificity(&set(x.clone(), others), None).unwrap();
        assert!((got - mean).abs() < 1e-12);
        assert!(got <= 1.0);
    }
}
