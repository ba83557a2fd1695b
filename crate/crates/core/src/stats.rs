//! Correlations, permutation tests, sensitivity index and multiple
//! correlation.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Two equal-length finite series with at least three pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSeries {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl PairedSeries {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                actual: y.len(),
            });
        }
        if x.len() < 3 {
            return Err(Error::TooFew {
                required: 3,
                actual: x.len(),
            });
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn pearson_raw(x: &[f64], y: &[f64]) -> Result<f64> {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if !(sxx > 0.0) || !(syy > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

pub fn pearson(s: &PairedSeries) -> Result<f64> {
    pearson_raw(&s.x, &s.y)
}

/// 1-based ranks; ties share the mean of their positions.
pub fn mid_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

pub fn spearman(s: &PairedSeries) -> Result<f64> {
    pearson_raw(&mid_ranks(&s.x), &mid_ranks(&s.y))
}

/// OLS coefficient of determination of `y` on the columns of `features`
/// (an intercept is added).
pub fn multiple_r2(features: &DMatrix<f64>, y: &[f64]) -> Result<f64> {
    let (n, k) = features.shape();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: y.len(),
        });
    }
    if n <= k + 1 {
        return Err(Error::TooFew {
            required: k + 2,
            actual: n,
        });
    }
    if features.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut design = DMatrix::from_element(n, k + 1, 1.0);
    design.view_mut((0, 1), (n, k)).copy_from(features);
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd
        .singular_values
        .iter()
        .any(|s| *s <= 1e-10 * smax.max(f64::MIN_POSITIVE))
    {
        return Err(Error::RankDeficient);
    }
    let yv = DVector::from_column_slice(y);
    let beta = svd.solve(&yv, 0.0).map_err(|_| Error::RankDeficient)?;
    let fitted = &design * beta;
    let my = mean(y);
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if !(ss_tot > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let ss_res: f64 = y.iter().zip(fitted.iter()).map(|(a, b)| (a - b).powi(2)).sum();
    Ok((1.0 - ss_res / ss_tot).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// `mean(a) − mean(b)`; permutations relabel the pooled values.
    MeanDiff,
    /// Least-squares slope of `b` on `a` (paired); permutations shuffle `b`.
    Slope,
}

fn statistic(kind: Statistic, a: &[f64], b: &[f64]) -> f64 {
    match kind {
        Statistic::MeanDiff => mean(a) - mean(b),
        Statistic::Slope => {
            let (ma, mb) = (mean(a), mean(b));
            let (mut sab, mut saa) = (0.0, 0.0);
            for (x, y) in a.iter().zip(b) {
                sab += (x - ma) * (y - mb);
                saa += (x - ma) * (x - ma);
            }
            if saa > 0.0 {
                sab / saa
            } else {
                0.0
            }
        }
    }
}

fn check_groups(a: &[f64], b: &[f64], kind: Statistic) -> Result<()> {
    let shortest = a.len().min(b.len());
    if shortest < 2 {
        return Err(Error::TooFew {
            required: 2,
            actual: shortest,
        });
    }
    if kind == Statistic::Slope && a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Relative slack so that permutations reproducing the observed statistic
/// up to rounding still count as "at least as extreme".
fn extreme(stat: f64, observed: f64) -> bool {
    stat.abs() >= observed.abs() * (1.0 - 1e-12) - 1e-15
}

/// Two-sided Monte-Carlo permutation test:
/// `p = (1 + #{|stat| ≥ |observed|}) / (1 + n_perm)`.
pub fn permutation_test(
    a: &[f64],
    b: &[f64],
    kind: Statistic,
    n_perm: usize,
    seed: u64,
) -> Result<f64> {
    check_groups(a, b, kind)?;
    if n_perm == 0 {
        return Err(Error::InvalidConfig("n_perm must be positive".into()));
    }
    let observed = statistic(kind, a, b);
    let mut rng = rng_from_seed(seed);
    let mut count = 0usize;
    match kind {
        Statistic::MeanDiff => {
            let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
            for _ in 0..n_perm {
                pooled.shuffle(&mut rng);
                let (pa, pb) = pooled.split_at(a.len());
                count += usize::from(extreme(statistic(kind, pa, pb), observed));
            }
        }
        Statistic::Slope => {
            let mut shuffled = b.to_vec();
            for _ in 0..n_perm {
                shuffled.shuffle(&mut rng);
                count += usize::from(extreme(statistic(kind, a, &shuffled), observed));
            }
        }
    }
    Ok((1 + count) as f64 / (1 + n_perm) as f64)
}

/// Exact two-sided p-value over every relabeling (mean difference: all
/// group splits; slope: all orderings of `b`). Only feasible for small inputs.
pub fn permutation_test_exhaustive(a: &[f64], b: &[f64], kind: Statistic) -> Result<f64> {
    check_groups(a, b, kind)?;
    let observed = statistic(kind, a, b);
    let (mut count, mut total) = (0usize, 0usize);
    match kind {
        Statistic::MeanDiff => {
            let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
            let n = pooled.len();
            if n > 24 {
                return Err(Error::InvalidConfig("too many values for exhaustive enumeration".into()));
            }
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as usize != a.len() {
                    continue;
                }
                let (mut pa, mut pb) = (Vec::new(), Vec::new());
                for (i, v) in pooled.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        pa.push(*v);
                    } else {
                        pb.push(*v);
                    }
                }
                total += 1;
                count += usize::from(extreme(statistic(kind, &pa, &pb), observed));
            }
        }
        Statistic::Slope => {
            if b.len() > 10 {
                return Err(Error::InvalidConfig("too many values for exhaustive enumeration".into()));
            }
            let mut perm = b.to_vec();
            let mut c = vec![0usize; perm.len()];
            // Heap's algorithm
            total += 1;
            count += usize::from(extreme(statistic(kind, a, &perm), observed));
            let mut i = 0;
            while i < perm.len() {
                if c[i] < i {
                    if i % 2 == 0 {
                        perm.swap(0, i);
                    } else {
                        perm.swap(c[i], i);
                    }
                    total += 1;
                    count += usize::from(extreme(statistic(kind, a, &perm), observed));
                    c[i] += 1;
                    i = 0;
                } else {
                    c[i] = 0;
                    i += 1;
                }
            }
        }
    }
    Ok(count as f64 / total as f64)
}

fn sample_variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)
}

/// `|mean(a) − mean(b)| / sqrt((var(a) + var(b)) / 2)` with `n − 1`
/// variances.
pub fn d_prime(a: &[f64], b: &[f64]) -> Result<f64> {
    check_groups(a, b, Statistic::MeanDiff)?;
    let pooled = (sample_variance(a) + sample_variance(b)) / 2.0;
    if !(pooled > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok((mean(a) - mean(b)).abs() / pooled.sqrt())
}
