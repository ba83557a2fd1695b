//! Quasi-second-order measures over a sample of cone solutions.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::SubspaceSample;
use crate::stimulus::{Stimulus, StimulusSet};

fn unit_columns(columns: &[Stimulus]) -> DMatrix<f64> {
    let n = columns[0].len();
    let mut m = DMatrix::zeros(n, columns.len());
    for (j, c) in columns.iter().enumerate() {
        m.set_column(j, &DVector::from_vec(c.unit()));
    }
    m
}

/// `(‖X‖_* − √n)/(n − √n)` for the `N × n` matrix of unit-normalized columns:
/// 0 when all columns coincide, 1 when they are orthonormal.
pub fn subspace_capacity(sample: &SubspaceSample) -> Result<f64> {
    nuclear_capacity(&sample.columns)
}

pub fn nuclear_capacity(columns: &[Stimulus]) -> Result<f64> {
    let n = columns.len();
    if n < 2 {
        return Err(Error::TooFew {
            required: 2,
            actual: n,
        });
    }
    let x = unit_columns(columns);
    let sv = x.singular_values();
    let nuclear: f64 = sv.iter().sum();
    let rn = (n as f64).sqrt();
    // SVD rounding bound, summed over the n singular values
    let slack = n as f64 * sv.max() * x.nrows().max(n) as f64 * f64::EPSILON;
    if nuclear - rn <= slack {
        return Ok(0.0);
    }
    if n as f64 - nuclear <= slack {
        return Ok(1.0);
    }
    Ok(((nuclear - rn) / (n as f64 - rn)).clamp(0.0, 1.0))
}

/// Orthonormal principal-component basis (all `N` components, descending
/// variance) of a mean-centered task set.
#[derive(Debug, Clone)]
pub struct PcaBasis {
    /// Rows are components.
    components: DMatrix<f64>,
    variances: Vec<f64>,
    shape: (usize, usize),
}

impl PcaBasis {
    pub fn fit(task: &StimulusSet) -> Result<Self> {
        if task.len() < 2 {
            return Err(Error::TooFew {
                required: 2,
                actual: task.len(),
            });
        }
        let shape = task.shape();
        let n = shape.0 * shape.1;
        let k = task.len();
        let mut mean = DVector::zeros(n);
        for t in task.items() {
            mean += DVector::from_column_slice(t.values());
        }
        mean /= k as f64;
        let mut centered = DMatrix::zeros(n, k);
        for (j, t) in task.items().iter().enumerate() {
            centered.set_column(j, &(DVector::from_column_slice(t.values()) - &mean));
        }
        let cov = &centered * centered.transpose() / (k as f64 - 1.0);
        let eig = SymmetricEigen::new(cov);
        let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        if !(top > 1e-300) {
            return Err(Error::DegenerateTask);
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let mut components = DMatrix::zeros(n, n);
        for (row, &i) in order.iter().enumerate() {
            components.set_row(row, &eig.eigenvectors.column(i).transpose());
        }
        Ok(Self {
            components,
            variances: order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect(),
            shape,
        })
    }

    pub fn dimension(&self) -> usize {
        self.variances.len()
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn component(&self, index: usize) -> Vec<f64> {
        self.components.row(index).iter().copied().collect()
    }

    /// `‖V u‖₁` for the unit-normalized `x`; lies in `[1, √N]`.
    pub fn l1_score(&self, x: &Stimulus) -> Result<f64> {
        x.check_shape(self.shape)?;
        let coeffs = &self.components * DVector::from_vec(x.unit());
        Ok(coeffs.iter().map(|c| c.abs()).sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentScore {
    /// Mean L1 norm of the PC coefficients (lower = better aligned).
    pub raw: f64,
    /// `(raw − 1)/(√N − 1)`, in `[0, 1]`.
    pub scaled: f64,
    /// `raw` minus the reference stimulus's own L1 score.
    pub relative: Option<f64>,
}

/// Mean PC-basis L1 norm of the sample columns, optionally relative to a
/// reference stimulus.
pub fn subspace_alignment(
    sample: &SubspaceSample,
    basis: &PcaBasis,
    reference: Option<&Stimulus>,
) -> Result<AlignmentScore> {
    alignment_of(&sample.columns, basis, reference)
}

pub fn alignment_of(
    columns: &[Stimulus],
    basis: &PcaBasis,
    reference: Option<&Stimulus>,
) -> Result<AlignmentScore> {
    if columns.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut total = 0.0;
    for c in columns {
        total += basis.l1_score(c)?;
    }
    let raw = total / columns.len() as f64;
    let root = (basis.dimension() as f64).sqrt();
    let scaled = if root > 1.0 {
        ((raw - 1.0) / (root - 1.0)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let relative = reference.map(|r| basis.l1_score(r)).transpose()?.map(|s| raw - s);
    Ok(AlignmentScore {
        raw,
        scaled,
        relative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::search::PathKind;
    use crate::stimulus::sample_pink_noise;
    use proptest::prelude::*;

    fn sample(columns: Vec<Stimulus>) -> SubspaceSample {
        SubspaceSample {
            kind: PathKind::Invariance,
            delta: 0.1,
            fitnesses: vec![0.0; columns.len()],
            columns,
        }
    }

    fn noise(h: usize, w: usize, n: usize, seed: u64) -> Vec<Stimulus> {
        let mut rng = rng_from_seed(seed);
        (0..n)
            .map(|i| sample_pink_noise(h, w, -((i % 3) as f64), 1.0, &mut rng).unwrap())
            .collect()
    }

    #[test]
    fn capacity_anchors() {
        let x = noise(4, 4, 1, 1).remove(0);
        assert!(subspace_capacity(&sample(vec![x.clone(); 6])).unwrap().abs() < 1e-12);
        let basis: Vec<Stimulus> = (0..6)
            .map(|i| {
                let mut v = vec![0.0; 16];
                v[i * 2] = if i % 2 == 0 { 1.0 } else { -3.0 };
                Stimulus::new(v, 4, 4).unwrap()
            })
            .collect();
        assert!((subspace_capacity(&sample(basis)).unwrap() - 1.0).abs() < 1e-12);
        assert!(subspace_capacity(&sample(vec![x])).is_err());
    }

    #[test]
    fn singular_values_match_gram_oracle() {
        let cols = noise(11, 11, 20, 5);
        let x = unit_columns(&cols);
        let mut sv: Vec<f64> = x.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        let gram = x.transpose() * &x;
        let mut oracle: Vec<f64> = jacobi_eigenvalues(gram).into_iter().map(|l| l.max(0.0).sqrt()).collect();
        oracle.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in sv.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8, "{a} {b}");
        }
        let rn = 20f64.sqrt();
        let expected = (oracle.iter().sum::<f64>() - rn) / (20.0 - rn);
        assert!((subspace_capacity(&sample(cols)).unwrap() - expected).abs() < 1e-8);
    }

    /// Cyclic Jacobi eigenvalue iteration for a symmetric matrix.
    fn jacobi_eigenvalues(mut a: DMatrix<f64>) -> Vec<f64> {
        let n = a.nrows();
        for _ in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)].powi(2))
                .sum();
            if off < 1e-26 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[(p, q)].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[(k, p)], a[(k, q)]);
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[(i, i)]).collect()
    }

    proptest! {
        #[test]
        fn capacity_invariant_to_sign_and_order(seed in 0u64..200, flip in 0usize..8) {
            let cols = noise(4, 4, 8, seed);
            let base = subspace_capacity(&sample(cols.clone())).unwrap();
            prop_assert!((0.0..=1.0).contains(&base));
            let mut changed = cols;
            changed[flip] = changed[flip].negated();
            changed.reverse();
            prop_assert!((subspace_capacity(&sample(changed)).unwrap() - base).abs() < 1e-10);
        }

        #[test]
        fn repeated_column_has_zero_capacity(seed in any::<u64>(), n in 2usize..25, side in 2usize..12) {
            let c = noise(side, side, 1, seed).remove(0);
            let cols: Vec<Stimulus> = (0..n).map(|k| if k % 2 == 0 { c.clone() } else { c.with_energy(3.0).unwrap() }).collect();
            prop_assert_eq!(nuclear_capacity(&cols).unwrap(), 0.0);
        }
    }

    fn task_with_distinct_variances() -> StimulusSet {
        let mut rng = rng_from_seed(9);
        let mut items = Vec::new();
        for _ in 0..60 {
            use rand::Rng as _;
            let v: Vec<f64> = (0..16)
                .map(|i| (1.0 + i as f64) * rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect();
            items.push(Stimulus::new(v, 4, 4).unwrap());
        }
        StimulusSet::new(items).unwrap()
    }

    #[test]
    fn alignment_anchors_and_oracle() {
        let task = task_with_distinct_variances();
        let basis = PcaBasis::fit(&task).unwrap();
        assert_eq!(basis.dimension(), 16);
        let pc = Stimulus::new(basis.component(3), 4, 4).unwrap();
        let s = subspace_alignment(&sample(vec![pc.clone()]), &basis, Some(&pc)).unwrap();
        assert!((s.raw - 1.0).abs() < 1e-9);
        assert!(s.scaled.abs() < 1e-9);
        assert!(s.relative.unwrap().abs() < 1e-12);

        let flat: Vec<f64> = (0..16)
            .map(|j| (0..16).map(|i| basis.component(i)[j]).sum::<f64>())
            .collect();
        let flat = Stimulus::new(flat, 4, 4).unwrap();
        let s = subspace_alignment(&sample(vec![flat]), &basis, None).unwrap();
        assert!((s.raw - 4.0).abs() < 1e-9);
        assert!((s.scaled - 1.0).abs() < 1e-9);

        let cols = noise(4, 4, 5, 77);
        let mut dense = 0.0;
        for c in &cols {
            let u = c.unit();
            for i in 0..16 {
                let v = basis.component(i);
                dense += v.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>().abs();
            }
        }
        let got = subspace_alignment(&sample(cols), &basis, None).unwrap();
        assert!((got.raw - dense / 5.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_task() {
        let x = noise(4, 4, 1, 3).remove(0);
        let task = StimulusSet::new(vec![x.clone(), x]).unwrap();
        assert!(matches!(PcaBasis::fit(&task), Err(Error::DegenerateTask)));
    }
}
