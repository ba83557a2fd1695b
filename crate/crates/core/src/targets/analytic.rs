use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{Target, TargetHandle};
use crate::error::{Error, Result};
use crate::stimulus::{dot, Stimulus};

/// Target backed by a closure.
pub struct FnTarget {
    shape: (usize, usize),
    dim: usize,
    f: Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
}

impl FnTarget {
    pub fn new(
        shape: (usize, usize),
        dim: usize,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            shape,
            dim,
            f: Box::new(f),
        }
    }

    /// Scalar-valued convenience constructor.
    pub fn scalar(
        shape: (usize, usize),
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(shape, 1, move |v| vec![f(v)])
    }
}

impl fmt::Debug for FnTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnTarget")
            .field("shape", &self.shape)
            .field("dim", &self.dim)
            .finish()
    }
}

impl Target for FnTarget {
    fn input_shape(&self) -> (usize, usize) {
        self.shape
    }

    fn response_dim(&self) -> usize {
        self.dim
    }

    fn respond(&self, values: &[f64]) -> Vec<f64> {
        (self.f)(values)
    }
}

#[derive(Debug)]
struct LinearNeuron {
    shape: (usize, usize),
    weights: Vec<f64>,
}

impl Target for LinearNeuron {
    fn input_shape(&self) -> (usize, usize) {
        self.shape
    }

    fn response_dim(&self) -> usize {
        1
    }

    fn respond(&self, values: &[f64]) -> Vec<f64> {
        vec![dot(&self.weights, values)]
    }
}

/// Inner-product neuron `f(x) = ⟨w, x⟩`; `w` must have unit norm.
pub fn linear_neuron(w: &Stimulus) -> Result<TargetHandle> {
    if (w.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidSpec(format!(
            "linear neuron weights must have unit norm, got {}",
            w.norm()
        )));
    }
    Ok(Arc::new(LinearNeuron {
        shape: w.shape(),
        weights: w.values().to_vec(),
    }))
}

#[derive(Debug)]
struct QuadraticNeuron {
    shape: (usize, usize),
    q: DMatrix<f64>,
    l: DVector<f64>,
    c: f64,
}

impl Target for QuadraticNeuron {
    fn input_shape(&self) -> (usize, usize) {
        self.shape
    }

    fn response_dim(&self) -> usize {
        1
    }

    fn respond(&self, values: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(values);
        vec![0.5 * x.dot(&(&self.q * &x)) + self.l.dot(&x) + self.c]
    }
}

/// `f(x) = ½xᵀQx + Lᵀx + c` with symmetric `Q`.
pub fn quadratic_neuron(
    shape: (usize, usize),
    q: DMatrix<f64>,
    l: DVector<f64>,
    c: f64,
) -> Result<TargetHandle> {
    let n = shape.0 * shape.1;
    if q.nrows() != n || q.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: q.nrows(),
        });
    }
    if l.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: l.len(),
        });
    }
    let asym = (&q - q.transpose()).amax();
    if asym > 1e-9 {
        return Err(Error::Asymmetric(asym));
    }
    Ok(Arc::new(QuadraticNeuron { shape, q, l, c }))
}

/// `f(x) = x` (R = N).
pub fn identity_target(shape: (usize, usize)) -> TargetHandle {
    Arc::new(FnTarget::new(shape, shape.0 * shape.1, |v| v.to_vec()))
}

/// Input-independent response.
pub fn constant_target(shape: (usize, usize), response: Vec<f64>) -> TargetHandle {
    let dim = response.len();
    Arc::new(FnTarget::new(shape, dim, move |_| response.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::stimulus::{project_cone, project_sphere, sample_pink_noise};
    use crate::targets::scalar_response;
    use proptest::prelude::*;

    fn unit(n: usize, seed: u64) -> Stimulus {
        sample_pink_noise(1, n, 0.0, 1.0, &mut rng_from_seed(seed)).unwrap()
    }

    #[test]
    fn linear_examples() {
        let w = unit(16, 1);
        let t = linear_neuron(&w).unwrap();
        assert!((scalar_response(t.as_ref(), &w) - 1.0).abs() < 1e-12);
        assert!((scalar_response(t.as_ref(), &w.negated()) + 1.0).abs() < 1e-12);
        let x = project_cone(&unit(16, 2), &w, 0.3).unwrap();
        assert!((scalar_response(t.as_ref(), &x) - 0.3f64.cos()).abs() < 1e-12);
        let not_unit = project_sphere(w.values(), 1, 16, 2.0).unwrap();
        assert!(linear_neuron(&not_unit).is_err());
    }

    #[test]
    fn quadratic_examples() {
        let x = unit(4, 3);
        let t = quadratic_neuron((1, 4), DMatrix::identity(4, 4), DVector::zeros(4), 0.0).unwrap();
        assert!((scalar_response(t.as_ref(), &x) - 0.5).abs() < 1e-12);

        let w = unit(4, 4);
        let lin = quadratic_neuron(
            (1, 4),
            DMatrix::zeros(4, 4),
            DVector::from_column_slice(w.values()),
            0.0,
        )
        .unwrap();
        let reference = linear_neuron(&w).unwrap();
        assert!(
            (scalar_response(lin.as_ref(), &x) - scalar_response(reference.as_ref(), &x)).abs()
                < 1e-12
        );

        // Q = diag(3, 1): maximum 1.5 at ±e1 on the unit circle
        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0]));
        let t = quadratic_neuron((1, 2), q, DVector::zeros(2), 0.0).unwrap();
        let best = (0..3600)
            .map(|i| {
                let a = i as f64 * std::f64::consts::TAU / 3600.0;
                scalar_response(t.as_ref(), &project_sphere(&[a.cos(), a.sin()], 1, 2, 1.0).unwrap())
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((best - 1.5).abs() < 1e-12);

        let mut asym = DMatrix::identity(2, 2);
        asym[(0, 1)] = 1e-6;
        assert!(matches!(
            quadratic_neuron((1, 2), asym, DVector::zeros(2), 0.0),
            Err(Error::Asymmetric(_))
        ));
    }

    proptest! {
        #[test]
        fn closed_forms_agree(seed in 0u64..1000) {
            let n = 9;
            let w = unit(n, seed);
            let x = unit(n, seed + 10_000);
            let t = linear_neuron(&w).unwrap();
            let direct: f64 = w.values().iter().zip(x.values()).map(|(a, b)| a * b).sum();
            prop_assert!((scalar_response(t.as_ref(), &x) - direct).abs() < 1e-12);

            let a = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3 + seed as usize) % 11) as f64 - 5.0);
            let q = &a + a.transpose();
            let l = DVector::from_fn(n, |i, _| i as f64 * 0.1 - 0.4);
            let t = quadratic_neuron((1, n), q.clone(), l.clone(), 0.7).unwrap();
            let v = x.values();
            let mut expect = 0.7;
            for i in 0..n {
                expect += l[i] * v[i];
                for j in 0..n {
                    expect += 0.5 * v[i] * q[(i, j)] * v[j];
                }
            }
            prop_assert!((scalar_response(t.as_ref(), &x) - expect).abs() < 1e-12);
        }
    }
}
