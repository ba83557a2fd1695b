//! Black-box response functions.
//!
//! Everything the search layer probes implements [`Target`]: analytic
//! oracle neurons, random convolutional cascades, and the wrappers that turn
//! a population response into a scalar fitness.

mod analytic;
mod population;
mod sthor;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stimulus::{norm, Stimulus};

pub use analytic::{constant_target, identity_target, linear_neuron, quadratic_neuron, FnTarget};
pub use population::{
    sample_network_population, HyperRanges, NetworkManifest, Population, PopulationEntry,
    PopulationManifest,
};
pub use sthor::{
    read_weights, write_weights, Activation, LevelSpec, NormSpec, PoolSpec, SthorNetwork,
    SthorSpec, WEIGHTS_MAGIC, WEIGHTS_VERSION,
};

/// A deterministic stimulus → response map.
pub trait Target: Send + Sync + fmt::Debug {
    fn input_shape(&self) -> (usize, usize);

    fn response_dim(&self) -> usize;

    /// Response to row-major values of length `height × width`. Callers
    /// guarantee the length; use [`Target::evaluate`] for checked access.
    fn respond(&self, values: &[f64]) -> Vec<f64>;

    fn evaluate(&self, x: &Stimulus) -> Result<ResponseVector> {
        x.check_shape(self.input_shape())?;
        Ok(ResponseVector(self.respond(x.values())))
    }

    fn input_len(&self) -> usize {
        let (h, w) = self.input_shape();
        h * w
    }
}

pub type TargetHandle = Arc<dyn Target>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResponseVector(pub Vec<f64>);

impl ResponseVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn distance(&self, other: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Scalar response of an `R = 1` target.
pub fn scalar_response(target: &dyn Target, x: &Stimulus) -> f64 {
    target.respond(x.values())[0]
}

#[derive(Debug)]
struct UnitView {
    inner: TargetHandle,
    index: usize,
}

impl Target for UnitView {
    fn input_shape(&self) -> (usize, usize) {
        self.inner.input_shape()
    }

    fn response_dim(&self) -> usize {
        1
    }

    fn respond(&self, values: &[f64]) -> Vec<f64> {
        vec![self.inner.respond(values)[self.index]]
    }
}

/// Single component `index` of a vector-valued target.
pub fn unit_view(target: TargetHandle, index: usize) -> Result<TargetHandle> {
    let len = target.response_dim();
    if index >= len {
        return Err(Error::IndexOutOfRange { index, len });
    }
    Ok(Arc::new(UnitView {
        inner: target,
        index,
    }))
}

/// `exp(-‖f(x) − r_ref‖₂)`: response of an imaginary unit tuned to `r_ref`.
#[derive(Debug)]
pub struct MatchFitness {
    inner: TargetHandle,
    reference: Vec<f64>,
}

impl MatchFitness {
    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    pub fn fitness_of_response(&self, response: &[f64]) -> f64 {
        let d = response
            .iter()
            .zip(&self.reference)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        (-d).exp()
    }
}

impl Target for MatchFitness {
    fn input_shape(&self) -> (usize, usize) {
        self.inner.input_shape()
    }

    fn response_dim(&self) -> usize {
        1
    }

    fn respond(&self, values: &[f64]) -> Vec<f64> {
        vec![self.fitness_of_response(&self.inner.respond(values))]
    }
}

pub fn match_fitness(target: TargetHandle, r_ref: &ResponseVector) -> Result<TargetHandle> {
    if r_ref.len() != target.response_dim() {
        return Err(Error::DimensionMismatch {
            expected: target.response_dim(),
            actual: r_ref.len(),
        });
    }
    Ok(Arc::new(MatchFitness {
        inner: target,
        reference: r_ref.0.clone(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stimulus::project_sphere;

    fn vec_target() -> TargetHandle {
        Arc::new(FnTarget::new((1, 3), 3, |v: &[f64]| {
            vec![v[0], 2.0 * v[1], v[0] + v[2]]
        }))
    }

    #[test]
    fn unit_view_selects_component() {
        let t = vec_target();
        let x = project_sphere(&[0.2, -0.5, 0.7], 1, 3, 1.0).unwrap();
        let full = t.evaluate(&x).unwrap();
        for i in 0..3 {
            let u = unit_view(t.clone(), i).unwrap();
            assert_eq!(u.evaluate(&x).unwrap().values(), &[full.values()[i]]);
        }
        assert!(matches!(
            unit_view(t, 3),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        ));
        let single = linear_neuron(&x).unwrap();
        let u = unit_view(single.clone(), 0).unwrap();
        assert_eq!(u.evaluate(&x).unwrap(), single.evaluate(&x).unwrap());
    }

    #[test]
    fn match_fitness_examples() {
        let t = vec_target();
        let x = project_sphere(&[0.2, -0.5, 0.7], 1, 3, 1.0).unwrap();
        let r = t.evaluate(&x).unwrap();
        let m = match_fitness(t.clone(), &r).unwrap();
        assert_eq!(scalar_response(m.as_ref(), &x), 1.0);

        let shifted = ResponseVector(vec![r.0[0] + 1.0, r.0[1], r.0[2]]);
        let m = match_fitness(t.clone(), &shifted).unwrap();
        assert!((scalar_response(m.as_ref(), &x) - (-1.0f64).exp()).abs() < 1e-15);

        let mut last = 1.0;
        for d in [0.1, 0.5, 1.0, 3.0] {
            let r2 = ResponseVector(vec![r.0[0], r.0[1] + d, r.0[2]]);
            let f = scalar_response(match_fitness(t.clone(), &r2).unwrap().as_ref(), &x);
            assert!(f < last && f > 0.0);
            last = f;
        }
        assert!(match_fitness(t, &ResponseVector(vec![0.0])).is_err());
    }

    #[test]
    fn evaluate_checks_shape() {
        let t = vec_target();
        let x = project_sphere(&[1.0, 0.0, 0.0, 1.0], 2, 2, 1.0).unwrap();
        assert!(matches!(t.evaluate(&x), Err(Error::ShapeMismatch { .. })));
    }
}
