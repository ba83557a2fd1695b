//! Path potentials: how far a path's response curve departs from the
//! cosine falloff of an inner-product unit.

use crate::error::{Error, Result};
use crate::search::{PathKind, PathResult};

/// Trapezoid rule over `(x, y)` samples with `(0, y0)` prepended.
fn trapezoid(deltas: &[f64], values: &[f64], y0: f64) -> f64 {
    let mut area = 0.0;
    let (mut px, mut py) = (0.0, y0);
    for (&x, &y) in deltas.iter().zip(values) {
        area += 0.5 * (x - px) * (y + py);
        px = x;
        py = y;
    }
    area
}

fn check_grid(path: &PathResult) -> Result<f64> {
    if path.deltas.is_empty() || path.deltas.len() != path.fitnesses.len() {
        return Err(Error::DimensionMismatch {
            expected: path.deltas.len(),
            actual: path.fitnesses.len(),
        });
    }
    let mut prev = 0.0;
    for &d in &path.deltas {
        if !(d > prev) {
            return Err(Error::InvalidConfig("delta grid must increase from 0".into()));
        }
        prev = d;
    }
    Ok(prev)
}

/// Unit path potential in `[0, 1]`.
///
/// Fitnesses are divided by `f_at_optimum`, clamped to `[-1, 1]` and mapped
/// to an equivalent angle `θ = arccos f̃`. Invariance integrates the lead
/// `max(δ − θ, 0)`, selectivity the lag `max(min(θ, π/2) − δ, 0)`; both are
/// trapezoid-integrated from the anchor `(0, 0)` and divided by `δ_max²/2`.
/// The cosine baseline scores 0; a flat invariance curve (or a selectivity
/// curve dropping to zero at once) scores 1.
pub fn path_potential_unit(path: &PathResult, f_at_optimum: f64) -> Result<f64> {
    if !(f_at_optimum > 0.0) {
        return Err(Error::NonPositiveOptimum(f_at_optimum));
    }
    let dmax = check_grid(path)?;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let integrand: Vec<f64> = path
        .deltas
        .iter()
        .zip(&path.fitnesses)
        .map(|(&d, &f)| {
            let theta = (f / f_at_optimum).clamp(-1.0, 1.0).acos();
            match path.kind {
                PathKind::Invariance => (d - theta).max(0.0),
                PathKind::Selectivity => (theta.min(half_pi) - d).max(0.0),
            }
        })
        .collect();
    let area = trapezoid(&path.deltas, &integrand, 0.0);
    Ok((area / (dmax * dmax / 2.0)).clamp(0.0, 1.0))
}

/// Population path potential: trapezoid integral of the recorded match
/// fitnesses from the anchor `(0, 1)`, divided by `δ_max`.
pub fn path_potential_population(path: &PathResult) -> Result<f64> {
    let dmax = check_grid(path)?;
    Ok(trapezoid(&path.deltas, &path.fitnesses, 1.0) / dmax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::default_deltas;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn fixture(kind: PathKind, fitnesses: Vec<f64>) -> PathResult {
        PathResult {
            kind,
            deltas: default_deltas(),
            points: vec![],
            fitnesses,
            optimum_fitness: 1.0,
            evaluations: vec![],
            run_index: 0,
        }
    }

    #[test]
    fn baseline_and_perfect() {
        let cos: Vec<f64> = default_deltas().iter().map(|d| d.cos()).collect();
        for kind in [PathKind::Invariance, PathKind::Selectivity] {
            let v = path_potential_unit(&fixture(kind, cos.clone()), 1.0).unwrap();
            assert!(v.abs() < 1e-12);
        }
        let flat = fixture(PathKind::Invariance, vec![2.0; 5]);
        assert!((path_potential_unit(&flat, 2.0).unwrap() - 1.0).abs() < 1e-12);
        // the δ = 0 anchor caps an instantly silenced curve at 0.8 on this grid
        let dead = fixture(PathKind::Selectivity, vec![0.0; 5]);
        assert!((path_potential_unit(&dead, 2.0).unwrap() - 0.8).abs() < 1e-12);
        assert!(matches!(
            path_potential_unit(&flat, 0.0),
            Err(Error::NonPositiveOptimum(_))
        ));
    }

    #[test]
    fn piecewise_hand_quadrature() {
        let step = 0.1 * PI;
        let p = fixture(PathKind::Invariance, vec![1.0, 1.0, 1.0, 0.0, 0.0]);
        // integrand δ at 0.1π..0.3π, max(0.4π − π/2, 0) = 0, 0.5π − π/2 = 0
        let g = [0.0, step, 2.0 * step, 3.0 * step, 0.0, 0.0];
        let area: f64 = g.windows(2).map(|w| 0.5 * step * (w[0] + w[1])).sum();
        let expected = area / (PI * PI / 8.0);
        assert!((path_potential_unit(&p, 1.0).unwrap() - expected).abs() < 1e-12);

        let s = fixture(PathKind::Selectivity, vec![1.0, 1.0, 1.0, 0.0, 0.0]);
        // θ = 0 for the first three; π/2 − 0.4π, π/2 − 0.5π for the rest
        let g = [0.0, 0.0, 0.0, 0.0, step, 0.0];
        let area: f64 = g.windows(2).map(|w| 0.5 * step * (w[0] + w[1])).sum();
        assert!((path_potential_unit(&s, 1.0).unwrap() - area / (PI * PI / 8.0)).abs() < 1e-12);
    }

    #[test]
    fn population_examples() {
        let p = fixture(PathKind::Invariance, vec![1.0; 5]);
        assert!((path_potential_population(&p).unwrap() - 1.0).abs() < 1e-12);
        let e = (-1.0f64).exp();
        let p = fixture(PathKind::Invariance, vec![e; 5]);
        let step = 0.1 * PI;
        let expected = (0.5 * step * (1.0 + e) + 4.0 * step * e) / (PI / 2.0);
        assert!((path_potential_population(&p).unwrap() - expected).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn bounded(f in proptest::collection::vec(-2.0f64..2.0, 5), opt in 0.1f64..2.0) {
            for kind in [PathKind::Invariance, PathKind::Selectivity] {
                let v = path_potential_unit(&fixture(kind, f.clone()), opt).unwrap();
                prop_assert!((0.0..=1.0).contains(&v));
            }
            let fit: Vec<f64> = f.iter().map(|v| (-v.abs()).exp()).collect();
            let v = path_potential_population(&fixture(PathKind::Invariance, fit)).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
