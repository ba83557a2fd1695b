//! Shallow versus deep unit comparison: optimal-stimulus complexity and
//! path potentials of single units drawn from two network populations.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::characterize::{characterize, CharacterizeOptions};
use crate::error::{Error, Result};
use crate::measures::{FdMean, FitnessDistanceDiagram, FdSample, Series};
use crate::rng::rng_from_seed;
use crate::search::{ConstraintAudit, SearchConfig};
use crate::seed_path;
use crate::stats::{d_prime, permutation_test, Statistic};
use crate::targets::{unit_view, TargetHandle};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DepthConfig {
    pub search: SearchConfig,
    /// Top-layer units characterized per network.
    pub units_per_network: usize,
    pub walks: usize,
    pub n_perm: usize,
    pub seed: u64,
}

impl Default for DepthConfig {
    fn default() -> Self {
        Self {
            search: SearchConfig::default(),
            units_per_network: 1,
            walks: 20,
            n_perm: 10_000,
            seed: 0,
        }
    }
}

/// Scalar summary of one characterized unit. Path and walk curves are
/// divided by the unit's optimum fitness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitSummary {
    pub network: usize,
    pub unit: usize,
    pub optimum_fitness: f64,
    pub ossc: Option<f64>,
    pub inpp: Option<f64>,
    pub slpp: Option<f64>,
    pub deltas: Vec<f64>,
    pub invariance: Vec<f64>,
    pub selectivity: Vec<f64>,
    /// `(δ, f / f(x̂))` for every random-walk sample.
    pub walks: Vec<(f64, f64)>,
    pub audit: ConstraintAudit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contrast {
    pub measure: String,
    pub mean_shallow: f64,
    pub mean_deep: f64,
    pub n_shallow: usize,
    pub n_deep: usize,
    pub d_prime: Option<f64>,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthStudy {
    pub shallow: Vec<UnitSummary>,
    pub deep: Vec<UnitSummary>,
    pub contrasts: Vec<Contrast>,
    pub deep_diagram: FitnessDistanceDiagram,
}

impl DepthStudy {
    pub fn contrast(&self, measure: &str) -> Option<&Contrast> {
        self.contrasts.iter().find(|c| c.measure == measure)
    }
}

/// Characterizes `units_per_network` randomly chosen output units of every
/// network. `label` separates the seed streams of different populations.
pub fn unit_survey(
    population: &[TargetHandle],
    config: &DepthConfig,
    label: &str,
) -> Result<Vec<UnitSummary>> {
    let options = CharacterizeOptions {
        subspace: false,
        walks: config.walks,
        ..CharacterizeOptions::default()
    };
    let jobs: Vec<(usize, usize)> = population
        .iter()
        .enumerate()
        .flat_map(|(i, net)| {
            let mut rng = rng_from_seed(seed_path!(config.seed, label, "units", i));
            let r = net.response_dim();
            (0..config.units_per_network).map(move |_| (i, rng.random_range(0..r))).collect::<Vec<_>>()
        })
        .collect();
    jobs.par_iter()
        .enumerate()
        .map(|(k, &(i, j))| {
            let unit = unit_view(population[i].clone(), j)?;
            let search = config
                .search
                .clone()
                .with_seed(seed_path!(config.seed, label, "unit", k));
            let c = characterize(&unit, &search, &options, None)?;
            let f = c.optimal.fitness_at_optimum;
            let norm = |v: f64| if f > 0.0 { v / f } else { f64::NAN };
            let inv = c.invariance.as_ref().expect("invariance enabled");
            let sel = c.selectivity.as_ref().expect("selectivity enabled");
            Ok(UnitSummary {
                network: i,
                unit: j,
                optimum_fitness: f,
                ossc: c.report.ossc,
                inpp: c.report.inpp,
                slpp: c.report.slpp,
                deltas: inv.deltas.clone(),
                invariance: inv.fitnesses.iter().map(|&v| norm(v)).collect(),
                selectivity: sel.fitnesses.iter().map(|&v| norm(v)).collect(),
                walks: c.walks.iter().map(|w| (w.delta, norm(w.fitness))).collect(),
                audit: c.audit,
            })
        })
        .collect()
}

fn values(units: &[UnitSummary], pick: fn(&UnitSummary) -> Option<f64>) -> Vec<f64> {
    units.iter().filter_map(pick).filter(|v| v.is_finite()).collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Mean, d′ and two-sided permutation p for OSSC, INPP and SLPP.
pub fn compare_depths(
    shallow: &[UnitSummary],
    deep: &[UnitSummary],
    n_perm: usize,
    seed: u64,
) -> Vec<Contrast> {
    let measures: [(&str, fn(&UnitSummary) -> Option<f64>); 3] = [
        ("OSSC", |u| u.ossc),
        ("INPP", |u| u.inpp),
        ("SLPP", |u| u.slpp),
    ];
    measures
        .iter()
        .map(|&(name, pick)| {
            let a = values(shallow, pick);
            let b = values(deep, pick);
            Contrast {
                measure: name.to_string(),
                mean_shallow: mean(&a),
                mean_deep: mean(&b),
                n_shallow: a.len(),
                n_deep: b.len(),
                d_prime: d_prime(&a, &b).ok(),
                p_value: permutation_test(&a, &b, Statistic::MeanDiff, n_perm, seed_path!(seed, name))
                    .ok(),
            }
        })
        .collect()
}

/// Fitness-distance diagram pooled over units, in units of `f(x̂)`.
pub fn pooled_diagram(units: &[UnitSummary]) -> Result<FitnessDistanceDiagram> {
    let mut samples = Vec::new();
    for u in units.iter().filter(|u| u.optimum_fitness > 0.0) {
        for (series, curve) in [(Series::Invariance, &u.invariance), (Series::Selectivity, &u.selectivity)] {
            for (&delta, &fitness) in u.deltas.iter().zip(curve) {
                samples.push(FdSample {
                    series,
                    delta,
                    fitness,
                });
            }
        }
        for &(delta, fitness) in u.walks.iter().filter(|w| w.0 > 0.0) {
            samples.push(FdSample {
                series: Series::RandomWalk,
                delta,
                fitness,
            });
        }
    }
    if samples.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut groups: std::collections::BTreeMap<(Series, u64), (f64, usize)> = Default::default();
    for s in &samples {
        let e = groups.entry((s.series, s.delta.to_bits())).or_insert((0.0, 0));
        e.0 += s.fitness;
        e.1 += 1;
    }
    let mut means: Vec<FdMean> = groups
        .into_iter()
        .map(|((series, bits), (sum, count))| FdMean {
            series,
            delta: f64::from_bits(bits),
            mean: sum / count as f64,
            count,
        })
        .collect();
    means.sort_by(|a, b| a.series.cmp(&b.series).then(a.delta.total_cmp(&b.delta)));
    Ok(FitnessDistanceDiagram {
        samples,
        means,
        optimum_fitness: Some(1.0),
        baseline: true,
    })
}

pub fn run_depth_study(
    shallow: &[TargetHandle],
    deep: &[TargetHandle],
    config: &DepthConfig,
) -> Result<DepthStudy> {
    config.search.validate()?;
    if shallow.is_empty() || deep.is_empty() {
        return Err(Error::EmptySet);
    }
    let s = unit_survey(shallow, config, "shallow")?;
    let d = unit_survey(deep, config, "deep")?;
    let contrasts = compare_depths(&s, &d, config.n_perm, seed_path!(config.seed, "contrast"));
    let deep_diagram = pooled_diagram(&d)?;
    Ok(DepthStudy {
        shallow: s,
        deep: d,
        contrasts,
        deep_diagram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stimulus::sample_pink_noise;
    use crate::targets::{linear_neuron, FnTarget};
    use std::sync::Arc;

    #[test]
    fn linear_against_energy_unit() {
        let mut rng = rng_from_seed(11);
        let lin: Vec<TargetHandle> = (0..4)
            .map(|_| linear_neuron(&sample_pink_noise(3, 3, -1.0, 1.0, &mut rng).unwrap()).unwrap())
            .collect();
        let sq: Vec<TargetHandle> = (0..4)
            .map(|k| {
                let t: TargetHandle = Arc::new(FnTarget::scalar((3, 3), move |x| {
                    let a = x[k] - x[(k + 1) % 9];
                    let b = x[(k + 2) % 9] - x[(k + 3) % 9];
                    (a * a + b * b).sqrt()
                }));
                t
            })
            .collect();
        let config = DepthConfig {
            search: SearchConfig {
                n_candidates: 50,
                ..SearchConfig::default()
            },
            walks: 5,
            n_perm: 200,
            ..DepthConfig::default()
        };
        let study = run_depth_study(&lin, &sq, &config).unwrap();
        assert_eq!(study.shallow.len(), 4);
        let inpp = study.contrast("INPP").unwrap();
        // an energy unit keeps its optimum along a whole circle of stimuli
        assert!(inpp.mean_deep > inpp.mean_shallow + 0.3, "{inpp:?}");
        assert!(study.shallow.iter().all(|u| u.audit.passed()));
        let d = &study.deep_diagram;
        assert!(d.means.iter().all(|m| m.mean <= 1.0 + 1e-9));
    }
}
