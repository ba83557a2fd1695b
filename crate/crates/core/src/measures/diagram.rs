//! Fitness-distance diagram: response against angular distance from the
//! optimum for invariance, selectivity and random-walk series.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::{PathKind, PathResult, WalkSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Series {
    Invariance,
    Selectivity,
    RandomWalk,
}

impl Series {
    pub fn label(self) -> &'static str {
        match self {
            Series::Invariance => "invariance",
            Series::Selectivity => "selectivity",
            Series::RandomWalk => "random_walk",
        }
    }
}

impl From<PathKind> for Series {
    fn from(k: PathKind) -> Self {
        match k {
            PathKind::Invariance => Series::Invariance,
            PathKind::Selectivity => Series::Selectivity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdSample {
    pub series: Series,
    pub delta: f64,
    pub fitness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdMean {
    pub series: Series,
    pub delta: f64,
    pub mean: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessDistanceDiagram {
    pub samples: Vec<FdSample>,
    pub means: Vec<FdMean>,
    /// Fitness at δ = 0, when known; enables the arccos view.
    pub optimum_fitness: Option<f64>,
    /// Draw the `cos δ` reference curve.
    pub baseline: bool,
}

/// Collates path and walk samples with `δ ∈ (0, π/2]` (or up to π when
/// a path uses the full range) and averages them per series and δ.
pub fn build_fd_diagram(
    paths: &[PathResult],
    walks: &[WalkSample],
    optimum_fitness: Option<f64>,
) -> Result<FitnessDistanceDiagram> {
    let mut samples = Vec::new();
    for p in paths {
        for (&delta, &fitness) in p.deltas.iter().zip(&p.fitnesses) {
            samples.push(FdSample {
                series: p.kind.into(),
                delta,
                fitness,
            });
        }
    }
    for w in walks.iter().filter(|w| w.delta > 0.0) {
        samples.push(FdSample {
            series: Series::RandomWalk,
            delta: w.delta,
            fitness: w.fitness,
        });
    }
    if samples.is_empty() {
        return Err(Error::EmptySet);
    }
    // deltas come from shared grids, so grouping on the bit pattern is exact
    let mut groups: BTreeMap<(Series, u64), (f64, usize)> = BTreeMap::new();
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
        optimum_fitness,
        baseline: true,
    })
}

impl FitnessDistanceDiagram {
    pub fn mean_at(&self, series: Series, delta: f64) -> Option<f64> {
        self.means
            .iter()
            .find(|m| m.series == series && (m.delta - delta).abs() < 1e-12)
            .map(|m| m.mean)
    }

    /// Samples mapped to equivalent angles `arccos(f / f(x̂))`, comparable
    /// with the diagonal of an inner-product unit.
    pub fn arccos_view(&self) -> Option<Vec<FdSample>> {
        let opt = self.optimum_fitness.filter(|f| *f > 0.0)?;
        Some(
            self.samples
                .iter()
                .map(|s| FdSample {
                    fitness: (s.fitness / opt).clamp(-1.0, 1.0).acos(),
                    ..*s
                })
                .collect(),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("series,delta,fitness\n");
        for s in &self.samples {
            out.push_str(&format!("{},{},{}\n", s.series.label(), s.delta, s.fitness));
        }
        out
    }
}
