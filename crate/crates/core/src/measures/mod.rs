//! Representation measures and the fitness-distance diagram.

mod diagram;
mod path;
mod spectral;
mod ssim;
mod subspace;

use serde::{Deserialize, Serialize};

pub use diagram::{build_fd_diagram, FdMean, FdSample, FitnessDistanceDiagram, Series};
pub use path::{path_potential_population, path_potential_unit};
pub use spectral::{explanation_power, spectral_complexity};
pub use ssim::{encoding_specificity, ssim, SsimParams};
pub use subspace::{
    alignment_of, nuclear_capacity, subspace_alignment, subspace_capacity, AlignmentScore,
    PcaBasis,
};

use crate::search::SearchConfig;

/// Budgets, run counts and seed behind a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub dimension: usize,
    pub optimal_budget: usize,
    pub optimal_runs: usize,
    pub path_budget: usize,
    pub reconstruct_budget: usize,
    pub subspace_runs: usize,
    pub reconstruction_runs: usize,
    pub init_candidates: usize,
}

impl Provenance {
    pub fn new(config: &SearchConfig, dimension: usize) -> Self {
        Self {
            seed: config.seed,
            dimension,
            optimal_budget: config.optimal_budget_per_dim * dimension,
            optimal_runs: config.optimal_runs,
            path_budget: config.path_budget_per_dim * dimension,
            reconstruct_budget: config.reconstruct_budget_per_dim * dimension,
            subspace_runs: config.subspace_runs,
            reconstruction_runs: config.reconstruction_runs,
            init_candidates: config.n_candidates,
        }
    }
}

/// Measures for one neuron or population. Entries that could not be
/// computed are `None`, with the reason listed in `missing`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub ossc: Option<f64>,
    pub osep: Option<f64>,
    pub tses: Option<f64>,
    pub inpp: Option<f64>,
    pub slpp: Option<f64>,
    pub insc: Option<f64>,
    pub itsa: Option<f64>,
    pub stsa: Option<f64>,
    /// `(raw − 1)/(√N − 1)` variants of the alignment scores.
    pub itsa_scaled: Option<f64>,
    pub stsa_scaled: Option<f64>,
    /// Alignment scores minus the reference stimulus's own score.
    pub itsa_relative: Option<f64>,
    pub stsa_relative: Option<f64>,
    pub missing: Vec<String>,
    pub provenance: Provenance,
}

impl MeasureReport {
    pub fn empty(provenance: Provenance) -> Self {
        Self {
            ossc: None,
            osep: None,
            tses: None,
            inpp: None,
            slpp: None,
            insc: None,
            itsa: None,
            stsa: None,
            itsa_scaled: None,
            stsa_scaled: None,
            itsa_relative: None,
            stsa_relative: None,
            missing: Vec::new(),
            provenance,
        }
    }

    /// Stores `value` or records why it is missing.
    pub fn record<T>(&mut self, name: &str, value: crate::Result<T>) -> Option<T> {
        match value {
            Ok(v) => Some(v),
            Err(e) => {
                self.missing.push(format!("{name}: {e}"));
                None
            }
        }
    }
}
