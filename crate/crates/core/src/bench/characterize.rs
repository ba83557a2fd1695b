//! Full characterization of one scalar unit: optimum, both paths, optional
//! subspace samples, random walks, the diagram, and the unit measures.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::measures::{
    build_fd_diagram, explanation_power, path_potential_unit, spectral_complexity,
    subspace_alignment, subspace_capacity, FitnessDistanceDiagram, MeasureReport, PcaBasis,
    Provenance,
};
use crate::rng::rng_from_seed;
use crate::search::{
    optimal_stimulus, path_run, random_walk_curve, subspace_sample, ConstraintAudit,
    OptimalStimulusResult, PathKind, PathResult, SearchConfig, SubspaceSample, WalkSample,
};
use crate::seed_path;
use crate::stimulus::StimulusSet;
use crate::targets::TargetHandle;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CharacterizeOptions {
    /// Run the δ-grid paths; `invariance`/`selectivity` pick the kinds for
    /// both paths and subspace samples.
    pub paths: bool,
    pub invariance: bool,
    pub selectivity: bool,
    pub subspace: bool,
    pub walks: usize,
    /// Fraction of task stimuli entering the explanation power.
    pub osep_top_fraction: f64,
}

impl Default for CharacterizeOptions {
    fn default() -> Self {
        Self {
            paths: true,
            invariance: true,
            selectivity: true,
            subspace: true,
            walks: 20,
            osep_top_fraction: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Characterization {
    pub optimal: OptimalStimulusResult,
    pub invariance: Option<PathResult>,
    pub selectivity: Option<PathResult>,
    pub subspace_invariance: Option<SubspaceSample>,
    pub subspace_selectivity: Option<SubspaceSample>,
    pub walks: Vec<WalkSample>,
    pub diagram: Option<FitnessDistanceDiagram>,
    pub report: MeasureReport,
    pub audit: ConstraintAudit,
}

impl Characterization {
    /// Unit measures computed from the stored search outputs alone.
    pub fn unit_report(
        &self,
        config: &SearchConfig,
        options: &CharacterizeOptions,
        task: Option<&StimulusSet>,
    ) -> MeasureReport {
        let mut report = MeasureReport::empty(Provenance::new(config, self.optimal.x_hat.len()));
        report.ossc = report.record("ossc", spectral_complexity(&self.optimal.x_hat));
        let f_opt = self.optimal.fitness_at_optimum;
        if let Some(p) = &self.invariance {
            report.inpp = report.record("inpp", path_potential_unit(p, f_opt));
        }
        if let Some(p) = &self.selectivity {
            report.slpp = report.record("slpp", path_potential_unit(p, f_opt));
        }
        if let Some(s) = &self.subspace_invariance {
            report.insc = report.record("insc", subspace_capacity(s));
        }
        match task {
            Some(task) => {
                report.osep = report.record(
                    "osep",
                    explanation_power(&self.optimal.x_hat, task, options.osep_top_fraction),
                );
                match PcaBasis::fit(task) {
                    Ok(basis) => {
                        if let Some(s) = &self.subspace_invariance {
                            if let Some(a) = report.record("itsa", subspace_alignment(s, &basis, None)) {
                                report.itsa = Some(a.raw);
                                report.itsa_scaled = Some(a.scaled);
                            }
                        }
                        if let Some(s) = &self.subspace_selectivity {
                            if let Some(a) = report.record("stsa", subspace_alignment(s, &basis, None)) {
                                report.stsa = Some(a.raw);
                                report.stsa_scaled = Some(a.scaled);
                            }
                        }
                    }
                    Err(e) => report.missing.push(format!("itsa/stsa: {e}")),
                }
            }
            None => report.missing.push("osep/itsa/stsa: no task stimuli".into()),
        }
        report.missing.push("tses: unit characterization has no reference stimuli".into());
        report
    }

    fn with_report(
        mut self,
        config: &SearchConfig,
        options: &CharacterizeOptions,
        task: Option<&StimulusSet>,
    ) -> Self {
        self.report = self.unit_report(config, options, task);
        self
    }
}

/// Runs the unit pipeline on an `R = 1` target. Task-dependent measures are
/// filled in only when `task` is given.
pub fn characterize(
    target: &TargetHandle,
    config: &SearchConfig,
    options: &CharacterizeOptions,
    task: Option<&StimulusSet>,
) -> Result<Characterization> {
    let optimal = optimal_stimulus(target.as_ref(), config)?;
    let x_hat = &optimal.x_hat;
    let mut audit = ConstraintAudit::default();
    audit.check_sphere("optimal", x_hat, config.energy);

    let run_path = |on: bool, kind| -> Result<Option<PathResult>> {
        on.then(|| path_run(kind, target, x_hat, config, 0)).transpose()
    };
    let invariance = run_path(options.paths && options.invariance, PathKind::Invariance)?;
    let selectivity = run_path(options.paths && options.selectivity, PathKind::Selectivity)?;
    let sample = |kind| {
        subspace_sample(kind, target, x_hat, config.subspace_delta, config.subspace_runs, config)
    };
    let (subspace_invariance, subspace_selectivity) = if options.subspace {
        (
            options.invariance.then(|| sample(PathKind::Invariance)).transpose()?,
            options.selectivity.then(|| sample(PathKind::Selectivity)).transpose()?,
        )
    } else {
        (None, None)
    };
    let walks = if options.walks > 0 {
        let mut rng = rng_from_seed(seed_path!(config.seed, "walks"));
        random_walk_curve(target, x_hat, &config.deltas, options.walks, &mut rng)?
    } else {
        Vec::new()
    };

    for p in invariance.iter().chain(&selectivity) {
        audit.check_path("unit", p, x_hat);
    }
    for s in subspace_invariance.iter().chain(&subspace_selectivity) {
        audit.check_subspace("unit", s, x_hat);
    }

    let f_opt = optimal.fitness_at_optimum;
    let dim = x_hat.len();
    let paths: Vec<PathResult> = invariance.iter().chain(&selectivity).cloned().collect();
    let diagram = if paths.is_empty() && walks.is_empty() {
        None
    } else {
        Some(build_fd_diagram(&paths, &walks, Some(f_opt))?)
    };
    Ok(Characterization {
        optimal,
        invariance,
        selectivity,
        subspace_invariance,
        subspace_selectivity,
        walks,
        diagram,
        report: MeasureReport::empty(Provenance::new(config, dim)),
        audit,
    }
    .with_report(config, options, task))
}
