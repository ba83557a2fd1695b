//! Characterization procedures built on the solver: optimal stimuli,
//! invariance and selectivity paths, subspace samples, reconstructions, and
//! random walks.
//!
//! Scalar (`R = 1`) targets are probed through their raw response. Vector
//! targets are turned into a scalar with [`match_fitness`] anchored at the
//! response to `x_hat`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};
use crate::seed_path;
use crate::solver::{
    maximize, minimize, seeded_init, Constraint, InitRecord, SearchTrace, SolverConfig,
    SolverOutcome, Termination,
};
use crate::stimulus::{
    angular_distance, pgm_strip, project_cone_raw, random_orthogonal_unit, Stimulus, SPHERE_TOL,
};
use crate::targets::{match_fitness, ResponseVector, Target, TargetHandle};

pub const CONE_TOL: f64 = 1e-6;

pub fn default_deltas() -> Vec<f64> {
    (1..=5).map(|k| k as f64 * 0.1 * PI).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Shared solver settings; budgets and seeds are overridden per job.
    pub solver: SolverConfig,
    pub optimal_budget_per_dim: usize,
    pub path_budget_per_dim: usize,
    pub reconstruct_budget_per_dim: usize,
    pub optimal_runs: usize,
    /// Initial step for cone searches (warm starts sit near solutions).
    pub path_step: f64,
    pub deltas: Vec<f64>,
    /// Permit δ up to π instead of π/2.
    pub full_range: bool,
    pub alpha_set: Vec<f64>,
    pub n_candidates: usize,
    pub subspace_delta: f64,
    pub subspace_runs: usize,
    pub reconstruction_runs: usize,
    pub energy: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            optimal_budget_per_dim: 100,
            path_budget_per_dim: 20,
            reconstruct_budget_per_dim: 100,
            optimal_runs: 2,
            path_step: 0.1,
            deltas: default_deltas(),
            full_range: false,
            alpha_set: vec![-4.0, -3.0, -2.0, -1.0, 0.0],
            n_candidates: 1000,
            subspace_delta: 0.1 * PI,
            subspace_runs: 20,
            reconstruction_runs: 10,
            energy: 1.0,
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Same settings with a seed scoped to a sub-job.
    pub fn scoped(&self, label: &str, index: usize) -> Self {
        let mut c = self.clone();
        c.seed = seed_path!(self.seed, label, index);
        c
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.optimal_runs == 0 || self.subspace_runs == 0 || self.reconstruction_runs == 0 {
            return bad("run counts must be at least 1".into());
        }
        if self.optimal_budget_per_dim == 0
            || self.path_budget_per_dim == 0
            || self.reconstruct_budget_per_dim == 0
        {
            return bad("budgets must be positive".into());
        }
        if !(self.path_step > 0.0) || !(self.energy > 0.0) || !self.energy.is_finite() {
            return bad("path_step and energy must be positive".into());
        }
        if self.deltas.is_empty() {
            return bad("delta grid is empty".into());
        }
        let cap = if self.full_range { PI } else { PI / 2.0 };
        let mut prev = 0.0;
        for &d in self.deltas.iter().chain(std::iter::once(&self.subspace_delta)) {
            if !(d > 0.0 && d <= cap + 1e-12) {
                return bad(format!("delta {d} outside (0, {cap}]"));
            }
        }
        for &d in &self.deltas {
            if d <= prev {
                return bad("delta grid must be strictly increasing".into());
            }
            prev = d;
        }
        Ok(())
    }

    fn solver_for(&self, budget: usize, step: f64, seed: u64) -> SolverConfig {
        let mut s = self.solver.clone();
        s.max_evaluations = budget;
        s.initial_step = step;
        s.seed = seed;
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Invariance,
    Selectivity,
}

impl PathKind {
    pub fn label(self) -> &'static str {
        match self {
            PathKind::Invariance => "invariance",
            PathKind::Selectivity => "selectivity",
        }
    }

    fn run(
        self,
        objective: &(dyn Fn(&Stimulus) -> f64 + Sync),
        constraint: &Constraint,
        x0: &[f64],
        config: &SolverConfig,
    ) -> Result<SolverOutcome> {
        match self {
            PathKind::Invariance => maximize(objective, constraint, x0, config),
            PathKind::Selectivity => minimize(objective, constraint, x0, config),
        }
    }
}

/// One seeded-init + maximize run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalRun {
    pub fitness: f64,
    pub init: InitRecord,
    pub evaluations: usize,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalStimulusResult {
    pub x_hat: Stimulus,
    pub fitness_at_optimum: f64,
    pub trace: SearchTrace,
    pub init_source: InitRecord,
    pub chosen_run: usize,
    pub runs: Vec<OptimalRun>,
    pub budget_per_run: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub kind: PathKind,
    pub deltas: Vec<f64>,
    pub points: Vec<Stimulus>,
    pub fitnesses: Vec<f64>,
    /// Objective value at `x_hat` itself.
    pub optimum_fitness: f64,
    pub evaluations: Vec<usize>,
    pub run_index: usize,
}

impl PathResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("delta,fitness\n");
        for (d, f) in self.deltas.iter().zip(&self.fitnesses) {
            s.push_str(&format!("{d},{f}\n"));
        }
        s
    }

    pub fn to_pgm_strip(&self) -> Vec<u8> {
        pgm_strip(&self.points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceSample {
    pub kind: PathKind,
    pub delta: f64,
    pub columns: Vec<Stimulus>,
    pub fitnesses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionSet {
    pub reference: Stimulus,
    pub reference_response: ResponseVector,
    pub reconstructions: Vec<Stimulus>,
    pub fitnesses: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkSample {
    pub walk: usize,
    pub delta: f64,
    pub fitness: f64,
}

fn require_scalar(target: &dyn Target) -> Result<()> {
    if target.response_dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            actual: target.response_dim(),
        });
    }
    Ok(())
}

fn scalar(target: &dyn Target) -> impl Fn(&Stimulus) -> f64 + Sync + '_ {
    move |x: &Stimulus| target.respond(x.values())[0]
}

/// The scalar probed along paths: the raw response for `R = 1`, otherwise
/// the match fitness to `f(x_hat)`.
pub fn path_objective(target: &TargetHandle, x_hat: &Stimulus) -> Result<TargetHandle> {
    if target.response_dim() == 1 {
        x_hat.check_shape(target.input_shape())?;
        Ok(target.clone())
    } else {
        let r = target.evaluate(x_hat)?;
        match_fitness(target.clone(), &r)
    }
}

/// Best of `config.optimal_runs` runs of seeded init followed by
/// maximization on the energy sphere, each with `optimal_budget_per_dim · N`
/// evaluations.
pub fn optimal_stimulus(target: &dyn Target, config: &SearchConfig) -> Result<OptimalStimulusResult> {
    config.validate()?;
    require_scalar(target)?;
    let shape = target.input_shape();
    let n = shape.0 * shape.1;
    let budget = config.optimal_budget_per_dim * n;
    let objective = scalar(target);
    let constraint = Constraint::Sphere {
        height: shape.0,
        width: shape.1,
        energy: config.energy,
    };
    let mut best: Option<(usize, SolverOutcome, InitRecord)> = None;
    let mut runs = Vec::with_capacity(config.optimal_runs);
    for run in 0..config.optimal_runs {
        let mut rng = rng_from_seed(seed_path!(config.seed, "optimal", run, "init"));
        let (x0, init) = seeded_init(
            &objective,
            shape,
            config.energy,
            config.n_candidates,
            &config.alpha_set,
            &mut rng,
        )?;
        let solver = config.solver_for(
            budget,
            config.solver.initial_step,
            seed_path!(config.seed, "optimal", run, "solver"),
        );
        let out = maximize(&objective, &constraint, x0.values(), &solver)?;
        runs.push(OptimalRun {
            fitness: out.best_fitness,
            init: init.clone(),
            evaluations: out.trace.evaluations,
            termination: out.trace.termination_reason,
        });
        if best.as_ref().map_or(true, |(_, b, _)| out.best_fitness > b.best_fitness) {
            best = Some((run, out, init));
        }
    }
    let (chosen_run, out, init_source) = best.expect("at least one run");
    Ok(OptimalStimulusResult {
        x_hat: out.best,
        fitness_at_optimum: out.best_fitness,
        trace: out.trace,
        init_source,
        chosen_run,
        runs,
        budget_per_run: budget,
    })
}

fn path(
    kind: PathKind,
    target: &TargetHandle,
    x_hat: &Stimulus,
    config: &SearchConfig,
    run_index: usize,
) -> Result<PathResult> {
    config.validate()?;
    let objective_target = path_objective(target, x_hat)?;
    let objective = scalar(objective_target.as_ref());
    let n = x_hat.len();
    let budget = config.path_budget_per_dim * n;
    let mut points = Vec::with_capacity(config.deltas.len());
    let mut fitnesses = Vec::with_capacity(config.deltas.len());
    let mut evaluations = Vec::with_capacity(config.deltas.len());
    // the first cone search starts from x_hat itself; later ones from the
    // previous solution re-projected onto the new cone
    let mut mean = x_hat.values().to_vec();
    for (k, &delta) in config.deltas.iter().enumerate() {
        let constraint = Constraint::Cone {
            x_hat: x_hat.clone(),
            delta,
        };
        if k > 0 {
            mean = project_cone_raw(&mean, x_hat, delta)?.into_values();
        }
        let solver = config.solver_for(
            budget,
            config.path_step,
            seed_path!(config.seed, kind.label(), run_index, k),
        );
        let out = kind.run(&objective, &constraint, &mean, &solver)?;
        mean = out.best.values().to_vec();
        evaluations.push(out.trace.evaluations);
        fitnesses.push(out.best_fitness);
        points.push(out.best);
    }
    Ok(PathResult {
        kind,
        deltas: config.deltas.clone(),
        points,
        fitnesses,
        optimum_fitness: objective(x_hat),
        evaluations,
        run_index,
    })
}

/// Per-δ constrained maximizers, chained by warm starts.
pub fn invariance_path(
    target: &TargetHandle,
    x_hat: &Stimulus,
    config: &SearchConfig,
) -> Result<PathResult> {
    path(PathKind::Invariance, target, x_hat, config, 0)
}

/// Per-δ constrained minimizers, chained by warm starts.
pub fn selectivity_path(
    target: &TargetHandle,
    x_hat: &Stimulus,
    config: &SearchConfig,
) -> Result<PathResult> {
    path(PathKind::Selectivity, target, x_hat, config, 0)
}

/// As [`invariance_path`] / [`selectivity_path`] with an explicit run index
/// feeding the seed derivation.
pub fn path_run(
    kind: PathKind,
    target: &TargetHandle,
    x_hat: &Stimulus,
    config: &SearchConfig,
    run_index: usize,
) -> Result<PathResult> {
    path(kind, target, x_hat, config, run_index)
}

/// `n` independent cone searches at `delta` from random initial cone points.
pub fn subspace_sample(
    kind: PathKind,
    target: &TargetHandle,
    x_hat: &Stimulus,
    delta: f64,
    n: usize,
    config: &SearchConfig,
) -> Result<SubspaceSample> {
    config.validate()?;
    if n == 0 {
        return Err(Error::TooFew {
            required: 1,
            actual: 0,
        });
    }
    let cap = if config.full_range { PI } else { PI / 2.0 };
    if !(delta > 0.0 && delta <= cap + 1e-12) {
        return Err(Error::InvalidConfig(format!("delta {delta} outside (0, {cap}]")));
    }
    let objective_target = path_objective(target, x_hat)?;
    let objective = scalar(objective_target.as_ref());
    let budget = config.path_budget_per_dim * x_hat.len();
    let constraint = Constraint::Cone {
        x_hat: x_hat.clone(),
        delta,
    };
    let outcomes: Vec<Result<SolverOutcome>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(seed_path!(config.seed, "subspace", kind.label(), i));
            let start = cone_point(x_hat, delta, &mut rng)?;
            let solver = config.solver_for(
                budget,
                config.path_step,
                seed_path!(config.seed, "subspace", kind.label(), i, "solver"),
            );
            kind.run(&objective, &constraint, start.values(), &solver)
        })
        .collect();
    let mut columns = Vec::with_capacity(n);
    let mut fitnesses = Vec::with_capacity(n);
    for out in outcomes {
        let out = out?;
        fitnesses.push(out.best_fitness);
        columns.push(out.best);
    }
    Ok(SubspaceSample {
        kind,
        delta,
        columns,
        fitnesses,
    })
}

/// `cos δ · x_hat + sin δ · x̃` for a random unit-energy `x̃ ⟂ x_hat`.
pub fn cone_point(x_hat: &Stimulus, delta: f64, rng: &mut Rng) -> Result<Stimulus> {
    let tilde = random_orthogonal_unit(x_hat, rng)?;
    let (s, c) = delta.sin_cos();
    let e = x_hat.energy();
    let raw: Vec<f64> = x_hat
        .values()
        .iter()
        .zip(tilde.values())
        .map(|(a, b)| c * a + s * e * b / tilde.energy())
        .collect();
    Stimulus::new(raw, x_hat.height(), x_hat.width())
}

/// Inverts the response to `x_star`: `n` unconstrained-by-distance
/// maximizations of the match fitness, each from its own seeded init.
pub fn reconstruct(
    target: &TargetHandle,
    x_star: &Stimulus,
    n: usize,
    config: &SearchConfig,
) -> Result<ReconstructionSet> {
    config.validate()?;
    if n == 0 {
        return Err(Error::TooFew {
            required: 1,
            actual: 0,
        });
    }
    let r = target.evaluate(x_star)?;
    let m = match_fitness(target.clone(), &r)?;
    let objective = scalar(m.as_ref());
    let shape = x_star.shape();
    let energy = x_star.energy();
    let constraint = Constraint::sphere_like(x_star);
    let budget = config.reconstruct_budget_per_dim * x_star.len();
    let outcomes: Vec<Result<SolverOutcome>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(seed_path!(config.seed, "reconstruct", i, "init"));
            let (x0, _) = seeded_init(
                &objective,
                shape,
                energy,
                config.n_candidates,
                &config.alpha_set,
                &mut rng,
            )?;
            let solver = config.solver_for(
                budget,
                config.solver.initial_step,
                seed_path!(config.seed, "reconstruct", i, "solver"),
            );
            maximize(&objective, &constraint, x0.values(), &solver)
        })
        .collect();
    let mut reconstructions = Vec::with_capacity(n);
    let mut fitnesses = Vec::with_capacity(n);
    for out in outcomes {
        let out = out?;
        fitnesses.push(out.best_fitness);
        reconstructions.push(out.best);
    }
    Ok(ReconstructionSet {
        reference: x_star.clone(),
        reference_response: r,
        reconstructions,
        fitnesses,
    })
}

/// Fitness along `n_walks` random great-circle directions away from `x_hat`.
/// Each walk reuses one orthogonal direction across all `deltas`.
pub fn random_walk_curve(
    target: &TargetHandle,
    x_hat: &Stimulus,
    deltas: &[f64],
    n_walks: usize,
    rng: &mut Rng,
) -> Result<Vec<WalkSample>> {
    if n_walks == 0 {
        return Err(Error::TooFew {
            required: 1,
            actual: 0,
        });
    }
    let objective_target = path_objective(target, x_hat)?;
    let mut samples = Vec::with_capacity(n_walks * deltas.len());
    let e = x_hat.energy();
    for walk in 0..n_walks {
        let tilde = random_orthogonal_unit(x_hat, rng)?;
        for &delta in deltas {
            let (s, c) = delta.sin_cos();
            let raw: Vec<f64> = x_hat
                .values()
                .iter()
                .zip(tilde.values())
                .map(|(a, b)| c * a + s * e * b / tilde.energy())
                .collect();
            let fitness = objective_target.respond(&raw)[0];
            samples.push(WalkSample {
                walk,
                delta,
                fitness,
            });
        }
    }
    Ok(samples)
}

/// Post-hoc constraint check over emitted stimuli.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstraintAudit {
    pub sphere_checked: usize,
    pub cone_checked: usize,
    pub violations: Vec<String>,
}

impl ConstraintAudit {
    pub fn check_sphere(&mut self, label: &str, x: &Stimulus, energy: f64) {
        self.sphere_checked += 1;
        let err = (x.norm() - energy).abs();
        if !(err <= SPHERE_TOL * energy) {
            self.violations.push(format!("{label}: norm off by {err:e}"));
        }
    }

    pub fn check_cone(&mut self, label: &str, x: &Stimulus, x_hat: &Stimulus, delta: f64) {
        self.check_sphere(label, x, x_hat.energy());
        self.cone_checked += 1;
        let cos = x.dot(x_hat) / (x.norm() * x_hat.norm());
        let angle = angular_distance(x, x_hat).unwrap_or(f64::NAN);
        if !((cos - delta.cos()).abs() <= CONE_TOL) || !((angle - delta).abs() <= CONE_TOL.sqrt())
        {
            self.violations
                .push(format!("{label}: angle {angle} instead of {delta}"));
        }
    }

    pub fn check_path(&mut self, label: &str, path: &PathResult, x_hat: &Stimulus) {
        for (k, (p, &d)) in path.points.iter().zip(&path.deltas).enumerate() {
            self.check_cone(&format!("{label}/{}/{k}", path.kind.label()), p, x_hat, d);
        }
    }

    pub fn check_subspace(&mut self, label: &str, sample: &SubspaceSample, x_hat: &Stimulus) {
        for (i, c) in sample.columns.iter().enumerate() {
            self.check_cone(
                &format!("{label}/subspace-{}/{i}", sample.kind.label()),
                c,
                x_hat,
                sample.delta,
            );
        }
    }

    pub fn merge(&mut self, other: ConstraintAudit) {
        self.sphere_checked += other.sphere_checked;
        self.cone_checked += other.cone_checked;
        self.violations.extend(other.violations);
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stimulus::{dot, norm, project_sphere, sample_pink_noise};
    use crate::targets::{constant_target, linear_neuron, quadratic_neuron, FnTarget};
    use nalgebra::{DMatrix, DVector, SymmetricEigen};
    use std::sync::Arc;

    fn quick(seed: u64) -> SearchConfig {
        SearchConfig {
            n_candidates: 50,
            ..SearchConfig::default()
        }
        .with_seed(seed)
    }

    fn random_unit(h: usize, w: usize, seed: u64) -> Stimulus {
        sample_pink_noise(h, w, 0.0, 1.0, &mut rng_from_seed(seed)).unwrap()
    }

    #[test]
    fn linear_neuron_optimum_and_paths() {
        let w = random_unit(4, 4, 1);
        let t = linear_neuron(&w).unwrap();
        let opt = optimal_stimulus(t.as_ref(), &quick(2)).unwrap();
        assert!(opt.x_hat.dot(&w) >= 0.99);
        assert_eq!(opt.runs.len(), 2);
        for kind in [PathKind::Invariance, PathKind::Selectivity] {
            let p = path_run(kind, &t, &opt.x_hat, &quick(3), 0).unwrap();
            let mut audit = ConstraintAudit::default();
            audit.check_path("lin", &p, &opt.x_hat);
            assert!(audit.passed(), "{:?}", audit.violations);
            for (f, d) in p.fitnesses.iter().zip(&p.deltas) {
                // w and x_hat differ slightly, so cos δ holds to ~0.01
                assert!((f - d.cos()).abs() < 0.01, "{kind:?} {d} {f}");
                let angle = angular_distance(&p.points[0], &opt.x_hat).unwrap();
                assert!((angle - p.deltas[0]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn rotational_energy_target_stays_invariant() {
        let (h, w) = (4, 4);
        let g1 = random_unit(h, w, 5);
        let mut g2 = random_orthogonal_unit(&g1, &mut rng_from_seed(6)).unwrap();
        g2 = g2.with_energy(1.0).unwrap();
        let (a, b) = (g1.values().to_vec(), g2.values().to_vec());
        let t: TargetHandle = Arc::new(FnTarget::scalar((h, w), move |v: &[f64]| {
            dot(v, &a).powi(2) + dot(v, &b).powi(2)
        }));
        let opt = optimal_stimulus(t.as_ref(), &quick(7)).unwrap();
        let p = invariance_path(&t, &opt.x_hat, &quick(8)).unwrap();
        for f in &p.fitnesses {
            assert!(*f >= 0.95 * opt.fitness_at_optimum, "{f}");
        }
    }

    #[test]
    fn rectified_selectivity_reaches_zero() {
        let w = random_unit(4, 4, 9);
        let wv = w.values().to_vec();
        let t: TargetHandle = Arc::new(FnTarget::scalar((4, 4), move |v: &[f64]| {
            dot(v, &wv).max(0.0)
        }));
        let opt = optimal_stimulus(t.as_ref(), &quick(1)).unwrap();
        let p = selectivity_path(&t, &opt.x_hat, &quick(2)).unwrap();
        assert!(p.fitnesses[4] < 1e-3, "{:?}", p.fitnesses);
        let mut audit = ConstraintAudit::default();
        audit.check_path("relu", &p, &opt.x_hat);
        assert!(audit.passed());
    }

    #[test]
    fn constant_target_returns_initializer() {
        let t = constant_target((3, 3), vec![2.0]);
        let opt = optimal_stimulus(t.as_ref(), &quick(4)).unwrap();
        assert_eq!(opt.fitness_at_optimum, 2.0);
        assert_eq!(opt.init_source.chosen_index, 0);
        assert!((opt.x_hat.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn quadratic_optimum_and_subspaces() {
        let n = 16;
        let mut rng = rng_from_seed(11);
        let diag = quadratic_spectrum(n);
        let r = random_rotation(n, &mut rng);
        let q = &r * DMatrix::from_diagonal(&DVector::from_vec(diag)) * r.transpose();
        let q = (&q + q.transpose()) * 0.5;
        let t = quadratic_neuron((4, 4), q.clone(), DVector::zeros(n), 0.0).unwrap();
        let eig = SymmetricEigen::new(q);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let top = eig.eigenvectors.column(order[0]).clone_owned();
        let opt = optimal_stimulus(t.as_ref(), &quick(12)).unwrap();
        let cos = opt.x_hat.values().iter().zip(top.iter()).map(|(a, b)| a * b).sum::<f64>();
        assert!(cos.abs() >= 0.99, "{cos}");

        for (kind, idx) in [
            (PathKind::Invariance, [order[0], order[1]]),
            (PathKind::Selectivity, [order[n - 1], order[n - 2]]),
        ] {
            let s = subspace_sample(kind, &t, &opt.x_hat, 0.1 * PI, 4, &quick(13)).unwrap();
            for col in &s.columns {
                let c = col.dot(&opt.x_hat);
                let resid: Vec<f64> = col
                    .values()
                    .iter()
                    .zip(opt.x_hat.values())
                    .map(|(a, b)| a - c * b)
                    .collect();
                let total = dot(&resid, &resid);
                let inside: f64 = idx
                    .iter()
                    .map(|&i| dot(&resid, eig.eigenvectors.column(i).as_slice()).powi(2))
                    .sum();
                assert!(inside / total >= 0.9, "{kind:?} {}", inside / total);
            }
        }
    }

    /// Well separated extremes (3, 2.5 / -2.5, -3) around a flat bulk.
    fn quadratic_spectrum(n: usize) -> Vec<f64> {
        let mut d = vec![3.0, 2.5];
        d.extend((0..n - 4).map(|i| -0.5 + i as f64 / (n - 4) as f64));
        d.extend([-2.5, -3.0]);
        d
    }

    fn random_rotation(n: usize, rng: &mut Rng) -> DMatrix<f64> {
        use rand::Rng as _;
        let m = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
        m.qr().q()
    }

    #[test]
    fn subspace_examples() {
        let w = random_unit(4, 4, 21);
        let t = linear_neuron(&w).unwrap();
        let one = subspace_sample(PathKind::Invariance, &t, &w, 0.1 * PI, 1, &quick(1)).unwrap();
        assert_eq!(one.columns.len(), 1);
        let s = subspace_sample(PathKind::Invariance, &t, &w, 0.1 * PI, 5, &quick(1)).unwrap();
        for f in &s.fitnesses {
            assert!((f - (0.1 * PI).cos()).abs() < 0.01);
        }
        let again = subspace_sample(PathKind::Invariance, &t, &w, 0.1 * PI, 5, &quick(1)).unwrap();
        assert_eq!(s, again);
        let mut audit = ConstraintAudit::default();
        audit.check_subspace("lin", &s, &w);
        assert!(audit.passed() && audit.cone_checked == 5);
    }

    #[test]
    fn reconstruct_identity_and_constant() {
        let x_star = random_unit(4, 4, 31);
        let id = crate::targets::identity_target((4, 4));
        let set = reconstruct(&id, &x_star, 2, &quick(3)).unwrap();
        for r in &set.reconstructions {
            let cos = r.dot(&x_star);
            assert!(cos > 0.99, "{cos}");
        }
        for f in &set.fitnesses {
            assert!(*f > 0.0 && *f <= 1.0);
        }
        let c = constant_target((4, 4), vec![1.0, 2.0]);
        let set = reconstruct(&c, &x_star, 2, &quick(3)).unwrap();
        assert!(set.fitnesses.iter().all(|f| *f == 1.0));
    }

    #[test]
    fn random_walks() {
        let w = random_unit(5, 5, 41);
        let t = linear_neuron(&w).unwrap();
        let mut deltas = vec![0.0];
        deltas.extend(default_deltas());
        let walks = random_walk_curve(&t, &w, &deltas, 4, &mut rng_from_seed(1)).unwrap();
        assert_eq!(walks.len(), 24);
        for s in walks {
            assert!((s.fitness - s.delta.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn audit_flags_violations() {
        let x_hat = project_sphere(&[1.0, 0.0, 0.0, 0.0], 2, 2, 1.0).unwrap();
        let off = project_sphere(&[1.0, 1.0, 0.0, 0.0], 2, 2, 1.0).unwrap();
        let mut audit = ConstraintAudit::default();
        audit.check_cone("x", &off, &x_hat, PI / 4.0);
        assert!(audit.passed());
        audit.check_cone("y", &off, &x_hat, PI / 3.0);
        assert_eq!(audit.violations.len(), 1);
        assert!(norm(off.values()) > 0.0);
    }

    #[test]
    fn config_validation() {
        let mut c = SearchConfig::default();
        c.deltas = vec![0.2, 0.1];
        assert!(c.validate().is_err());
        c.deltas = vec![2.0];
        assert!(c.validate().is_err());
        c.full_range = true;
        assert!(c.validate().is_ok());
    }
}
