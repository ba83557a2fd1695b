//! CMA-ES maximizer working on unconstrained raw coordinates. Constraints are
//! enforced by projecting every candidate before it reaches the objective.
//!
//! The strategy is the standard (μ/μ_w, λ) variant: log-linear recombination
//! weights, cumulative step-size adaptation, and rank-one plus rank-μ
//! covariance updates (Hansen's tutorial parameterization).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};
use crate::stimulus::{project_cone_raw, project_sphere, sample_pink_noise, Stimulus};

/// Feasible set a candidate is projected onto before evaluation.
#[derive(Debug, Clone)]
pub enum Constraint {
    /// `‖x‖ = energy`.
    Sphere {
        height: usize,
        width: usize,
        energy: f64,
    },
    /// `‖x‖ = ‖x_hat‖` and angle `delta` to `x_hat`.
    Cone { x_hat: Stimulus, delta: f64 },
}

impl Constraint {
    pub fn sphere_like(x: &Stimulus) -> Self {
        Constraint::Sphere {
            height: x.height(),
            width: x.width(),
            energy: x.energy(),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Constraint::Sphere { height, width, .. } => height * width,
            Constraint::Cone { x_hat, .. } => x_hat.len(),
        }
    }

    pub fn energy(&self) -> f64 {
        match self {
            Constraint::Sphere { energy, .. } => *energy,
            Constraint::Cone { x_hat, .. } => x_hat.energy(),
        }
    }

    pub fn project(&self, raw: &[f64]) -> Result<Stimulus> {
        match self {
            Constraint::Sphere {
                height,
                width,
                energy,
            } => project_sphere(raw, *height, *width, *energy),
            Constraint::Cone { x_hat, delta } => project_cone_raw(raw, x_hat, *delta),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// λ; `None` selects `4 + ⌊3 ln N⌋`.
    pub population_size: Option<usize>,
    /// Initial step relative to the stimulus energy: σ₀ = step · E / √N per coordinate.
    pub initial_step: f64,
    pub max_evaluations: usize,
    /// Stop once σ·√λ_max(C) falls below this fraction of ‖mean‖.
    pub step_tolerance: f64,
    /// Stop after this many generations without a best-so-far improvement.
    pub stagnation_window: usize,
    pub seed: u64,
    /// Responses averaged per candidate (each counts against the budget).
    pub repeats: usize,
    /// Generations between eigendecompositions; `None` derives it from the
    /// covariance learning rates.
    pub eigen_interval: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            population_size: None,
            initial_step: 0.3,
            max_evaluations: 10_000,
            step_tolerance: 1e-8,
            stagnation_window: 20,
            seed: 0,
            repeats: 1,
            eigen_interval: None,
        }
    }
}

impl SolverConfig {
    pub fn lambda(&self, n: usize) -> usize {
        self.population_size
            .unwrap_or_else(|| 4 + (3.0 * (n as f64).ln()).floor() as usize)
    }

    pub fn with_budget(mut self, max_evaluations: usize) -> Self {
        self.max_evaluations = max_evaluations;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_initial_step(mut self, step: f64) -> Self {
        self.initial_step = step;
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        let lambda = self.lambda(n);
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if lambda < 2 {
            return bad(format!("population size {lambda} < 2"));
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1".into());
        }
        if self.max_evaluations < lambda * self.repeats {
            return bad(format!(
                "budget {} smaller than one generation ({})",
                self.max_evaluations,
                lambda * self.repeats
            ));
        }
        if !(self.initial_step > 0.0) || !(self.step_tolerance > 0.0) {
            return bad("step sizes must be positive".into());
        }
        if self.stagnation_window == 0 {
            return bad("stagnation window must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Budget,
    StepTolerance,
    Stagnation,
    /// Objective produced NaN or ±∞.
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub evaluations: usize,
    pub fitness: f64,
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    /// `(evaluations used, best fitness so far)`, one entry per generation.
    pub best_fitness_history: Vec<(usize, f64)>,
    /// Best point at roughly doubling evaluation counts, plus the final best.
    pub best_point_history: Vec<Snapshot>,
    pub termination_reason: Termination,
    pub evaluations: usize,
    pub generations: usize,
}

impl SearchTrace {
    fn empty() -> Self {
        Self {
            best_fitness_history: Vec::new(),
            best_point_history: Vec::new(),
            termination_reason: Termination::Budget,
            evaluations: 0,
            generations: 0,
        }
    }

    fn negate(&mut self) {
        self.best_fitness_history.iter_mut().for_each(|e| e.1 = -e.1);
        self.best_point_history
            .iter_mut()
            .for_each(|s| s.fitness = -s.fitness);
    }

    /// `(evaluations, fitness)` rows as CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("evaluations,best_fitness\n");
        for (e, f) in &self.best_fitness_history {
            out.push_str(&format!("{e},{f}\n"));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SolverOutcome {
    pub best: Stimulus,
    pub best_fitness: f64,
    pub trace: SearchTrace,
}

struct Strategy {
    n: usize,
    lambda: usize,
    weights: Vec<f64>,
    mu_eff: f64,
    c_sigma: f64,
    d_sigma: f64,
    c_c: f64,
    c_1: f64,
    c_mu: f64,
    chi_n: f64,
}

impl Strategy {
    fn new(n: usize, lambda: usize) -> Self {
        let nf = n as f64;
        let mu = lambda / 2;
        let raw: Vec<f64> = (0..mu)
            .map(|i| ((lambda as f64 + 1.0) / 2.0).ln() - ((i + 1) as f64).ln())
            .collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let c_sigma = (mu_eff + 2.0) / (nf + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / nf) / (nf + 4.0 + 2.0 * mu_eff / nf);
        let c_1 = 2.0 / ((nf + 1.3).powi(2) + mu_eff);
        let c_mu = (2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((nf + 2.0).powi(2) + mu_eff))
            .min(1.0 - c_1);
        let chi_n = nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf));
        Self {
            n,
            lambda,
            weights,
            mu_eff,
            c_sigma,
            d_sigma,
            c_c,
            c_1,
            c_mu,
            chi_n,
        }
    }

    fn default_eigen_interval(&self) -> usize {
        ((1.0 / (self.n as f64 * (self.c_1 + self.c_mu))).floor() as usize).max(1)
    }
}

/// Covariance model: `C = B diag(d²) Bᵀ`.
struct Model {
    cov: DMatrix<f64>,
    basis: DMatrix<f64>,
    scales: DVector<f64>,
}

impl Model {
    fn identity(n: usize) -> Self {
        Self {
            cov: DMatrix::identity(n, n),
            basis: DMatrix::identity(n, n),
            scales: DVector::from_element(n, 1.0),
        }
    }

    fn decompose(&mut self) {
        let sym = (&self.cov + self.cov.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone());
        let mean = eig.eigenvalues.mean().max(f64::MIN_POSITIVE);
        let floor = 1e-14 * mean;
        let mut values = eig.eigenvalues.clone();
        let mut repaired = false;
        for v in values.iter_mut() {
            if *v < floor {
                *v = floor;
                repaired = true;
            }
        }
        self.basis = eig.eigenvectors;
        if repaired {
            self.cov = &self.basis * DMatrix::from_diagonal(&values) * self.basis.transpose();
        } else {
            self.cov = sym;
        }
        self.scales = values.map(f64::sqrt);
    }

    /// `C^{-1/2} v`.
    fn inv_sqrt_times(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut t = self.basis.tr_mul(v);
        t.component_mul_assign(&self.scales.map(|d| 1.0 / d));
        &self.basis * t
    }
}

fn evaluate<F>(objective: &F, point: &Stimulus, repeats: usize) -> f64
where
    F: Fn(&Stimulus) -> f64 + ?Sized,
{
    if repeats == 1 {
        objective(point)
    } else {
        (0..repeats).map(|_| objective(point)).sum::<f64>() / repeats as f64
    }
}

/// Maximizes `objective ∘ constraint.project` starting from the raw mean `x0`.
///
/// `x0` is evaluated first when its projection is defined; a degenerate start
/// (e.g. the cone axis itself) is skipped and the first generation seeds the
/// best-so-far instead.
pub fn maximize<F>(
    objective: &F,
    constraint: &Constraint,
    x0: &[f64],
    config: &SolverConfig,
) -> Result<SolverOutcome>
where
    F: Fn(&Stimulus) -> f64 + ?Sized,
{
    let n = constraint.dimension();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: x0.len(),
        });
    }
    config.validate(n)?;
    let strategy = Strategy::new(n, config.lambda(n));
    let lambda = strategy.lambda;
    let mu = strategy.weights.len();
    let eigen_interval = config
        .eigen_interval
        .unwrap_or_else(|| strategy.default_eigen_interval())
        .max(1);
    let mut rng = rng_from_seed(config.seed);
    let mut trace = SearchTrace::empty();

    let mut mean = DVector::from_column_slice(x0);
    let scale = mean.norm().max(constraint.energy());
    let mut sigma = config.initial_step * scale / (n as f64).sqrt();
    let mut model = Model::identity(n);
    let mut p_sigma = DVector::zeros(n);
    let mut p_c = DVector::zeros(n);

    let mut best: Option<(Stimulus, f64)> = None;
    let mut next_snapshot = lambda;
    let mut last_improvement = 0usize;

    if let Ok(start) = constraint.project(x0) {
        let f = evaluate(objective, &start, config.repeats);
        trace.evaluations += config.repeats;
        if !f.is_finite() {
            trace.termination_reason = Termination::NonFinite;
            return Err(Error::NonFiniteObjective(Box::new(trace)));
        }
        trace.best_fitness_history.push((trace.evaluations, f));
        best = Some((start, f));
    }

    let per_generation = lambda * config.repeats;
    let mut z = DMatrix::<f64>::zeros(n, lambda);
    let mut bd = DMatrix::<f64>::identity(n, n);
    loop {
        if trace.evaluations + per_generation > config.max_evaluations {
            trace.termination_reason = Termination::Budget;
            break;
        }
        let g = trace.generations;
        if g > 0 && g % eigen_interval == 0 {
            model.decompose();
        }

        // sample; candidates whose projection is undefined are redrawn
        if g == 0 || g % eigen_interval == 0 {
            bd = &model.basis * DMatrix::from_diagonal(&model.scales);
        }
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let ys = &bd * &z;
        let mut candidates = Vec::with_capacity(lambda);
        for k in 0..lambda {
            let mut y = ys.column(k).into_owned();
            let mut attempts = 0;
            loop {
                let x = &mean + &y * sigma;
                match constraint.project(x.as_slice()) {
                    Ok(p) => {
                        candidates.push((y, p));
                        break;
                    }
                    Err(Error::DegenerateDirection) if attempts < 100 => {
                        attempts += 1;
                        let fresh = DVector::from_fn(n, |_, _| rng.sample(StandardNormal));
                        y = &bd * fresh;
                    }
                    Err(e) => return Err(e),
                }
            }
        }

        let mut scored = Vec::with_capacity(lambda);
        for (k, (_, point)) in candidates.iter().enumerate() {
            let f = evaluate(objective, point, config.repeats);
            trace.evaluations += config.repeats;
            if !f.is_finite() {
                trace.termination_reason = Termination::NonFinite;
                trace.generations = g;
                return Err(Error::NonFiniteObjective(Box::new(trace)));
            }
            scored.push((k, f));
        }
        scored.sort_by(|a, b| b.1.total_cmp(&a.1));
        trace.generations = g + 1;

        let (top_k, top_f) = scored[0];
        if best.as_ref().map_or(true, |(_, bf)| top_f > *bf) {
            best = Some((candidates[top_k].1.clone(), top_f));
            last_improvement = g + 1;
            if trace.evaluations >= next_snapshot {
                trace.best_point_history.push(Snapshot {
                    evaluations: trace.evaluations,
                    fitness: top_f,
                    point: candidates[top_k].1.values().to_vec(),
                });
                next_snapshot = trace.evaluations * 2;
            }
        }
        let best_f = best.as_ref().map(|b| b.1).unwrap_or(top_f);
        trace.best_fitness_history.push((trace.evaluations, best_f));

        // recombination
        let mut y_w = DVector::zeros(n);
        for (w, &(k, _)) in strategy.weights.iter().zip(&scored[..mu]) {
            y_w.axpy(*w, &candidates[k].0, 1.0);
        }
        mean.axpy(sigma, &y_w, 1.0);

        // step-size path
        let cs = strategy.c_sigma;
        let whitened = model.inv_sqrt_times(&y_w);
        p_sigma *= 1.0 - cs;
        p_sigma.axpy((cs * (2.0 - cs) * strategy.mu_eff).sqrt(), &whitened, 1.0);
        let ps_norm = p_sigma.norm();
        let h_sigma = ps_norm / (1.0 - (1.0 - cs).powi(2 * (g as i32 + 1))).sqrt()
            < (1.4 + 2.0 / (n as f64 + 1.0)) * strategy.chi_n;
        let h = if h_sigma { 1.0 } else { 0.0 };

        // covariance
        let cc = strategy.c_c;
        p_c *= 1.0 - cc;
        p_c.axpy(h * (cc * (2.0 - cc) * strategy.mu_eff).sqrt(), &y_w, 1.0);
        let (c1, cmu) = (strategy.c_1, strategy.c_mu);
        let decay = 1.0 - c1 - cmu + (1.0 - h) * c1 * cc * (2.0 - cc);
        model.cov *= decay;
        model.cov.ger(c1, &p_c, &p_c, 1.0);
        let mut ys = DMatrix::zeros(n, mu);
        for (j, (w, &(k, _))) in strategy.weights.iter().zip(&scored[..mu]).enumerate() {
            ys.set_column(j, &(&candidates[k].0 * w.sqrt()));
        }
        model.cov.gemm(cmu, &ys, &ys.transpose(), 1.0);

        sigma *= ((cs / strategy.d_sigma) * (ps_norm / strategy.chi_n - 1.0)).exp();

        let spread = sigma * model.scales.max();
        if spread < config.step_tolerance * mean.norm() {
            trace.termination_reason = Termination::StepTolerance;
            break;
        }
        if trace.generations - last_improvement >= config.stagnation_window {
            trace.termination_reason = Termination::Stagnation;
            break;
        }
    }

    let (best, best_fitness) = best.ok_or_else(|| {
        Error::InvalidConfig("budget exhausted before any candidate was evaluated".into())
    })?;
    trace.best_point_history.push(Snapshot {
        evaluations: trace.evaluations,
        fitness: best_fitness,
        point: best.values().to_vec(),
    });
    Ok(SolverOutcome {
        best,
        best_fitness,
        trace,
    })
}

/// Minimizes by maximizing the negated objective; the trace holds the
/// minimized values (non-increasing).
pub fn minimize<F>(
    objective: &F,
    constraint: &Constraint,
    x0: &[f64],
    config: &SolverConfig,
) -> Result<SolverOutcome>
where
    F: Fn(&Stimulus) -> f64 + ?Sized,
{
    let negated = |x: &Stimulus| -objective(x);
    match maximize(&negated, constraint, x0, config) {
        Ok(mut out) => {
            out.best_fitness = -out.best_fitness;
            out.trace.negate();
            Ok(out)
        }
        Err(Error::NonFiniteObjective(mut trace)) => {
            trace.negate();
            Err(Error::NonFiniteObjective(trace))
        }
        Err(e) => Err(e),
    }
}

/// Which candidate `seeded_init` picked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitRecord {
    pub candidates: usize,
    pub chosen_index: usize,
    pub alpha: f64,
    pub fitness: f64,
}

/// Best of `n_candidates` 1/f^α noise stimuli, cycling through `alpha_set`.
/// These evaluations are not charged to any solver budget.
pub fn seeded_init<F>(
    objective: &F,
    shape: (usize, usize),
    energy: f64,
    n_candidates: usize,
    alpha_set: &[f64],
    rng: &mut Rng,
) -> Result<(Stimulus, InitRecord)>
where
    F: Fn(&Stimulus) -> f64 + ?Sized,
{
    if n_candidates == 0 {
        return Err(Error::InvalidConfig("n_candidates must be at least 1".into()));
    }
    if alpha_set.is_empty() {
        return Err(Error::InvalidConfig("alpha set is empty".into()));
    }
    let mut best: Option<(Stimulus, InitRecord)> = None;
    for i in 0..n_candidates {
        let alpha = alpha_set[i % alpha_set.len()];
        let candidate = sample_pink_noise(shape.0, shape.1, alpha, energy, rng)?;
        let f = objective(&candidate);
        if !f.is_finite() {
            let mut trace = SearchTrace::empty();
            trace.evaluations = i + 1;
            trace.termination_reason = Termination::NonFinite;
            return Err(Error::NonFiniteObjective(Box::new(trace)));
        }
        if best.as_ref().map_or(true, |(_, r)| f > r.fitness) {
            best = Some((
                candidate,
                InitRecord {
                    candidates: n_candidates,
                    chosen_index: i,
                    alpha,
                    fitness: f,
                },
            ));
        }
    }
    Ok(best.expect("at least one candidate"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::stimulus::dot;

    fn unit_axis(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    fn random_start(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let s = crate::stimulus::norm(&v);
        v.iter().map(|x| x / s).collect()
    }

    fn sphere(n: usize) -> Constraint {
        Constraint::Sphere {
            height: 1,
            width: n,
            energy: 1.0,
        }
    }

    #[test]
    fn linear_objective_on_sphere() {
        let n = 16;
        let w = unit_axis(n, 0);
        let f = |x: &Stimulus| dot(x.values(), &w);
        let cfg = SolverConfig::default().with_budget(100 * n).with_seed(3);
        let out = maximize(&f, &sphere(n), &random_start(n, 1), &cfg).unwrap();
        assert!(out.best_fitness >= 0.99, "{}", out.best_fitness);
        assert!(out.trace.evaluations <= 100 * n);
        assert!((out.best.norm() - 1.0).abs() < 1e-9);
        for pair in out.trace.best_fitness_history.windows(2) {
            assert!(pair[1].1 >= pair[0].1);
        }

        let out = minimize(&f, &sphere(n), &random_start(n, 2), &cfg).unwrap();
        assert!(out.best_fitness <= -0.99);
        for pair in out.trace.best_fitness_history.windows(2) {
            assert!(pair[1].1 <= pair[0].1);
        }
    }

    #[test]
    fn quadratic_objective_top_and_bottom_eigenvectors() {
        let n = 8;
        // Q = diag(5, 1, ..., 1): top eigenvector e1
        let f = |x: &Stimulus| {
            let v = x.values();
            0.5 * (5.0 * v[0] * v[0] + v[1..].iter().map(|a| a * a).sum::<f64>())
        };
        let cfg = SolverConfig::default().with_budget(100 * n).with_seed(5);
        let out = maximize(&f, &sphere(n), &random_start(n, 4), &cfg).unwrap();
        assert!(out.best.values()[0].abs() >= 0.99);

        // Q = diag(0.5, 1, 2, ..., 2): bottom eigenvector e1
        let g = |x: &Stimulus| {
            let v = x.values();
            0.5 * (0.5 * v[0] * v[0] + v[1] * v[1] + 2.0 * v[2..].iter().map(|a| a * a).sum::<f64>())
        };
        let out = minimize(&g, &sphere(n), &random_start(n, 6), &cfg).unwrap();
        assert!(out.best.values()[0].abs() >= 0.99);
    }

    #[test]
    fn constant_objective_stagnates_at_start() {
        let n = 10;
        let x0 = random_start(n, 8);
        let f = |_: &Stimulus| 2.5;
        let cfg = SolverConfig::default().with_budget(100 * n);
        let out = maximize(&f, &sphere(n), &x0, &cfg).unwrap();
        assert_eq!(out.trace.termination_reason, Termination::Stagnation);
        for (a, b) in out.best.values().iter().zip(&x0) {
            assert!((a - b).abs() < 1e-12);
        }
        let out = minimize(&f, &sphere(n), &x0, &cfg).unwrap();
        assert_eq!(out.trace.termination_reason, Termination::Stagnation);
    }

    #[test]
    fn deterministic_given_seed() {
        let n = 12;
        let w = random_start(n, 77);
        let f = |x: &Stimulus| dot(x.values(), &w).powi(3);
        let cfg = SolverConfig::default().with_budget(30 * n).with_seed(9);
        let a = maximize(&f, &sphere(n), &random_start(n, 1), &cfg).unwrap();
        let b = maximize(&f, &sphere(n), &random_start(n, 1), &cfg).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.best, b.best);
    }

    #[test]
    fn budget_exactly_accounted() {
        let n = 6;
        let count = std::cell::Cell::new(0usize);
        let f = |x: &Stimulus| {
            count.set(count.get() + 1);
            x.values()[0] + 1e-3 * count.get() as f64
        };
        let mut cfg = SolverConfig::default().with_budget(97);
        cfg.repeats = 2;
        let out = maximize(&f, &sphere(n), &random_start(n, 3), &cfg).unwrap();
        assert_eq!(out.trace.evaluations, count.get());
        assert!(out.trace.evaluations <= 97);
    }

    #[test]
    fn non_finite_objective_aborts_with_trace() {
        let n = 4;
        let calls = std::cell::Cell::new(0usize);
        let f = |_: &Stimulus| {
            calls.set(calls.get() + 1);
            if calls.get() > 10 { f64::NAN } else { calls.get() as f64 }
        };
        let cfg = SolverConfig::default().with_budget(200);
        match maximize(&f, &sphere(n), &random_start(n, 3), &cfg) {
            Err(Error::NonFiniteObjective(trace)) => {
                assert_eq!(trace.evaluations, 11);
                assert_eq!(trace.termination_reason, Termination::NonFinite);
                assert!(!trace.best_fitness_history.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cone_search_starting_on_axis() {
        let n = 9;
        let x_hat = crate::stimulus::project_sphere(&unit_axis(n, 0), 3, 3, 1.0).unwrap();
        let w = unit_axis(n, 1);
        let f = |x: &Stimulus| dot(x.values(), &w);
        let delta = 0.3 * std::f64::consts::PI;
        let c = Constraint::Cone {
            x_hat: x_hat.clone(),
            delta,
        };
        let cfg = SolverConfig::default().with_budget(100 * n).with_seed(2);
        let out = maximize(&f, &c, x_hat.values(), &cfg).unwrap();
        assert!((out.best.dot(&x_hat) - delta.cos()).abs() < 1e-9);
        assert!(out.best_fitness > 0.99 * delta.sin());
    }

    #[test]
    fn invalid_configs_rejected() {
        let f = |_: &Stimulus| 0.0;
        let cfg = SolverConfig::default().with_budget(3);
        assert!(matches!(
            maximize(&f, &sphere(5), &random_start(5, 1), &cfg),
            Err(Error::InvalidConfig(_))
        ));
        let mut cfg = SolverConfig::default();
        cfg.population_size = Some(1);
        assert!(maximize(&f, &sphere(5), &random_start(5, 1), &cfg).is_err());
    }

    #[test]
    fn seeded_init_picks_argmax() {
        let n = 121;
        let f = |x: &Stimulus| x.values()[0];
        let alphas = [-4.0, -3.0, -2.0, -1.0, 0.0];
        let (x, rec) =
            seeded_init(&f, (11, 11), 1.0, 1000, &alphas, &mut rng_from_seed(3)).unwrap();
        // exhaustive recheck by regenerating the same candidate stream
        let mut rng = rng_from_seed(3);
        for i in 0..1000 {
            let c = sample_pink_noise(11, 11, alphas[i % 5], 1.0, &mut rng).unwrap();
            assert!(f(&c) <= rec.fitness);
        }
        assert_eq!(f(&x), rec.fitness);
        assert_eq!(x.len(), n);

        let (one, rec1) = seeded_init(&f, (11, 11), 1.0, 1, &alphas, &mut rng_from_seed(4)).unwrap();
        let expect = sample_pink_noise(11, 11, -4.0, 1.0, &mut rng_from_seed(4)).unwrap();
        assert_eq!(one, expect);
        assert_eq!(rec1.chosen_index, 0);

        let (again, _) = seeded_init(&f, (11, 11), 1.0, 1000, &alphas, &mut rng_from_seed(3)).unwrap();
        assert_eq!(again, x);
    }
}
