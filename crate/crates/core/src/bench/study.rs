//! The measure-versus-performance study over a network population.
//!
//! Each network is characterized at the population level (match fitness to
//! its own responses), scored on the pair-matching task, and persisted; the
//! correlation table is then a pure reduction over the persisted records.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::performance::{pair_matching_performance, PairMatching};
use super::store::{to_json, ArtifactStore};
use crate::error::{Error, Result};
use crate::measures::{
    alignment_of, encoding_specificity, explanation_power, nuclear_capacity,
    path_potential_population, spectral_complexity, MeasureReport, PcaBasis, Provenance,
};
use crate::rng::rng_from_seed;
use crate::search::{
    optimal_stimulus, path_run, reconstruct, subspace_sample, ConstraintAudit,
    OptimalStimulusResult, PathKind, PathResult, ReconstructionSet, SearchConfig,
    SubspaceSample,
};
use crate::seed_path;
use crate::stats::{multiple_r2, pearson, permutation_test, spearman, PairedSeries, Statistic};
use crate::stimulus::{average_energy, Stimulus, StimulusSet};
use crate::targets::{match_fitness, unit_view, ResponseVector, TargetHandle};

/// Column order of the correlation figure; `ALL` is the multiple R² over
/// these seven.
pub const STUDY_MEASURES: [&str; 7] = ["OSEP", "INPP", "SLPP", "INSC", "ITSA", "STSA", "TSES"];
/// Every per-network measure column.
pub const MEASURE_COLUMNS: [&str; 8] = [
    "OSSC", "OSEP", "INPP", "SLPP", "INSC", "ITSA", "STSA", "TSES",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyConfig {
    /// Search settings; `energy` and `seed` are replaced per job.
    pub search: SearchConfig,
    pub n_references: usize,
    /// Units per network whose optimal stimuli feed the explanation power.
    pub unit_neurons: usize,
    pub osep_top_fraction: f64,
    pub n_pairs: usize,
    pub n_perm: usize,
    pub seed: u64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            search: SearchConfig::default(),
            n_references: 16,
            unit_neurons: 4,
            osep_top_fraction: 1.0,
            n_pairs: 400,
            n_perm: 10_000,
            seed: 0,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        self.search.validate()?;
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.n_references == 0 {
            return bad("n_references must be positive");
        }
        if !(self.osep_top_fraction > 0.0 && self.osep_top_fraction <= 1.0) {
            return bad("osep_top_fraction must lie in (0, 1]");
        }
        if self.n_pairs < 2 || self.n_perm == 0 {
            return bad("n_pairs must be at least 2 and n_perm positive");
        }
        Ok(())
    }
}

/// Uniform sample without replacement of `n` task items.
pub fn sample_references(task: &StimulusSet, n: usize, seed: u64) -> Result<(Vec<usize>, StimulusSet)> {
    if n > task.len() {
        return Err(Error::TooFew {
            required: n,
            actual: task.len(),
        });
    }
    let mut rng = rng_from_seed(seed_path!(seed, "references"));
    let mut idx = sample(&mut rng, task.len(), n).into_vec();
    idx.sort_unstable();
    let items = idx.iter().map(|&i| task.items()[i].clone()).collect();
    Ok((idx, StimulusSet::new(items)?))
}

/// Raw search outputs for one network; every measure is a function of these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkArtifacts {
    pub anchor_reference: usize,
    pub anchor_response: ResponseVector,
    pub optimal: OptimalStimulusResult,
    pub invariance: PathResult,
    pub selectivity: PathResult,
    pub subspace_invariance: SubspaceSample,
    pub subspace_selectivity: SubspaceSample,
    pub reconstructions: Vec<ReconstructionSet>,
    pub unit_indices: Vec<usize>,
    pub unit_optima: Vec<Stimulus>,
    pub unit_fitness: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRecord {
    pub index: usize,
    pub fingerprint: String,
    pub performance: PairMatching,
    pub report: MeasureReport,
    pub anchor_reference: usize,
    pub optimum_fitness: f64,
    pub tses_per_reference: Vec<f64>,
    pub unit_indices: Vec<usize>,
    pub unit_osep: Vec<f64>,
    pub unit_ossc: Vec<f64>,
    pub audit: ConstraintAudit,
}

impl NetworkRecord {
    pub fn measure(&self, name: &str) -> Option<f64> {
        let r = &self.report;
        match name {
            "OSSC" => r.ossc,
            "OSEP" => r.osep,
            "INPP" => r.inpp,
            "SLPP" => r.slpp,
            "INSC" => r.insc,
            "ITSA" => r.itsa,
            "STSA" => r.stsa,
            "TSES" => r.tses,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub measure: String,
    pub spearman: Option<f64>,
    pub pearson: Option<f64>,
    pub p_perm: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    pub rows: Vec<CorrelationRow>,
    pub all_r2: Option<f64>,
    pub all_error: Option<String>,
}

impl CorrelationTable {
    pub fn row(&self, measure: &str) -> Option<&CorrelationRow> {
        self.rows.iter().find(|r| r.measure == measure)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub seed: u64,
    pub energy: f64,
    pub networks: Vec<NetworkRecord>,
    pub correlations: Option<CorrelationTable>,
    pub correlation_error: Option<String>,
    pub audit: ConstraintAudit,
}

fn fnv(h: u64, bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(h, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

fn digest_values<'a>(h: u64, values: impl IntoIterator<Item = &'a f64>) -> u64 {
    values.into_iter().fold(h, |h, v| fnv(h, &v.to_bits().to_le_bytes()))
}

/// Identifies a job by its configuration, inputs, and the network's
/// responses to the references.
fn fingerprint(
    config: &StudyConfig,
    task: &StimulusSet,
    references: &StimulusSet,
    responses: &[ResponseVector],
    index: usize,
) -> Result<String> {
    let mut h = fnv(0xcbf2_9ce4_8422_2325, serde_json::to_string(config)?.as_bytes());
    h = fnv(h, &(index as u64).to_le_bytes());
    for set in [task, references] {
        for x in set.items() {
            h = digest_values(h, x.values());
        }
    }
    if let Some(labels) = task.labels() {
        for l in labels {
            h = fnv(h, &(*l as u64).to_le_bytes());
        }
    }
    for r in responses {
        h = digest_values(h, r.values());
    }
    Ok(format!("{h:016x}"))
}

fn network_config(config: &StudyConfig, index: usize) -> SearchConfig {
    let mut s = config.search.clone();
    s.seed = seed_path!(config.seed, "network", index);
    s
}

/// Runs every search for one network.
pub fn network_artifacts(
    net: &TargetHandle,
    index: usize,
    references: &StimulusSet,
    config: &StudyConfig,
) -> Result<NetworkArtifacts> {
    let search = network_config(config, index);
    let responses = references
        .items()
        .iter()
        .map(|r| net.evaluate(r))
        .collect::<Result<Vec<_>>>()?;
    let mut anchor_reference = 0;
    for (i, r) in responses.iter().enumerate() {
        if r.norm() > responses[anchor_reference].norm() {
            anchor_reference = i;
        }
    }
    let anchor_response = responses[anchor_reference].clone();
    let anchored = match_fitness(net.clone(), &anchor_response)?;
    let optimal = optimal_stimulus(anchored.as_ref(), &search.scoped("population", 0))?;
    let x_hat = optimal.x_hat.clone();

    let paths = search.scoped("paths", 0);
    let invariance = path_run(PathKind::Invariance, net, &x_hat, &paths, 0)?;
    let selectivity = path_run(PathKind::Selectivity, net, &x_hat, &paths, 0)?;
    let sub = search.scoped("subspace", 0);
    let subspace_invariance = subspace_sample(
        PathKind::Invariance,
        net,
        &x_hat,
        search.subspace_delta,
        search.subspace_runs,
        &sub,
    )?;
    let subspace_selectivity = subspace_sample(
        PathKind::Selectivity,
        net,
        &x_hat,
        search.subspace_delta,
        search.subspace_runs,
        &sub,
    )?;
    let reconstructions = references
        .items()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            reconstruct(net, r, search.reconstruction_runs, &search.scoped("reconstruct", i))
        })
        .collect::<Result<Vec<_>>>()?;

    let r_dim = net.response_dim();
    let n_units = config.unit_neurons.min(r_dim);
    let mut rng = rng_from_seed(seed_path!(search.seed, "units"));
    let mut unit_indices = sample(&mut rng, r_dim, n_units).into_vec();
    unit_indices.sort_unstable();
    let mut unit_optima = Vec::with_capacity(n_units);
    let mut unit_fitness = Vec::with_capacity(n_units);
    for &j in &unit_indices {
        let unit = unit_view(net.clone(), j)?;
        let out = optimal_stimulus(unit.as_ref(), &search.scoped("unit", j))?;
        unit_fitness.push(out.fitness_at_optimum);
        unit_optima.push(out.x_hat);
    }
    Ok(NetworkArtifacts {
        anchor_reference,
        anchor_response,
        optimal,
        invariance,
        selectivity,
        subspace_invariance,
        subspace_selectivity,
        reconstructions,
        unit_indices,
        unit_optima,
        unit_fitness,
    })
}

/// Per-network measures computed from persisted artifacts only.
pub struct ArtifactMeasures {
    pub report: MeasureReport,
    pub tses_per_reference: Vec<f64>,
    pub unit_osep: Vec<f64>,
    pub unit_ossc: Vec<f64>,
}

pub fn measures_from_artifacts(
    art: &NetworkArtifacts,
    task: &StimulusSet,
    basis: &PcaBasis,
    references: &StimulusSet,
    config: &StudyConfig,
    search: &SearchConfig,
) -> Result<ArtifactMeasures> {
    let x_hat = &art.optimal.x_hat;
    let mut report = MeasureReport::empty(Provenance::new(search, x_hat.len()));
    report.ossc = report.record("ossc", spectral_complexity(x_hat));

    let unit_osep = art
        .unit_optima
        .iter()
        .map(|x| explanation_power(x, task, config.osep_top_fraction))
        .collect::<Result<Vec<_>>>()?;
    let unit_ossc = art
        .unit_optima
        .iter()
        .map(spectral_complexity)
        .collect::<Result<Vec<_>>>()?;
    report.osep = if unit_osep.is_empty() {
        report.missing.push("osep: no unit optimal stimuli".into());
        None
    } else {
        Some(unit_osep.iter().sum::<f64>() / unit_osep.len() as f64)
    };

    report.inpp = report.record("inpp", path_potential_population(&art.invariance));
    report.slpp = report.record("slpp", path_potential_population(&art.selectivity));
    report.insc = report.record("insc", nuclear_capacity(&art.subspace_invariance.columns));
    let anchor = references.items().get(art.anchor_reference);
    if let Some(a) = report.record(
        "itsa",
        alignment_of(&art.subspace_invariance.columns, basis, anchor),
    ) {
        report.itsa = Some(a.raw);
        report.itsa_scaled = Some(a.scaled);
        report.itsa_relative = a.relative;
    }
    if let Some(a) = report.record(
        "stsa",
        alignment_of(&art.subspace_selectivity.columns, basis, anchor),
    ) {
        report.stsa = Some(a.raw);
        report.stsa_scaled = Some(a.scaled);
        report.stsa_relative = a.relative;
    }
    let tses_per_reference = art
        .reconstructions
        .iter()
        .map(|r| encoding_specificity(r, None))
        .collect::<Result<Vec<_>>>()?;
    report.tses = if tses_per_reference.is_empty() {
        None
    } else {
        Some(tses_per_reference.iter().sum::<f64>() / tses_per_reference.len() as f64)
    };
    Ok(ArtifactMeasures {
        report,
        tses_per_reference,
        unit_osep,
        unit_ossc,
    })
}

/// Constraint audit over every stimulus a network's searches emitted.
pub fn audit_artifacts(art: &NetworkArtifacts, energy: f64, label: &str) -> ConstraintAudit {
    let mut audit = ConstraintAudit::default();
    let x_hat = &art.optimal.x_hat;
    audit.check_sphere(&format!("{label}/x_hat"), x_hat, energy);
    audit.check_path(label, &art.invariance, x_hat);
    audit.check_path(label, &art.selectivity, x_hat);
    audit.check_subspace(label, &art.subspace_invariance, x_hat);
    audit.check_subspace(label, &art.subspace_selectivity, x_hat);
    for (i, set) in art.reconstructions.iter().enumerate() {
        for (k, r) in set.reconstructions.iter().enumerate() {
            audit.check_sphere(&format!("{label}/reconstruct-{i}/{k}"), r, set.reference.energy());
        }
    }
    for (j, x) in art.unit_indices.iter().zip(&art.unit_optima) {
        audit.check_sphere(&format!("{label}/unit-{j}"), x, energy);
    }
    audit
}

/// Correlates every measure column with performance. Fails only when
/// performance itself has no variance; per-measure failures are recorded
/// in the rows.
pub fn correlate(records: &[NetworkRecord], n_perm: usize, seed: u64) -> Result<CorrelationTable> {
    let perf: Vec<f64> = records.iter().map(|r| r.performance.accuracy).collect();
    if perf.len() >= 2 && perf.iter().all(|p| *p == perf[0]) {
        return Err(Error::ZeroVariance);
    }
    let mut rows = Vec::with_capacity(MEASURE_COLUMNS.len());
    for name in STUDY_MEASURES.iter().chain(std::iter::once(&"OSSC")) {
        let mut row = CorrelationRow {
            measure: name.to_string(),
            spearman: None,
            pearson: None,
            p_perm: None,
            error: None,
        };
        let (x, y): (Vec<f64>, Vec<f64>) = records
            .iter()
            .filter_map(|r| r.measure(name).map(|m| (m, r.performance.accuracy)))
            .unzip();
        let outcome = PairedSeries::new(x.clone(), y.clone()).and_then(|s| {
            let rho = spearman(&s)?;
            let r = pearson(&s)?;
            let p = permutation_test(&x, &y, Statistic::Slope, n_perm, seed_path!(seed, "perm", *name))?;
            Ok((rho, r, p))
        });
        match outcome {
            Ok((rho, r, p)) => {
                row.spearman = Some(rho);
                row.pearson = Some(r);
                row.p_perm = Some(p);
            }
            Err(e) => row.error = Some(e.kind().to_string()),
        }
        rows.push(row);
    }
    let complete: Vec<&NetworkRecord> = records
        .iter()
        .filter(|r| STUDY_MEASURES.iter().all(|m| r.measure(m).is_some()))
        .collect();
    let features = DMatrix::from_fn(complete.len(), STUDY_MEASURES.len(), |i, j| {
        complete[i].measure(STUDY_MEASURES[j]).expect("filtered")
    });
    let y: Vec<f64> = complete.iter().map(|r| r.performance.accuracy).collect();
    let (all_r2, all_error) = match multiple_r2(&features, &y) {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.kind().to_string())),
    };
    Ok(CorrelationTable {
        rows,
        all_r2,
        all_error,
    })
}

fn run_network(
    net: &TargetHandle,
    index: usize,
    task: &StimulusSet,
    basis: &PcaBasis,
    references: &StimulusSet,
    config: &StudyConfig,
    store: Option<&ArtifactStore>,
) -> Result<NetworkRecord> {
    let responses = references
        .items()
        .iter()
        .map(|r| net.evaluate(r))
        .collect::<Result<Vec<_>>>()?;
    let fp = fingerprint(config, task, references, &responses, index)?;
    let dir = store.map(|s| s.network_dir(index));
    if let (Some(store), Some(dir)) = (store.filter(|s| s.resume()), &dir) {
        let record: Option<NetworkRecord> = store.read_json(&dir.join("record.json"));
        let artifacts: Option<NetworkArtifacts> = store.read_json(&dir.join("artifacts.json"));
        if let (Some(record), Some(_)) = (record, artifacts) {
            if record.fingerprint == fp {
                return Ok(record);
            }
        }
    }
    let search = network_config(config, index);
    let art = network_artifacts(net, index, references, config)?;
    let performance =
        pair_matching_performance(net.as_ref(), task, config.n_pairs, seed_path!(config.seed, "pairs"))?;
    let m = measures_from_artifacts(&art, task, basis, references, config, &search)?;
    let audit = audit_artifacts(&art, config.search.energy, &format!("net-{index:03}"));
    let record = NetworkRecord {
        index,
        fingerprint: fp,
        performance,
        report: m.report,
        anchor_reference: art.anchor_reference,
        optimum_fitness: art.optimal.fitness_at_optimum,
        tses_per_reference: m.tses_per_reference,
        unit_indices: art.unit_indices.clone(),
        unit_osep: m.unit_osep,
        unit_ossc: m.unit_ossc,
        audit,
    };
    if let (Some(store), Some(dir)) = (store, &dir) {
        store.write_bytes(&dir.join("invariance.csv"), art.invariance.to_csv().as_bytes())?;
        store.write_bytes(&dir.join("selectivity.csv"), art.selectivity.to_csv().as_bytes())?;
        store.write_bytes(&dir.join("invariance.pgm"), &art.invariance.to_pgm_strip())?;
        store.write_bytes(&dir.join("selectivity.pgm"), &art.selectivity.to_pgm_strip())?;
        store.write_bytes(&dir.join("x_hat.pgm"), &art.optimal.x_hat.to_pgm())?;
        store.write_bytes(&dir.join("x_hat.csv"), art.optimal.x_hat.to_csv().as_bytes())?;
        store.write_json(&dir.join("artifacts.json"), &art)?;
        // the record goes last: its presence marks the job complete
        store.write_json(&dir.join("record.json"), &record)?;
    }
    Ok(record)
}

/// Characterizes every network, scores it, and correlates the measures with
/// performance. With a store, finished networks are persisted and reused
/// on re-runs with identical inputs.
pub fn run_study(
    population: &[TargetHandle],
    task: &StimulusSet,
    references: &StimulusSet,
    config: &StudyConfig,
    store: Option<&ArtifactStore>,
) -> Result<BenchResult> {
    config.validate()?;
    if population.is_empty() {
        return Err(Error::EmptySet);
    }
    for net in population {
        net.evaluate(&task.items()[0])?;
    }
    references.items()[0].check_shape(task.shape())?;
    let mut config = config.clone();
    config.search.energy = average_energy(task)?;
    let basis = PcaBasis::fit(task)?;
    let records = population
        .par_iter()
        .enumerate()
        .map(|(i, net)| run_network(net, i, task, &basis, references, &config, store))
        .collect::<Result<Vec<_>>>()?;
    let mut audit = ConstraintAudit::default();
    for r in &records {
        audit.merge(r.audit.clone());
    }
    let (correlations, correlation_error) =
        match correlate(&records, config.n_perm, seed_path!(config.seed, "correlate")) {
            Ok(t) => (Some(t), None),
            Err(e) => (None, Some(e.kind().to_string())),
        };
    let result = BenchResult {
        seed: config.seed,
        energy: config.search.energy,
        networks: records,
        correlations,
        correlation_error,
        audit,
    };
    if let Some(store) = store {
        write_study_tables(&result, store)?;
    }
    Ok(result)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn measures_csv(result: &BenchResult) -> String {
    let mut out = String::from("network,performance");
    for m in MEASURE_COLUMNS {
        out.push(',');
        out.push_str(&m.to_lowercase());
    }
    out.push('\n');
    for r in &result.networks {
        out.push_str(&format!("{},{}", r.index, r.performance.accuracy));
        for m in MEASURE_COLUMNS {
            out.push(',');
            out.push_str(&cell(r.measure(m)));
        }
        out.push('\n');
    }
    out
}

pub fn correlations_csv(table: Option<&CorrelationTable>) -> String {
    let mut out = String::from("measure,spearman,pearson,p_perm\n");
    if let Some(t) = table {
        for r in &t.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.measure,
                cell(r.spearman),
                cell(r.pearson),
                cell(r.p_perm)
            ));
        }
    }
    out
}

/// Wide table in figure order: one row per statistic, `r2` holding the
/// single-measure R² and the multiple R² under `ALL`.
pub fn summary_csv(table: Option<&CorrelationTable>) -> String {
    let mut out = String::from("statistic");
    for m in STUDY_MEASURES {
        out.push(',');
        out.push_str(m);
    }
    out.push_str(",ALL\n");
    let get = |m: &str| table.and_then(|t| t.row(m));
    for stat in ["spearman", "pearson", "r2"] {
        out.push_str(stat);
        for m in STUDY_MEASURES {
            let v = get(m).and_then(|r| match stat {
                "spearman" => r.spearman,
                "pearson" => r.pearson,
                _ => r.pearson.map(|p| p * p),
            });
            out.push(',');
            out.push_str(&cell(v));
        }
        out.push(',');
        if stat == "r2" {
            out.push_str(&cell(table.and_then(|t| t.all_r2)));
        }
        out.push('\n');
    }
    out
}

pub fn write_study_tables(result: &BenchResult, store: &ArtifactStore) -> Result<()> {
    let root = store.root();
    store.write_bytes(&root.join("measures.csv"), measures_csv(result).as_bytes())?;
    let table = result.correlations.as_ref();
    store.write_bytes(&root.join("correlations.csv"), correlations_csv(table).as_bytes())?;
    store.write_bytes(&root.join("summary.csv"), summary_csv(table).as_bytes())?;
    store.write_bytes(&root.join("study.json"), to_json(result)?.as_bytes())?;
    Ok(())
}

/// Recomputes every network's report from `artifacts.json` in the store,
/// using the energy and seed the study resolved.
pub fn recompute_measures(
    store: &ArtifactStore,
    n_networks: usize,
    task: &StimulusSet,
    references: &StimulusSet,
    config: &StudyConfig,
) -> Result<Vec<MeasureReport>> {
    let mut config = config.clone();
    config.search.energy = average_energy(task)?;
    let basis = PcaBasis::fit(task)?;
    (0..n_networks)
        .map(|i| {
            let path = store.network_dir(i).join("artifacts.json");
            let art: NetworkArtifacts = store.read_json(&path).ok_or_else(|| Error::Format {
                path: path.clone(),
                reason: "missing or unreadable artifacts".into(),
            })?;
            let search = network_config(&config, i);
            measures_from_artifacts(&art, task, &basis, references, &config, &search).map(|m| m.report)
        })
        .collect()
}

/// Shared handles for a population of concrete networks.
pub fn handles<T: crate::targets::Target + 'static>(nets: &[Arc<T>]) -> Vec<TargetHandle> {
    nets.iter().map(|n| n.clone() as TargetHandle).collect()
}
