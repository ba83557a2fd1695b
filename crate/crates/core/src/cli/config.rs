//! Run configuration: one TOML file per run, every nested setting in a
//! section. Paths are relative to the file's directory.
//!
//! ```toml
//! seed = 7
//!
//! [target]            # characterize, paths, subspace, encode
//! kind = "sthor"      # "linear" | "sthor" | "manifest"
//! levels = 1
//! unit = 3            # omit for the population response
//!
//! [population]        # gen-net, bench
//! levels = 2
//! n_networks = 20
//!
//! [task]              # or task_file = "task.toml"
//! n_classes = 8
//!
//! [search]            # SearchConfig fields
//! [characterize]      # CharacterizeOptions fields
//! [study]             # StudyOptions fields
//! [encode]            # EncodeOptions fields
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bench::{generate_task_stimuli, CharacterizeOptions, StudyConfig, TaskSpec};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::search::SearchConfig;
use crate::seed_path;
use crate::stimulus::{sample_pink_noise, StimulusSet};
use crate::targets::{
    linear_neuron, sample_network_population, unit_view, HyperRanges, Population,
    PopulationManifest, SthorNetwork, SthorSpec, Target, TargetHandle,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// Inner-product neuron with seeded pink-noise weights.
    Linear,
    /// A single network, from `spec` or the default for `levels`.
    Sthor,
    /// Network `network` of a population manifest written by `gen-net`.
    Manifest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub kind: TargetKind,
    #[serde(default)]
    pub height: Option<usize>,
    #[serde(default)]
    pub width: Option<usize>,
    #[serde(default)]
    pub weight_seed: u64,
    #[serde(default)]
    pub levels: Option<usize>,
    #[serde(default)]
    pub spec: Option<SthorSpec>,
    #[serde(default)]
    pub manifest: Option<PathBuf>,
    #[serde(default)]
    pub network: usize,
    #[serde(default)]
    pub unit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationConfig {
    /// Load this manifest instead of sampling.
    pub manifest: Option<PathBuf>,
    pub levels: usize,
    pub spec: Option<SthorSpec>,
    pub n_networks: usize,
    pub ranges: HyperRanges,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            levels: 1,
            spec: None,
            n_networks: 1,
            ranges: HyperRanges::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyOptions {
    pub n_references: usize,
    pub unit_neurons: usize,
    pub osep_top_fraction: f64,
    pub n_pairs: usize,
    pub n_perm: usize,
}

impl Default for StudyOptions {
    fn default() -> Self {
        let d = StudyConfig::default();
        Self {
            n_references: d.n_references,
            unit_neurons: d.unit_neurons,
            osep_top_fraction: d.osep_top_fraction,
            n_pairs: d.n_pairs,
            n_perm: d.n_perm,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncodeOptions {
    /// Stimulus CSV to reconstruct.
    pub reference: Option<PathBuf>,
    /// Otherwise, this item of the task set.
    pub task_item: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default)]
    pub target: Option<TargetConfig>,
    #[serde(default)]
    pub population: Option<PopulationConfig>,
    #[serde(default)]
    pub task: Option<TaskSpec>,
    #[serde(default)]
    pub task_file: Option<PathBuf>,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub characterize: CharacterizeOptions,
    #[serde(default)]
    pub study: StudyOptions,
    #[serde(default)]
    pub encode: EncodeOptions,
}

fn config_error(m: impl Into<String>) -> Error {
    Error::InvalidConfig(m.into())
}

fn absolutize(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

impl RunConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            target: None,
            population: None,
            task: None,
            task_file: None,
            search: SearchConfig::default(),
            characterize: CharacterizeOptions::default(),
            study: StudyOptions::default(),
            encode: EncodeOptions::default(),
        }
    }

    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut c: RunConfig = toml::from_str(text).map_err(|e| config_error(e.to_string()))?;
        if let Some(t) = c.target.as_mut() {
            absolutize(base, &mut t.manifest);
        }
        if let Some(p) = c.population.as_mut() {
            absolutize(base, &mut p.manifest);
        }
        absolutize(base, &mut c.task_file);
        absolutize(base, &mut c.encode.reference);
        if let Some(path) = &c.task_file {
            if c.task.is_some() {
                return Err(config_error("give either [task] or task_file, not both"));
            }
            let text = read_config_file(path)?;
            c.task = Some(toml::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?);
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_config_file(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    /// Search settings with the run's master seed.
    pub fn search(&self) -> SearchConfig {
        self.search.clone().with_seed(seed_path!(self.seed, "search"))
    }

    pub fn study(&self) -> StudyConfig {
        StudyConfig {
            search: self.search.clone(),
            n_references: self.study.n_references,
            unit_neurons: self.study.unit_neurons,
            osep_top_fraction: self.study.osep_top_fraction,
            n_pairs: self.study.n_pairs,
            n_perm: self.study.n_perm,
            seed: self.seed,
        }
    }

    /// Checks that don't run anything: section presence, referenced files,
    /// parameter ranges.
    pub fn validate(&self) -> Result<()> {
        self.search.validate()?;
        if let Some(t) = &self.target {
            t.validate()?;
        }
        if let Some(p) = &self.population {
            p.validate()?;
        }
        if let Some(t) = &self.task {
            t.validate()?;
        }
        if let Some(p) = &self.encode.reference {
            exists(p)?;
        }
        if !(self.characterize.osep_top_fraction > 0.0 && self.characterize.osep_top_fraction <= 1.0) {
            return Err(config_error("characterize.osep_top_fraction must lie in (0, 1]"));
        }
        self.study().validate()
    }

    pub fn require_target(&self) -> Result<&TargetConfig> {
        self.target.as_ref().ok_or_else(|| config_error("missing [target] section"))
    }

    pub fn require_population(&self) -> Result<&PopulationConfig> {
        self.population.as_ref().ok_or_else(|| config_error("missing [population] section"))
    }

    /// The task set, shaped for `shape` when no `[task]` is configured.
    pub fn task_set(&self, shape: (usize, usize)) -> Result<StimulusSet> {
        let spec = match &self.task {
            Some(t) => t.clone(),
            None => TaskSpec {
                seed: seed_path!(self.seed, "task"),
                ..TaskSpec::for_shape(shape.0, shape.1)
            },
        };
        if (spec.height, spec.width) != shape {
            return Err(config_error(format!(
                "task shape {}x{} does not match target input {}x{}",
                spec.height, spec.width, shape.0, shape.1
            )));
        }
        generate_task_stimuli(&spec)
    }
}

fn read_config_file(path: &Path) -> Result<String> {
    exists(path)?;
    Ok(std::fs::read_to_string(path)?)
}

fn exists(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(config_error(format!("no such file: {}", path.display())))
    }
}

fn default_spec(levels: Option<usize>, spec: &Option<SthorSpec>) -> Result<SthorSpec> {
    match spec {
        Some(s) => {
            s.validate()?;
            Ok(s.clone())
        }
        None => SthorSpec::default_for_levels(levels.unwrap_or(1)),
    }
}

impl TargetConfig {
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            TargetKind::Linear => {
                if self.height.unwrap_or(0) == 0 || self.width.unwrap_or(0) == 0 {
                    return Err(config_error("linear target needs positive height and width"));
                }
            }
            TargetKind::Sthor => {
                default_spec(self.levels, &self.spec)?;
            }
            TargetKind::Manifest => {
                let path = self
                    .manifest
                    .as_ref()
                    .ok_or_else(|| config_error("manifest target needs `manifest`"))?;
                exists(path)?;
            }
        }
        Ok(())
    }

    /// The configured target, narrowed to `unit` when given.
    pub fn build(&self) -> Result<TargetHandle> {
        let full: TargetHandle = match self.kind {
            TargetKind::Linear => {
                let (h, w) = (self.height.unwrap_or(0), self.width.unwrap_or(0));
                let mut rng = rng_from_seed(seed_path!(self.weight_seed, "linear"));
                linear_neuron(&sample_pink_noise(h, w, -1.0, 1.0, &mut rng)?)?
            }
            TargetKind::Sthor => Arc::new(SthorNetwork::new(default_spec(self.levels, &self.spec)?)?),
            TargetKind::Manifest => {
                let path = self.manifest.as_ref().expect("validated");
                let pop = load_manifest(path)?.build()?;
                let n = pop.networks.len();
                let net = pop
                    .networks
                    .get(self.network)
                    .ok_or(Error::IndexOutOfRange {
                        index: self.network,
                        len: n,
                    })?;
                net.clone()
            }
        };
        match self.unit {
            Some(j) => unit_view(full, j),
            None => Ok(full),
        }
    }
}

pub fn load_manifest(path: &Path) -> Result<PopulationManifest> {
    PopulationManifest::from_toml(&read_config_file(path)?)
}

impl PopulationConfig {
    pub fn validate(&self) -> Result<()> {
        match &self.manifest {
            Some(p) => exists(p),
            None => {
                if self.n_networks == 0 {
                    return Err(config_error("population.n_networks must be positive"));
                }
                self.ranges.validate()?;
                default_spec(Some(self.levels), &self.spec).map(|_| ())
            }
        }
    }

    pub fn build(&self, seed: u64) -> Result<Population> {
        match &self.manifest {
            Some(p) => load_manifest(p)?.build(),
            None => sample_network_population(
                &default_spec(Some(self.levels), &self.spec)?,
                self.n_networks,
                &self.ranges,
                seed_path!(seed, "population"),
            ),
        }
    }
}

/// Input shape shared by a population.
pub fn population_shape(pop: &Population) -> Result<(usize, usize)> {
    let first = pop.networks.first().ok_or(Error::EmptySet)?;
    Ok(first.input_shape())
}
