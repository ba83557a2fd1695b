//! Command-line front end. Every subcommand reads one TOML run config,
//! validates it completely before touching the output directory, and
//! writes JSON, CSV and PGM files without timestamps.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime error. Failures
//! print `{"error": kind, "message": ...}` on stderr.

pub mod config;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::{
    EncodeOptions, PopulationConfig, RunConfig, StudyOptions, TargetConfig, TargetKind,
};

use crate::bench::store::{to_json, write_atomic};
use crate::bench::{
    characterize, recompute_measures, run_study, sample_references, ArtifactStore, BenchResult,
    Characterization, CharacterizeOptions, NetworkRecord, MEASURE_COLUMNS,
};
use crate::error::Error;
use crate::measures::{encoding_specificity, ssim, SsimParams};
use crate::search::reconstruct;
use crate::seed_path;
use crate::stimulus::{pgm_strip, Stimulus};
use crate::targets::{write_weights, Target, TargetHandle};

#[derive(Debug, Parser)]
#[command(name = "tuneprobe", version, about = "Constrained-search characterization of black-box stimulus-response functions")]
pub struct Cli {
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Progress messages on stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Run config (TOML).
    #[arg(short, long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a network population; write its manifest and weight files.
    GenNet {
        /// Run config with a `[population]` section; defaults to one L1 network.
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Optimal stimulus, paths, subspace samples, diagram and unit measures.
    Characterize(RunArgs),
    /// Optimal stimulus with invariance and selectivity paths only.
    Paths(RunArgs),
    /// Optimal stimulus with subspace samples only.
    Subspace(RunArgs),
    /// Reconstruct a reference stimulus from the target's response.
    Encode(RunArgs),
    /// Recompute measures from a finished output directory.
    Measure {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Measure-versus-performance study over a population.
    Bench {
        #[command(flatten)]
        run: RunArgs,
        /// Reuse finished per-network records in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Print the tables of a finished bench or characterization.
    Report {
        #[arg(short, long)]
        input: PathBuf,
    },
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: Error,
}

impl CliError {
    fn config(error: Error) -> Self {
        Self { code: 1, error }
    }

    fn runtime(error: Error) -> Self {
        Self { code: 2, error }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": self.error.kind(),
            "message": self.error.to_string(),
            "exit_code": self.code,
        })
        .to_string()
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

trait Runtime<T> {
    fn runtime(self) -> CliResult<T>;
}

impl<T> Runtime<T> for crate::Result<T> {
    fn runtime(self) -> CliResult<T> {
        self.map_err(CliError::runtime)
    }
}

fn load(args: &RunArgs) -> CliResult<RunConfig> {
    let mut c = RunConfig::load(&args.config).map_err(CliError::config)?;
    if let Some(s) = args.seed {
        c.seed = s;
    }
    c.validate().map_err(CliError::config)?;
    Ok(c)
}

struct Out {
    dir: PathBuf,
    verbose: bool,
}

impl Out {
    fn new(dir: &Path, verbose: bool) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::runtime(e.into()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            verbose,
        })
    }

    fn bytes(&self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes).runtime()?;
        if self.verbose {
            eprintln!("wrote {}", path.display());
        }
        Ok(())
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<()> {
        self.bytes(name, to_json(value).runtime()?.as_bytes())
    }
}

/// Parses the process arguments, runs, and returns the exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.code
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::config(Error::InvalidConfig("--threads must be positive".into())));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let v = cli.verbose;
    match cli.command {
        Command::GenNet { config, out, seed } => gen_net(config.as_deref(), &out, seed, v),
        Command::Characterize(a) => {
            let c = load(&a)?;
            let opts = c.characterize.clone();
            unit_pipeline(&c, &opts, &a.out, v)
        }
        Command::Paths(a) => {
            let c = load(&a)?;
            let opts = CharacterizeOptions {
                subspace: false,
                ..c.characterize.clone()
            };
            unit_pipeline(&c, &opts, &a.out, v)
        }
        Command::Subspace(a) => {
            let c = load(&a)?;
            let opts = CharacterizeOptions {
                paths: false,
                subspace: true,
                walks: 0,
                ..c.characterize.clone()
            };
            unit_pipeline(&c, &opts, &a.out, v)
        }
        Command::Encode(a) => encode(&load(&a)?, &a.out, v),
        Command::Measure { input } => measure(&input, v),
        Command::Bench { run, resume } => bench(&load(&run)?, &run.out, resume, v),
        Command::Report { input } => report(&input),
    }
}

#[derive(Serialize)]
struct NetSummary {
    networks: usize,
    input_shape: (usize, usize),
    response_dim: usize,
}

fn gen_net(config: Option<&Path>, out: &Path, seed: Option<u64>, verbose: bool) -> CliResult<()> {
    let mut c = match config {
        Some(p) => RunConfig::load(p).map_err(CliError::config)?,
        None => RunConfig::with_seed(seed.ok_or_else(|| {
            CliError::config(Error::InvalidConfig("gen-net needs --config or --seed".into()))
        })?),
    };
    if let Some(s) = seed {
        c.seed = s;
    }
    let pop_cfg = c.population.clone().unwrap_or_default();
    pop_cfg.validate().map_err(CliError::config)?;
    let pop = pop_cfg.build(c.seed).runtime()?;
    let out = Out::new(out, verbose)?;
    out.bytes("manifest.toml", pop.manifest.to_toml().runtime()?.as_bytes())?;
    for (i, net) in pop.networks.iter().enumerate() {
        write_weights(net, out.dir.join(format!("net-{i:03}.weights"))).runtime()?;
    }
    let first = &pop.networks[0];
    let summary = NetSummary {
        networks: pop.networks.len(),
        input_shape: first.input_shape(),
        response_dim: first.response_dim(),
    };
    out.json("summary.json", &summary)?;
    println!("{}", serde_json::to_string(&summary).expect("plain struct"));
    Ok(())
}

fn unit_pipeline(c: &RunConfig, opts: &CharacterizeOptions, out: &Path, verbose: bool) -> CliResult<()> {
    let target = c.require_target().map_err(CliError::config)?.build().runtime()?;
    let task = match &c.task {
        Some(_) => Some(c.task_set(target.input_shape()).map_err(CliError::config)?),
        None => None,
    };
    let search = c.search();
    let result = characterize(&target, &search, opts, task.as_ref()).runtime()?;
    let out = Out::new(out, verbose)?;
    out.json("run.json", c)?;
    write_characterization(&out, &result)?;
    println!("{}", serde_json::to_string(&result.report).expect("plain struct"));
    if result.audit.passed() {
        Ok(())
    } else {
        Err(CliError::runtime(Error::ConstraintViolation(result.audit.violations.len())))
    }
}

fn write_characterization(out: &Out, c: &Characterization) -> CliResult<()> {
    out.json("characterization.json", c)?;
    out.json("report.json", &c.report)?;
    out.bytes("x_hat.csv", c.optimal.x_hat.to_csv().as_bytes())?;
    out.bytes("x_hat.pgm", &c.optimal.x_hat.to_pgm())?;
    for p in c.invariance.iter().chain(&c.selectivity) {
        let name = p.kind.label();
        out.bytes(&format!("{name}.csv"), p.to_csv().as_bytes())?;
        out.bytes(&format!("{name}.pgm"), &p.to_pgm_strip())?;
    }
    for s in c.subspace_invariance.iter().chain(&c.subspace_selectivity) {
        out.bytes(&format!("subspace-{}.pgm", s.kind.label()), &pgm_strip(&s.columns))?;
    }
    if let Some(d) = &c.diagram {
        out.bytes("diagram.csv", d.to_csv().as_bytes())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct EncodeReport {
    tses: f64,
    ssim: Vec<f64>,
    fitnesses: Vec<f64>,
}

fn encode(c: &RunConfig, out: &Path, verbose: bool) -> CliResult<()> {
    let target = c.require_target().map_err(CliError::config)?.build().runtime()?;
    let reference = match (&c.encode.reference, c.encode.task_item) {
        (Some(p), _) => Stimulus::read_csv(p).map_err(CliError::config)?,
        (None, Some(i)) => {
            let task = c.task_set(target.input_shape()).map_err(CliError::config)?;
            task.items().get(i).cloned().ok_or_else(|| {
                CliError::config(Error::IndexOutOfRange {
                    index: i,
                    len: task.len(),
                })
            })?
        }
        (None, None) => {
            return Err(CliError::config(Error::InvalidConfig(
                "encode needs encode.reference or encode.task_item".into(),
            )))
        }
    };
    let search = c.search();
    let set = reconstruct(&target, &reference, search.reconstruction_runs, &search).runtime()?;
    let params = SsimParams::for_reference(&reference);
    let sims = set
        .reconstructions
        .iter()
        .map(|r| ssim(&reference, r, &params))
        .collect::<crate::Result<Vec<_>>>()
        .runtime()?;
    let report = EncodeReport {
        tses: encoding_specificity(&set, None).runtime()?,
        ssim: sims,
        fitnesses: set.fitnesses.clone(),
    };
    let out = Out::new(out, verbose)?;
    out.json("run.json", c)?;
    out.json("reconstructions.json", &set)?;
    let mut panels = vec![reference];
    panels.extend(set.reconstructions.iter().cloned());
    out.bytes("reconstructions.pgm", &pgm_strip(&panels))?;
    out.json("encode.json", &report)?;
    println!("{}", serde_json::to_string(&report).expect("plain struct"));
    Ok(())
}

fn read_run(input: &Path) -> CliResult<RunConfig> {
    let path = input.join("run.json");
    let text = fs::read_to_string(&path).map_err(|e| CliError::config(e.into()))?;
    let c: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::config(e.into()))?;
    c.validate().map_err(CliError::config)?;
    Ok(c)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::config(e.into()))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(e.into()))
}

#[derive(Serialize)]
struct Recomputed {
    networks: usize,
    max_abs_difference: f64,
}

fn measure(input: &Path, verbose: bool) -> CliResult<()> {
    let c = read_run(input)?;
    let out = Out::new(input, verbose)?;
    if input.join("study.json").is_file() {
        let result: BenchResult = read_json(&input.join("study.json"))?;
        let (task, references) = bench_inputs(&c)?;
        let store = ArtifactStore::new(input);
        let reports =
            recompute_measures(&store, result.networks.len(), &task, &references, &c.study()).runtime()?;
        let mut worst = 0.0f64;
        let mut fresh = result.networks.clone();
        for (rec, rep) in fresh.iter_mut().zip(reports) {
            let old = rec.clone();
            rec.report = rep;
            for m in MEASURE_COLUMNS {
                if let (Some(a), Some(b)) = (rec.measure(m), old.measure(m)) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
        let table = BenchResult {
            networks: fresh,
            ..result
        };
        out.bytes("measures_recomputed.csv", crate::bench::study::measures_csv(&table).as_bytes())?;
        let summary = Recomputed {
            networks: table.networks.len(),
            max_abs_difference: worst,
        };
        println!("{}", serde_json::to_string(&summary).expect("plain struct"));
        Ok(())
    } else {
        let ch: Characterization = read_json(&input.join("characterization.json"))?;
        let target = c.require_target().map_err(CliError::config)?;
        let shape = target.build().runtime()?.input_shape();
        let task = match &c.task {
            Some(_) => Some(c.task_set(shape).map_err(CliError::config)?),
            None => None,
        };
        let report = ch.unit_report(&c.search(), &c.characterize, task.as_ref());
        out.json("measures.json", &report)?;
        println!("{}", serde_json::to_string(&report).expect("plain struct"));
        Ok(())
    }
}

fn bench_inputs(c: &RunConfig) -> CliResult<(crate::stimulus::StimulusSet, crate::stimulus::StimulusSet)> {
    let pop = c
        .require_population()
        .map_err(CliError::config)?
        .build(c.seed)
        .runtime()?;
    let shape = config::population_shape(&pop).runtime()?;
    let task = c.task_set(shape).map_err(CliError::config)?;
    let (_, refs) = sample_references(&task, c.study.n_references, seed_path!(c.seed, "study"))
        .map_err(CliError::config)?;
    Ok((task, refs))
}

fn bench(c: &RunConfig, out: &Path, resume: bool, verbose: bool) -> CliResult<()> {
    let pop_cfg = c.require_population().map_err(CliError::config)?;
    let pop = pop_cfg.build(c.seed).map_err(CliError::config)?;
    let shape = config::population_shape(&pop).map_err(CliError::config)?;
    let task = c.task_set(shape).map_err(CliError::config)?;
    let (ref_idx, refs) = sample_references(&task, c.study.n_references, seed_path!(c.seed, "study"))
        .map_err(CliError::config)?;
    let handles: Vec<TargetHandle> = pop.networks.iter().map(|n| n.clone() as TargetHandle).collect();
    let study = c.study();
    study.validate().map_err(CliError::config)?;

    let out = Out::new(out, verbose)?;
    out.json("run.json", c)?;
    out.bytes("manifest.toml", pop.manifest.to_toml().runtime()?.as_bytes())?;
    out.json("references.json", &ref_idx)?;
    let store = ArtifactStore::new(&out.dir).resuming(resume);
    let result = run_study(&handles, &task, &refs, &study, Some(&store)).runtime()?;
    print_tables(&result);
    if !result.audit.passed() {
        return Err(CliError::runtime(Error::ConstraintViolation(result.audit.violations.len())));
    }
    Ok(())
}

fn fmt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

fn print_tables(result: &BenchResult) {
    print!("{:>8} {:>8}", "network", "perf");
    for m in MEASURE_COLUMNS {
        print!(" {m:>8}");
    }
    println!();
    for r in &result.networks {
        print_record(r);
    }
    match (&result.correlations, &result.correlation_error) {
        (Some(t), _) => {
            println!("\n{:>8} {:>9} {:>9} {:>9}", "measure", "spearman", "pearson", "p_perm");
            for row in &t.rows {
                println!(
                    "{:>8} {:>9} {:>9} {:>9}{}",
                    row.measure,
                    fmt(row.spearman),
                    fmt(row.pearson),
                    fmt(row.p_perm),
                    row.error.as_deref().map(|e| format!("  ({e})")).unwrap_or_default()
                );
            }
            println!("{:>8} R² = {}", "ALL", fmt(t.all_r2));
        }
        (None, Some(e)) => println!("\ncorrelations unavailable: {e}"),
        (None, None) => {}
    }
    println!(
        "\nconstraint audit: {} sphere, {} cone checks, {} violations",
        result.audit.sphere_checked,
        result.audit.cone_checked,
        result.audit.violations.len()
    );
}

fn print_record(r: &NetworkRecord) {
    print!("{:>8} {:>8.4}", r.index, r.performance.accuracy);
    for m in MEASURE_COLUMNS {
        print!(" {:>8}", fmt(r.measure(m)));
    }
    println!();
}

fn report(input: &Path) -> CliResult<()> {
    if input.join("study.json").is_file() {
        let result: BenchResult = read_json(&input.join("study.json"))?;
        print_tables(&result);
    } else {
        let c: Characterization = read_json(&input.join("characterization.json"))?;
        let r = &c.report;
        for (name, v) in [
            ("OSSC", r.ossc),
            ("OSEP", r.osep),
            ("INPP", r.inpp),
            ("SLPP", r.slpp),
            ("INSC", r.insc),
            ("ITSA", r.itsa),
            ("STSA", r.stsa),
        ] {
            println!("{name:>6} {}", fmt(v));
        }
        println!("{:>6} {}", "f(x̂)", fmt(Some(c.optimal.fitness_at_optimum)));
        for m in &r.missing {
            println!("missing: {m}");
        }
    }
    Ok(())
}
