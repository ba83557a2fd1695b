//! A reduced measure-versus-performance study over a few one-level
//! networks, persisted to a directory and resumable.
//!
//! cargo run --release --example population_study -- [out dir] [networks]

use tuneprobe::bench::{
    generate_task_stimuli, handles, run_study, sample_references, ArtifactStore, StudyConfig,
    TaskSpec,
};
use tuneprobe::search::SearchConfig;
use tuneprobe::targets::{sample_network_population, HyperRanges, SthorSpec};

fn main() -> tuneprobe::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "study-out".into());
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(4);
    let pop = sample_network_population(&SthorSpec::default_l1(), n, &HyperRanges::default(), 21)?;
    let task = generate_task_stimuli(&TaskSpec::for_shape(11, 11))?;
    let (_, refs) = sample_references(&task, 4, 21)?;
    let config = StudyConfig {
        search: SearchConfig {
            optimal_budget_per_dim: 30,
            reconstruct_budget_per_dim: 20,
            n_candidates: 200,
            subspace_runs: 8,
            reconstruction_runs: 3,
            ..SearchConfig::default()
        },
        n_references: 4,
        seed: 21,
        ..StudyConfig::default()
    };
    let store = ArtifactStore::new(&out);
    let result = run_study(&handles(&pop.networks), &task, &refs, &config, Some(&store))?;
    for r in &result.networks {
        println!(
            "net {}: performance {:.3}  TSES {:.3}  INSC {:.3}",
            r.index,
            r.performance.accuracy,
            r.report.tses.unwrap_or(f64::NAN),
            r.report.insc.unwrap_or(f64::NAN)
        );
    }
    match &result.correlations {
        Some(t) => {
            for row in &t.rows {
                println!("{}: spearman {:?}", row.measure, row.spearman);
            }
        }
        None => println!("no correlations: {:?}", result.correlation_error),
    }
    println!("tables in {out}/");
    Ok(())
}
