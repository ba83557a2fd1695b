//! Compares single units of shallow (11x11) and deep (21x21) random
//! networks: optimal-stimulus complexity and path potentials.
//!
//! cargo run --release --example depth_comparison -- [networks per depth] [seed]

use tuneprobe::bench::{run_depth_study, DepthConfig};
use tuneprobe::measures::Series;
use tuneprobe::targets::{sample_network_population, HyperRanges, SthorSpec, TargetHandle};

fn population(spec: SthorSpec, n: usize, seed: u64) -> tuneprobe::Result<Vec<TargetHandle>> {
    let pop = sample_network_population(&spec, n, &HyperRanges::default(), seed)?;
    Ok(pop.networks.into_iter().map(|n| n as TargetHandle).collect())
}

fn main() -> tuneprobe::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(6);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1);
    let shallow = population(SthorSpec::default_l1(), n, seed)?;
    let deep = population(SthorSpec::default_l2(), n, seed + 1)?;
    let config = DepthConfig {
        seed,
        ..DepthConfig::default()
    };
    let study = run_depth_study(&shallow, &deep, &config)?;
    for c in &study.contrasts {
        println!(
            "{}: shallow {:.3}  deep {:.3}  d' {}  p {}",
            c.measure,
            c.mean_shallow,
            c.mean_deep,
            c.d_prime.map_or("-".into(), |d| format!("{d:.2}")),
            c.p_value.map_or("-".into(), |p| format!("{p:.4}")),
        );
    }
    println!("\ndeep units, fitness / f(x̂) by δ:");
    let d = &study.deep_diagram;
    for delta in &config.search.deltas {
        let at = |s| d.mean_at(s, *delta).map_or("-".into(), |v| format!("{v:.3}"));
        println!(
            "δ={delta:.3}  invariance {}  walk {}  selectivity {}",
            at(Series::Invariance),
            at(Series::RandomWalk),
            at(Series::Selectivity)
        );
    }
    Ok(())
}
