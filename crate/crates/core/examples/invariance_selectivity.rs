//! Invariance and selectivity paths of a two-subunit energy unit against a
//! linear unit, plus random walks, printed as a fitness-distance table.

use std::sync::Arc;

use tuneprobe::bench::{characterize, CharacterizeOptions};
use tuneprobe::measures::Series;
use tuneprobe::rng::rng_from_seed;
use tuneprobe::search::SearchConfig;
use tuneprobe::stimulus::sample_pink_noise;
use tuneprobe::targets::{linear_neuron, FnTarget, TargetHandle};

fn main() -> tuneprobe::Result<()> {
    let mut rng = rng_from_seed(2);
    let a = sample_pink_noise(6, 6, -1.0, 1.0, &mut rng)?;
    let b = sample_pink_noise(6, 6, -1.0, 1.0, &mut rng)?;
    let (wa, wb) = (a.values().to_vec(), b.values().to_vec());
    let energy: TargetHandle = Arc::new(FnTarget::scalar((6, 6), move |x| {
        let p: f64 = x.iter().zip(&wa).map(|(x, w)| x * w).sum();
        let q: f64 = x.iter().zip(&wb).map(|(x, w)| x * w).sum();
        (p * p + q * q).sqrt()
    }));
    let linear = linear_neuron(&a)?;
    let config = SearchConfig::default().with_seed(1);
    let options = CharacterizeOptions {
        subspace: false,
        ..CharacterizeOptions::default()
    };
    for (name, unit) in [("linear", linear), ("energy", energy)] {
        let c = characterize(&unit, &config, &options, None)?;
        let d = c.diagram.as_ref().expect("paths requested");
        println!(
            "{name}: INPP {:.3}  SLPP {:.3}",
            c.report.inpp.unwrap_or(f64::NAN),
            c.report.slpp.unwrap_or(f64::NAN)
        );
        for delta in &config.deltas {
            let f = |s| d.mean_at(s, *delta).unwrap_or(f64::NAN) / c.optimal.fitness_at_optimum;
            println!(
                "  δ={delta:.3}  inv {:.3}  walk {:.3}  sel {:.3}  cos δ {:.3}",
                f(Series::Invariance),
                f(Series::RandomWalk),
                f(Series::Selectivity),
                delta.cos()
            );
        }
    }
    Ok(())
}
