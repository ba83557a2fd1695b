//! Subspace samples at δ = 0.1π around the optimum of a quadratic unit with
//! a two-dimensional invariant plateau, and their capacity and alignment.

use nalgebra::{DMatrix, DVector};
use tuneprobe::bench::generate_task_stimuli;
use tuneprobe::bench::TaskSpec;
use tuneprobe::measures::{subspace_alignment, subspace_capacity, PcaBasis};
use tuneprobe::search::{optimal_stimulus, subspace_sample, PathKind, SearchConfig};
use tuneprobe::targets::quadratic_neuron;

fn main() -> tuneprobe::Result<()> {
    let (h, w) = (5, 5);
    let n = h * w;
    // two equal top eigenvalues: the optimum can rotate freely in their plane
    let mut spectrum = vec![0.0; n];
    spectrum[0] = 3.0;
    spectrum[1] = 3.0;
    spectrum[n - 1] = -3.0;
    let q = DMatrix::from_diagonal(&DVector::from_vec(spectrum));
    let unit = quadratic_neuron((h, w), q, DVector::zeros(n), 0.0)?;
    let config = SearchConfig {
        n_candidates: 200,
        subspace_runs: 10,
        ..SearchConfig::default()
    }
    .with_seed(3);
    let opt = optimal_stimulus(unit.as_ref(), &config)?;
    let task = generate_task_stimuli(&TaskSpec::for_shape(h, w))?;
    let basis = PcaBasis::fit(&task)?;
    for kind in [PathKind::Invariance, PathKind::Selectivity] {
        let s = subspace_sample(kind, &unit, &opt.x_hat, config.subspace_delta, config.subspace_runs, &config)?;
        let a = subspace_alignment(&s, &basis, None)?;
        println!(
            "{}: capacity {:.3}, alignment {:.3} (scaled {:.3}), mean fitness {:.3}",
            kind.label(),
            subspace_capacity(&s)?,
            a.raw,
            a.scaled,
            s.fitnesses.iter().sum::<f64>() / s.fitnesses.len() as f64
        );
    }
    Ok(())
}
