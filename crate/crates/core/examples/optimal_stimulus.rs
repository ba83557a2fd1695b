//! Recovers the weight image of a linear neuron by seeded optimal-stimulus
//! search and writes the result as PGM.
//!
//! cargo run --release --example optimal_stimulus -- [out.pgm]

use tuneprobe::rng::rng_from_seed;
use tuneprobe::search::{optimal_stimulus, SearchConfig};
use tuneprobe::stimulus::sample_pink_noise;
use tuneprobe::targets::linear_neuron;

fn main() -> tuneprobe::Result<()> {
    let w = sample_pink_noise(11, 11, -1.0, 1.0, &mut rng_from_seed(4))?;
    let neuron = linear_neuron(&w)?;
    let config = SearchConfig::default().with_seed(9);
    let result = optimal_stimulus(neuron.as_ref(), &config)?;
    let cosine = result.x_hat.dot(&w) / (result.x_hat.norm() * w.norm());
    println!(
        "f(x̂) = {:.6}, cos(x̂, w) = {:.6}, run {} of {} chosen, init {:?}",
        result.fitness_at_optimum,
        cosine,
        result.chosen_run + 1,
        result.runs.len(),
        result.init_source
    );
    if let Some(path) = std::env::args().nth(1) {
        result.x_hat.write_pgm(&path)?;
        println!("wrote {path}");
    }
    Ok(())
}
