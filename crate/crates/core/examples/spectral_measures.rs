//! Spectral complexity of pink noise across exponents, and explanation
//! power of a grating against the oriented-texture task.

use tuneprobe::bench::{generate_task_stimuli, TaskSpec};
use tuneprobe::measures::{explanation_power, spectral_complexity};
use tuneprobe::rng::rng_from_seed;
use tuneprobe::stimulus::{sample_pink_noise, Stimulus};

fn main() -> tuneprobe::Result<()> {
    let mut rng = rng_from_seed(1);
    for alpha in [-4.0, -2.0, -1.0, 0.0] {
        let x = sample_pink_noise(21, 21, alpha, 1.0, &mut rng)?;
        println!("α = {alpha:>4}: complexity {:.3}", spectral_complexity(&x)?);
    }
    let task = generate_task_stimuli(&TaskSpec::default())?;
    let grating: Vec<f64> = (0..21 * 21)
        .map(|i| (0.6 * (i % 21) as f64).cos())
        .collect();
    let g = Stimulus::new(grating, 21, 21)?.with_energy(1.0)?;
    for top in [1.0, 0.1] {
        println!(
            "grating explanation power (top {:.0}%): {:.4}",
            top * 100.0,
            explanation_power(&g, &task, top)?
        );
    }
    Ok(())
}
