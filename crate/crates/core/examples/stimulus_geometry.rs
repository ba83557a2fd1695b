//! Stimulus primitives: pink-noise sampling, sphere and cone projection,
//! angular distance and PGM export.

use tuneprobe::rng::rng_from_seed;
use tuneprobe::stimulus::{angular_distance, pgm_strip, project_cone, sample_pink_noise};

fn main() -> tuneprobe::Result<()> {
    let mut rng = rng_from_seed(6);
    let x_hat = sample_pink_noise(16, 16, -2.0, 1.0, &mut rng)?;
    let other = sample_pink_noise(16, 16, 0.0, 3.0, &mut rng)?;
    let mut panels = vec![x_hat.clone()];
    for delta in [0.2, 0.6, 1.2] {
        let y = project_cone(&other, &x_hat, delta)?;
        println!(
            "δ = {delta}: ‖y‖ = {:.9}, angle = {:.9}",
            y.norm(),
            angular_distance(&y, &x_hat)?
        );
        panels.push(y);
    }
    let path = std::env::temp_dir().join("cone_strip.pgm");
    std::fs::write(&path, pgm_strip(&panels))?;
    println!("wrote {}", path.display());
    Ok(())
}
