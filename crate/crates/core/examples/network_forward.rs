//! Builds the default one- and two-level networks and times forward passes.

use std::time::Instant;

use tuneprobe::rng::rng_from_seed;
use tuneprobe::stimulus::sample_pink_noise;
use tuneprobe::targets::{SthorNetwork, SthorSpec, Target};

fn main() -> tuneprobe::Result<()> {
    for spec in [SthorSpec::default_l1(), SthorSpec::default_l2()] {
        let net = SthorNetwork::new(spec)?;
        let (h, w) = net.input_shape();
        let x = sample_pink_noise(h, w, -2.0, 1.0, &mut rng_from_seed(1))?;
        let n = 2000;
        let start = Instant::now();
        let mut acc = 0.0;
        for _ in 0..n {
            acc += net.respond(x.values())[0];
        }
        let per = start.elapsed().as_secs_f64() / n as f64;
        println!(
            "{h}x{w} input, {} outputs: {:.1} µs per forward pass (checksum {acc:.3})",
            net.response_dim(),
            per * 1e6
        );
    }
    Ok(())
}
