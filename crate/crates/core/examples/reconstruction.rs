//! Inverts a small network's population response to a task stimulus and
//! scores the reconstructions with SSIM.

use tuneprobe::bench::{generate_task_stimuli, TaskSpec};
use tuneprobe::measures::{encoding_specificity, ssim, SsimParams};
use tuneprobe::search::{reconstruct, SearchConfig};
use tuneprobe::targets::{SthorNetwork, SthorSpec, TargetHandle};

fn main() -> tuneprobe::Result<()> {
    let net: TargetHandle = std::sync::Arc::new(SthorNetwork::new(SthorSpec::default_l1())?);
    let task = generate_task_stimuli(&TaskSpec::for_shape(11, 11))?;
    let reference = &task.items()[0];
    let config = SearchConfig {
        n_candidates: 200,
        reconstruction_runs: 4,
        ..SearchConfig::default()
    }
    .with_seed(8);
    let set = reconstruct(&net, reference, config.reconstruction_runs, &config)?;
    let params = SsimParams::for_reference(reference);
    for (r, f) in set.reconstructions.iter().zip(&set.fitnesses) {
        println!("match fitness {f:.4}  SSIM {:.4}", ssim(reference, r, &params)?);
    }
    println!("encoding specificity {:.4}", encoding_specificity(&set, None)?);
    Ok(())
}
