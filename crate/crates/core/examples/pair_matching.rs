//! Generates the oriented-texture task and scores two representations on
//! held-out pair matching: raw pixels and a one-level random network.

use tuneprobe::bench::{generate_task_stimuli, pair_matching_performance, TaskSpec};
use tuneprobe::targets::{identity_target, SthorNetwork, SthorSpec};

fn main() -> tuneprobe::Result<()> {
    let task = generate_task_stimuli(&TaskSpec::for_shape(11, 11))?;
    println!("{} items, {} classes", task.len(), TaskSpec::default().n_classes);
    let pixels = identity_target((11, 11));
    let net = SthorNetwork::new(SthorSpec::default_l1())?;
    for (name, acc) in [
        ("pixels", pair_matching_performance(pixels.as_ref(), &task, 400, 1)?),
        ("network", pair_matching_performance(&net, &task, 400, 1)?),
    ] {
        println!(
            "{name}: test accuracy {:.3} (train {:.3}, threshold {:.4})",
            acc.accuracy, acc.train_accuracy, acc.threshold
        );
    }
    Ok(())
}
