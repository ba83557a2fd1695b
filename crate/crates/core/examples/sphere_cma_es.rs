//! Drives the constrained solver directly: maximize a Rastrigin-like bump
//! on the energy sphere, then minimize a linear form on a cone around it.

use tuneprobe::solver::{maximize, minimize, Constraint, SolverConfig};
use tuneprobe::stimulus::{angular_distance, Stimulus};

fn main() -> tuneprobe::Result<()> {
    let (h, w) = (4, 4);
    let target: Vec<f64> = (0..h * w).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
    let objective = |x: &Stimulus| {
        x.values()
            .iter()
            .zip(&target)
            .map(|(a, t)| a * t - 0.1 * (3.0 * a).cos())
            .sum::<f64>()
    };
    let sphere = Constraint::Sphere {
        height: h,
        width: w,
        energy: 2.0,
    };
    let config = SolverConfig {
        max_evaluations: 4000,
        seed: 5,
        ..SolverConfig::default()
    };
    let x0 = vec![1.0; h * w];
    let best = maximize(&objective, &sphere, &x0, &config)?;
    println!(
        "sphere: f = {:.4}, ‖x‖ = {:.6}, {} evaluations, stopped by {:?}",
        best.best_fitness,
        best.best.norm(),
        best.trace.evaluations,
        best.trace.termination_reason
    );

    let cone = Constraint::Cone {
        x_hat: best.best.clone(),
        delta: 0.5,
    };
    let low = minimize(&objective, &cone, best.best.values(), &config)?;
    println!(
        "cone δ=0.5: f = {:.4}, angle to optimum = {:.6}",
        low.best_fitness,
        angular_distance(&low.best, &best.best)?
    );
    Ok(())
}
