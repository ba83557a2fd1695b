//! Rank and linear correlation, permutation p-values, multiple R² and d'
//! on a small synthetic measure-versus-performance table.

use nalgebra::DMatrix;
use tuneprobe::stats::{
    d_prime, multiple_r2, pearson, permutation_test, spearman, PairedSeries, Statistic,
};

fn main() -> tuneprobe::Result<()> {
    let measure = vec![0.1, 0.4, 0.35, 0.8, 0.6, 0.9, 0.2, 0.75];
    let perf = vec![0.52, 0.61, 0.58, 0.74, 0.7, 0.77, 0.55, 0.69];
    let s = PairedSeries::new(measure.clone(), perf.clone())?;
    println!("spearman {:.3}  pearson {:.3}", spearman(&s)?, pearson(&s)?);
    println!(
        "slope permutation p = {:.4}",
        permutation_test(&measure, &perf, Statistic::Slope, 9999, 1)?
    );
    let other = [0.3, 0.1, 0.5, 0.2, 0.9, 0.4, 0.6, 0.8];
    let x = DMatrix::from_fn(8, 2, |i, j| if j == 0 { measure[i] } else { other[i] });
    println!("R² on both measures = {:.3}", multiple_r2(&x, &perf)?);
    println!("d' = {:.3}", d_prime(&[0.1, 0.2, 0.3], &[0.6, 0.7, 0.9])?);
    Ok(())
}
