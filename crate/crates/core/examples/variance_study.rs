//! How the variance of the mean distance shrinks with more replications.

use ctig::{variance_decay_study, ModelPrior, Result, StudyCell};

pub fn run_example() -> Result<Vec<(usize, f64)>> {
    let prior = ModelPrior::default();
    let a = prior.sample_mixed_sign(1)?;
    let b = prior.sample_mixed_sign(2)?;
    let grid: Vec<StudyCell> = [2, 8].iter().map(|&iters| StudyCell { horizon: 100.0, iters }).collect();
    let rows = variance_decay_study(&a, &b, &grid, 30, 9)?;
    Ok(rows.iter().map(|r| (r.iters, r.variance)).collect())
}

fn main() -> Result<()> {
    for (iters, var) in run_example()? {
        println!("iters {iters:>3}: variance {var:.3e}");
    }
    Ok(())
}
