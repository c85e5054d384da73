//! Directed, symmetric and mean distances between two random models.

use ctig::{directed_distance, generate_sequence, mean_distance, symmetric_distance, ModelPrior, Result};

pub fn run_example() -> Result<(f64, f64, f64)> {
    let prior = ModelPrior::default();
    let a = prior.sample_mixed_sign(1)?;
    let b = prior.sample_mixed_sign(2)?;
    let run_a = generate_sequence(&a, 1000.0, 5)?;
    let run_b = generate_sequence(&b, 1000.0, 6)?;
    // Error of b when replaying a's triggers against a's history.
    let directed = directed_distance(&b, &a, &run_a.accepted, &run_a.triggers)?.value;
    let symmetric = symmetric_distance(&a, &b, &run_a, &run_b)?.symmetric;
    let mean = mean_distance(&a, &b, 1000.0, 32, 7)?.mean;
    Ok((directed, symmetric, mean))
}

fn main() -> Result<()> {
    let (d, s, m) = run_example()?;
    println!("directed {d:.4}  symmetric {s:.4}  mean {m:.4}");
    Ok(())
}
