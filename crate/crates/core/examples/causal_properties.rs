//! Monotonicity checks and a PNS estimate for a small model.

use ctig::properties::{estimate_pns, interventional_pns_oracle, is_monotonic_bruteforce, sample_monotone_pair_model};
use ctig::{generate_sequence, Result};

pub fn run_example() -> Result<(bool, f64, f64)> {
    let model = sample_monotone_pair_model(2)?;
    let monotone = is_monotonic_bruteforce(&model, 0, 1)?.verdict;
    let run = generate_sequence(&model, 5000.0, 1)?;
    let est = estimate_pns(&run.accepted, &run.triggers[0], 0, 1, model.tau_bar())?;
    let oracle = interventional_pns_oracle(&model, 0, 1, 5000.0, 2)?;
    Ok((monotone, est.value, oracle))
}

fn main() -> Result<()> {
    let (monotone, est, oracle) = run_example()?;
    println!("monotone: {monotone}; PNS estimate {est:.3}, interventional {oracle:.3}");
    Ok(())
}
