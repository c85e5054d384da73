//! Sample a random causal model and simulate one event sequence from it.

use ctig::{degeneracy_check, generate_sequence, ModelPrior, Result};

pub fn run_example() -> Result<(usize, usize, bool)> {
    let model = ModelPrior::default().sample_mixed_sign(11)?;
    let run = generate_sequence(&model, 500.0, 3)?;
    Ok((run.trigger_count(), run.accepted.len(), degeneracy_check(&run.triggers, &run.accepted)))
}

fn main() -> Result<()> {
    let (triggers, accepted, ok) = run_example()?;
    println!("{accepted} of {triggers} triggers accepted; non-degenerate: {ok}");
    Ok(())
}
