//! Build a causal temporal interaction graph over 5 nodes and simulate
//! its edge events.

use ctig::{build_ctig_model, generate_sequence, CtigSpec, Result};

pub fn run_example() -> Result<(usize, usize)> {
    let ctig = build_ctig_model(&CtigSpec::reference(42))?;
    let run = generate_sequence(&ctig.model, 1000.0, 1)?;
    for e in run.accepted.events().iter().take(5) {
        let (src, dst) = ctig.space.pair(e.event_type)?;
        println!("{src} -> {dst} at {:.4}", e.time);
    }
    Ok((ctig.space.len(), run.accepted.len()))
}

fn main() -> Result<()> {
    let (types, events) = run_example()?;
    println!("{events} edge events over {types} edge types");
    Ok(())
}
