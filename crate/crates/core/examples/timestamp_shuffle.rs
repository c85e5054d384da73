//! Compare a predictor on the true test window against copies with
//! shuffled timestamps.

use ctig::counterfactual::{run_experiment_b, ExperimentBConfig, OracleScorer};
use ctig::{ModelPrior, Result};

pub fn run_example() -> Result<(f64, Vec<f64>)> {
    let model = ModelPrior::default().sample_mixed_sign(8)?;
    let cfg = ExperimentBConfig { horizon: 400.0, n_shuffles: 3, ..Default::default() };
    let res = run_experiment_b(&model, &cfg, &OracleScorer(&model), 2)?;
    Ok((res.y_original(), res.y_shuffled()))
}

fn main() -> Result<()> {
    let (orig, shuffled) = run_example()?;
    println!("original {orig:.3}, shuffled {shuffled:.3?}");
    Ok(())
}
