//! Train on one model, test on a distorted copy, and compare the oracle's
//! accuracy on both test windows.

use ctig::counterfactual::{perturb_model, run_experiment_a, ExperimentAConfig, OracleScorer};
use ctig::{ModelPrior, Result};

pub fn run_example() -> Result<(f64, f64, f64)> {
    let prior = ModelPrior::default();
    let m0 = prior.sample_mixed_sign(3)?;
    let md = perturb_model(&m0, &prior.adjacency, 0.8, 4)?;
    let cfg = ExperimentAConfig { horizon: 400.0, distance_iters: Some(4), ..Default::default() };
    let res = run_experiment_a(&m0, &md, &cfg, &OracleScorer(&m0), 5)?;
    Ok((res.outcome.y_x_u, res.outcome.y_xprime_u, res.gap.delta))
}

fn main() -> Result<()> {
    let (y, y_cf, delta) = run_example()?;
    println!("accuracy original {y:.3}, distorted {y_cf:.3}, gap {delta:.3}");
    Ok(())
}
