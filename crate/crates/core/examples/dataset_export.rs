//! Export a benchmark dataset, score it as an external predictor would,
//! and read the scores back.

use ctig::counterfactual::{metric, perturb_model, prepare_experiment_a, ExperimentAConfig, MetricKind, Split};
use ctig::io::{export_dataset, import_dataset, import_scores, render_time, DatasetFile};
use ctig::ModelPrior;

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

pub fn run_example(dir: &std::path::Path) -> Result<f64> {
    let prior = ModelPrior::default();
    let m0 = prior.sample_mixed_sign(1)?;
    let md = perturb_model(&m0, &prior.adjacency, 0.5, 2)?;
    let cfg = ExperimentAConfig { horizon: 200.0, distance_iters: None, ..Default::default() };
    let data = prepare_experiment_a(&m0, &md, &cfg, 3)?;
    let path = dir.join("dataset.csv");
    export_dataset(&DatasetFile::from_experiment_a(&data, m0.tau_bar(), None, None)?, &path)?;

    // A stand-in predictor that always says "yes".
    let file = import_dataset(&path)?;
    let eval = file.eval_set(Split::Test)?;
    let mut text = String::from("id,timestamp,score\n");
    for item in &eval.items {
        text.push_str(&format!("{},{},0.9\n", item.event_type, render_time(item.time)));
    }
    let scores_path = dir.join("scores.csv");
    std::fs::write(&scores_path, text)?;
    let scores = import_scores(&scores_path, &eval)?;
    Ok(metric(&scores, &eval.labels(), MetricKind::Accuracy)?)
}

fn main() -> Result<()> {
    let dir = std::env::temp_dir().join("ctig-dataset-example");
    std::fs::create_dir_all(&dir)?;
    println!("accuracy of the constant predictor: {:.3}", run_example(&dir)?);
    Ok(())
}
