//! Config-driven runs: each experiment kind turns a [`RunConfig`] into a
//! results document and plot-data tables under the output directory.

use std::path::{Path, PathBuf};

use log::info;
use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::causal::{generate_sequence, sample_random_model, AdjacencySpec, CausalModel};
use crate::counterfactual::{
    beta_curve, delta_star_curve, gap_grid, hypothesis_study, perturb_model, prepare_experiment_a,
    prepare_experiment_b, CounterfactualOutcome, ExperimentAConfig, ExperimentBConfig, GapRecord, HypothesisConfig,
    OracleScorer, Split,
};
use crate::ctig::{blend_node_features, build_ctig_model, build_ctig_with_features, sample_node_features};
use crate::distance::{mean_distance, variance_decay_study, StudyCell};
use crate::error::{Error, Result};
use crate::io::config::{Experiment, ModelSource, RunConfig};
use crate::io::dataset::{export_dataset, import_dataset, DatasetFile};
use crate::io::report::{emit_report, PlotTable, Report};
use crate::io::scores::import_scores;
use crate::properties::{
    estimate_pns, interventional_pns_oracle, is_markovian, monotonicity_table, structural_checks,
};
use crate::seed::{derive_seed, derived_rng};
use crate::stats::{normal_ci, quantile};

/// Paths written by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub experiment: Experiment,
    pub written: Vec<PathBuf>,
}

pub fn execute(config: &RunConfig) -> Result<RunSummary> {
    let violations = config.violations();
    if !violations.is_empty() {
        return Err(Error::Config(violations));
    }
    info!("running {} with seed {}", config.experiment.name(), config.seed);
    let (results, tables) = match config.experiment {
        Experiment::Generate => run_generate(config)?,
        Experiment::Ctig => run_ctig(config)?,
        Experiment::Distance => run_distance(config)?,
        Experiment::VarianceStudy => run_variance(config)?,
        Experiment::ExperimentA => run_experiment_a(config)?,
        Experiment::ExperimentB => run_experiment_b(config)?,
        Experiment::Properties => run_properties(config)?,
        Experiment::Export => run_export(config)?,
    };
    let report = Report::new(config.experiment.name(), config, results);
    let mut written = emit_report(&report, &tables, &config.out)?;
    if config.experiment == Experiment::Export {
        written.extend(dataset_paths(config));
    }
    Ok(RunSummary { experiment: config.experiment, written })
}

type Output = (Value, Vec<PlotTable>);

fn base_model(config: &RunConfig, seed: u64) -> Result<CausalModel> {
    let prior = config.model.prior();
    if config.model.mixed_sign { prior.sample_mixed_sign(seed) } else { prior.sample(seed) }
}

/// A true model and a distorted copy of it at the given strength.
///
/// Random models are distorted by re-drawing influence entries; CTIG models
/// by blending their node features with fresh ones.
fn model_pair(config: &RunConfig, source: ModelSource, strength: f64, seed: u64) -> Result<(CausalModel, CausalModel)> {
    match source {
        ModelSource::Random => {
            let m0 = base_model(config, derive_seed(seed, "true-model", 0))?;
            let adjacency = config.model.prior().adjacency;
            let md = perturb_model(&m0, &adjacency, strength, derive_seed(seed, "distorted-model", 0))?;
            Ok((m0, md))
        }
        ModelSource::Ctig => {
            let spec = config.ctig.spec(&config.model, derive_seed(seed, "ctig", 0));
            let x = sample_node_features(spec.n, spec.r, spec.seeds.features)?;
            let xd = blend_node_features(&x, strength, derive_seed(seed, "ctig-blend", 0))?;
            let m0 = build_ctig_with_features(&spec, x)?.model;
            let md = build_ctig_with_features(&spec, xd)?.model;
            Ok((m0, md))
        }
    }
}

fn ctig_nodes(config: &RunConfig, source: ModelSource) -> Option<usize> {
    (source == ModelSource::Ctig).then_some(config.ctig.n)
}

fn log_uniform(lo: f64, hi: f64, u: f64) -> f64 {
    lo * (hi / lo).powf(u)
}

fn run_generate(config: &RunConfig) -> Result<Output> {
    let model = base_model(config, derive_seed(config.seed, "model", 0))?;
    let g = generate_sequence(&model, config.model.horizon, derive_seed(config.seed, "generate", 0))?;
    let mut events = PlotTable::new("events", vec!["event_type", "time"]);
    for e in g.accepted.events() {
        events.rows.push(vec![e.event_type.to_string(), format!("{}", e.time)]);
    }
    let results = json!({
        "model": model,
        "triggers": g.trigger_count(),
        "accepted": g.accepted.len(),
        "non_degenerate": crate::causal::degeneracy_check(&g.triggers, &g.accepted),
    });
    Ok((results, vec![events]))
}

fn run_ctig(config: &RunConfig) -> Result<Output> {
    let spec = config.ctig.spec(&config.model, config.seed);
    let c = build_ctig_model(&spec)?;
    let mut t = PlotTable::new("influences", vec!["i", "j", "src_i", "dst_i", "src_j", "dst_j", "h", "theta_tilde", "theta"]);
    let m = &c.matrices;
    for ((i, j), &h) in m.h.indexed_iter() {
        let (a, b) = c.space.pair(i)?;
        let (x, y) = c.space.pair(j)?;
        t.rows.push(
            [i, j, a, b, x, y].iter().map(usize::to_string).chain(
                [h, m.theta_tilde[[i, j]], m.theta[[i, j]]].iter().map(|v| format!("{v}")),
            )
            .collect(),
        );
    }
    let nnz = |a: &Array2<f64>| a.iter().filter(|v| **v != 0.0).count();
    let g = generate_sequence(&c.model, config.model.horizon, derive_seed(config.seed, "generate", 0))?;
    let results = json!({
        "spec": spec,
        "edge_types": c.space.len(),
        "masked_edges": m.masked_edges,
        "nonzero_theta_tilde": nnz(&m.theta_tilde),
        "nonzero_theta": nnz(&m.theta),
        "model": c.model,
        "accepted": g.accepted.len(),
        "triggers": g.trigger_count(),
    });
    Ok((results, vec![t]))
}

fn run_distance(config: &RunConfig) -> Result<Output> {
    let mut t = PlotTable::new("distances", vec!["pair", "mean", "variance", "iters", "horizon"]);
    let mut means = Vec::new();
    for k in 0..config.distance.pairs as u64 {
        let a = base_model(config, derive_seed(config.seed, "model-a", k))?;
        let b = base_model(config, derive_seed(config.seed, "model-b", k))?;
        let est = mean_distance(&a, &b, config.model.horizon, config.distance.iters, derive_seed(config.seed, "distance", k))?;
        t.rows.push(vec![k.to_string(), format!("{}", est.mean), format!("{}", est.variance), est.iters.to_string(), format!("{}", est.horizon)]);
        means.push(est.mean);
    }
    Ok((json!({ "mean_distance": normal_ci(&means, 0.95) }), vec![t]))
}

fn run_variance(config: &RunConfig) -> Result<Output> {
    let a = base_model(config, derive_seed(config.seed, "model-a", 0))?;
    let b = base_model(config, derive_seed(config.seed, "model-b", 0))?;
    let vs = &config.variance_study;
    let grid: Vec<StudyCell> = vs.iters.iter().map(|&iters| StudyCell { horizon: vs.horizon, iters }).collect();
    let rows = variance_decay_study(&a, &b, &grid, vs.replications, config.seed)?;
    let x: Vec<f64> = rows.iter().map(|r| r.effective_size.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.variance.ln()).collect();
    let slope = if rows.len() >= 2 { Some(crate::stats::ols_slope(&x, &y)) } else { None };
    Ok((json!({ "rows": rows, "log_log_slope": slope }), vec![PlotTable::variance_decay(&rows)]))
}

/// Probability sweeps over the estimated-model study.
fn hypothesis_tables(records: &[GapRecord], delta_star: f64) -> Result<(Value, Vec<PlotTable>)> {
    let d_bar: Vec<f64> = records.iter().filter_map(|r| r.d_bar).filter(|&d| d > 0.0).collect();
    let betas: Vec<f64> = if d_bar.is_empty() { Vec::new() } else { (0..10).map(|k| quantile(&d_bar, k as f64 / 10.0)).collect() };
    let deltas: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let beta = beta_curve(records, delta_star, &betas)?;
    let delta = delta_star_curve(records, &deltas)?;
    let grid = gap_grid(records, &betas, &deltas)?;
    let tables = vec![
        PlotTable::probability_cells("hypothesis_beta_curve", &beta),
        PlotTable::probability_cells("hypothesis_delta_star_curve", &delta),
        PlotTable::probability_cells("hypothesis_grid", &grid),
    ];
    Ok((json!({ "beta_curve": beta, "delta_star_curve": delta }), tables))
}

fn run_experiment_a(config: &RunConfig) -> Result<Output> {
    let a = &config.experiment_a;
    let hyp_cfg = HypothesisConfig {
        prior: config.model.prior(),
        horizon: config.model.horizon,
        pairs: a.hypothesis_pairs,
        distance_iters: config.distance.iters,
        strength_range: (a.strength_min, a.strength_max),
        distortion_range: (a.distortion_min, a.distortion_max),
    };
    let hyp = hypothesis_study(&hyp_cfg, derive_seed(config.seed, "hypothesis", 0))?;
    let hyp_records: Vec<GapRecord> = hyp.iter().map(|r| r.gap).collect();
    let (hyp_summary, mut tables) = hypothesis_tables(&hyp_records, a.delta_star)?;
    let mut scatter = PlotTable::gap_scatter(&hyp_records, a.lowess_fraction)?;
    scatter.name = "hypothesis_scatter".into();
    tables.push(scatter);

    let exp_cfg = ExperimentAConfig {
        horizon: config.model.horizon,
        tau_split: Some(a.split_fraction * config.model.horizon),
        negatives_per_positive: a.negatives,
        distance_iters: Some(config.distance.iters),
        metric: a.metric,
    };
    let runs = (0..a.runs as u64)
        .into_par_iter()
        .map(|k| {
            let u: f64 = derived_rng(config.seed, "distortion", k).random();
            let strength = log_uniform(a.distortion_min, a.distortion_max, u);
            let (m0, md) = model_pair(config, a.source, strength, derive_seed(config.seed, "pair", k))?;
            let res = crate::counterfactual::run_experiment_a(&m0, &md, &exp_cfg, &OracleScorer(&m0), derive_seed(config.seed, "run", k))?;
            Ok((strength, res))
        })
        .collect::<Result<Vec<_>>>()?;
    let gaps: Vec<GapRecord> = runs.iter().map(|r| r.1.gap).collect();
    tables.push(PlotTable::gap_scatter(&gaps, a.lowess_fraction)?);
    let outcomes: Vec<Vec<CounterfactualOutcome>> = runs.iter().map(|r| vec![r.1.outcome]).collect();
    tables.push(PlotTable::metric_samples("metric_samples", &outcomes));
    let y_x: Vec<f64> = runs.iter().map(|r| r.1.outcome.y_x_u).collect();
    let y_xp: Vec<f64> = runs.iter().map(|r| r.1.outcome.y_xprime_u).collect();
    let results = json!({
        "hypothesis": hyp_summary,
        "hypothesis_records": hyp,
        "runs": runs.iter().map(|(s, r)| json!({ "strength": s, "result": r })).collect::<Vec<_>>(),
        "y_original": normal_ci(&y_x, 0.95),
        "y_distorted": normal_ci(&y_xp, 0.95),
        "all_non_degenerate": runs.iter().all(|r| r.1.degeneracy_passed) && hyp.iter().all(|r| r.non_degenerate),
    });
    Ok((results, tables))
}

fn experiment_b_config(config: &RunConfig) -> ExperimentBConfig {
    let b = &config.experiment_b;
    ExperimentBConfig {
        horizon: config.model.horizon,
        tau_split: Some(b.split_fraction * config.model.horizon),
        n_shuffles: b.n_shuffles,
        negatives_per_positive: b.negatives,
        metric: b.metric,
    }
}

fn source_model(config: &RunConfig, source: ModelSource, seed: u64) -> Result<CausalModel> {
    match source {
        ModelSource::Random => base_model(config, seed),
        ModelSource::Ctig => Ok(build_ctig_model(&config.ctig.spec(&config.model, seed))?.model),
    }
}

fn run_experiment_b(config: &RunConfig) -> Result<Output> {
    let cfg = experiment_b_config(config);
    let results = (0..config.experiment_b.runs as u64)
        .into_par_iter()
        .map(|k| {
            let m = source_model(config, config.experiment_b.source, derive_seed(config.seed, "model", k))?;
            crate::counterfactual::run_experiment_b(&m, &cfg, &OracleScorer(&m), derive_seed(config.seed, "run", k))
        })
        .collect::<Result<Vec<_>>>()?;
    let outcomes: Vec<Vec<CounterfactualOutcome>> = results.iter().map(|r| r.outcomes.clone()).collect();
    let mut dist = PlotTable::new("shuffle_distances", vec!["run", "copy", "distance"]);
    for (run, r) in results.iter().enumerate() {
        dist.rows.push(vec![run.to_string(), "original".into(), format!("{}", r.original_distance)]);
        for (k, d) in r.shuffle_distances.iter().enumerate() {
            dist.rows.push(vec![run.to_string(), format!("shuffled_{k}"), format!("{d}")]);
        }
    }
    let run_means: Vec<f64> = results.iter().map(|r| r.shuffle_distance_ci.mean).collect();
    let separated = results.iter().filter(|r| r.outcomes.iter().all(|o| o.y_x_u > o.y_xprime_u)).count();
    let summary = json!({
        "runs": results,
        "shuffle_distance": normal_ci(&run_means, 0.95),
        "runs_with_metric_separation": separated,
    });
    Ok((summary, vec![PlotTable::metric_samples("metric_samples", &outcomes), dist]))
}

fn run_properties(config: &RunConfig) -> Result<Output> {
    let p = &config.properties;
    let mut mono = PlotTable::new("monotonicity", vec!["model", "i", "j", "theta", "verdict", "witness"]);
    let mut markovian = 0;
    let mut structural = true;
    for k in 0..p.models as u64 {
        let mut rng = derived_rng(config.seed, "properties-model", k);
        let n = rng.random_range(2..=p.max_parents + 1);
        let adjacency = AdjacencySpec::ErdosRenyi { p: config.model.edge_prob };
        let m = sample_random_model(n, &adjacency, (config.model.lambda_min, config.model.lambda_max), config.model.tau_bar, derive_seed(config.seed, "properties", k))?;
        markovian += usize::from(is_markovian(&m));
        structural &= structural_checks(&m).iter().all(|v| v.verdict);
        for v in monotonicity_table(&m)? {
            let (i, j) = (v.subject.i.unwrap_or(0), v.subject.j.unwrap_or(0));
            let witness = v.witness.map(|w| w.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")).unwrap_or_default();
            mono.rows.push(vec![k.to_string(), i.to_string(), j.to_string(), format!("{}", m.theta()[[i, j]]), v.verdict.to_string(), witness]);
        }
    }
    let mut pns = PlotTable::new("pns", vec!["config", "theta_ij", "theta_ik", "estimate", "oracle", "active_count", "inactive_count"]);
    for c in 0..p.pns_configs as u64 {
        let m = crate::properties::sample_monotone_pair_model(derive_seed(config.seed, "pns-model", c))?;
        let g = generate_sequence(&m, p.pns_horizon, derive_seed(config.seed, "pns-run", c))?;
        let est = estimate_pns(&g.accepted, &g.triggers[0], 0, 1, m.tau_bar())?;
        let oracle = interventional_pns_oracle(&m, 0, 1, p.pns_horizon, derive_seed(config.seed, "pns-oracle", c))?;
        pns.rows.push(vec![
            c.to_string(),
            format!("{}", m.theta()[[0, 1]]),
            format!("{}", m.theta()[[0, 2]]),
            format!("{}", est.value),
            format!("{oracle}"),
            est.active_count.to_string(),
            est.inactive_count.to_string(),
        ]);
    }
    let results = json!({
        "models": p.models,
        "monotonicity_checks": mono.rows.len(),
        "markovian_models": markovian,
        "structural_checks_hold": structural,
    });
    Ok((results, vec![mono, pns]))
}

fn dataset_paths(config: &RunConfig) -> Vec<PathBuf> {
    (0..config.export.datasets).map(|k| dataset_path(&config.out, k)).collect()
}

fn dataset_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("dataset_{k:04}.csv"))
}

fn run_export(config: &RunConfig) -> Result<Output> {
    std::fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    let tau_bar = config.model.tau_bar;
    let mut index = PlotTable::new("datasets", vec!["file", "d_bar", "test_rows", "test_cf_rows"]);
    for k in 0..config.export.datasets {
        let seed = derive_seed(config.seed, "dataset", k as u64);
        let file = match config.export.from {
            Experiment::ExperimentA => {
                let a = &config.experiment_a;
                let u: f64 = derived_rng(seed, "distortion", 0).random();
                let (m0, md) = model_pair(config, a.source, log_uniform(a.distortion_min, a.distortion_max, u), seed)?;
                let cfg = ExperimentAConfig {
                    horizon: config.model.horizon,
                    tau_split: Some(a.split_fraction * config.model.horizon),
                    negatives_per_positive: a.negatives,
                    distance_iters: None,
                    metric: a.metric,
                };
                let data = prepare_experiment_a(&m0, &md, &cfg, derive_seed(seed, "data", 0))?;
                let d_bar = mean_distance(&m0, &md, config.model.horizon, config.distance.iters, derive_seed(seed, "d-bar", 0))?.mean;
                DatasetFile::from_experiment_a(&data, tau_bar, ctig_nodes(config, a.source), Some(d_bar))?
            }
            _ => {
                let b = &config.experiment_b;
                let m = source_model(config, b.source, derive_seed(seed, "model", 0))?;
                let data = prepare_experiment_b(&m, &experiment_b_config(config), derive_seed(seed, "data", 0))?;
                DatasetFile::from_shuffle(&data, 0, tau_bar, ctig_nodes(config, b.source))?
            }
        };
        let path = dataset_path(&config.out, k);
        export_dataset(&file, &path)?;
        index.rows.push(vec![
            path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
            file.header.d_bar.map(|d| format!("{d}")).unwrap_or_default(),
            file.rows_of(Split::Test).count().to_string(),
            file.rows_of(Split::TestCf).count().to_string(),
        ]);
    }
    Ok((json!({ "datasets": config.export.datasets, "from": config.export.from }), vec![index]))
}

/// Metric of externally produced scores on both test splits of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExternalEvaluation {
    pub outcome: CounterfactualOutcome,
    pub gap: GapRecord,
}

pub fn evaluate_scores(
    dataset: &Path,
    test_scores: &Path,
    test_cf_scores: &Path,
    which: crate::counterfactual::MetricKind,
) -> Result<ExternalEvaluation> {
    let file = import_dataset(dataset)?;
    let eval_test = file.eval_set(Split::Test)?;
    let eval_cf = file.eval_set(Split::TestCf)?;
    let y = crate::counterfactual::metric(&import_scores(test_scores, &eval_test)?, &eval_test.labels(), which)?;
    let y_cf = crate::counterfactual::metric(&import_scores(test_cf_scores, &eval_cf)?, &eval_cf.labels(), which)?;
    let outcome = CounterfactualOutcome {
        metric: which,
        y_x_u: y,
        y_xprime_u: y_cf,
        train_window: (0.0, file.header.tau_split),
        test_window: (file.header.tau_split, file.header.horizon),
    };
    let mut gap = outcome.gap()?;
    if let Some(d) = file.header.d_bar {
        gap = gap.with_distance(d);
    }
    Ok(ExternalEvaluation { outcome, gap })
}
