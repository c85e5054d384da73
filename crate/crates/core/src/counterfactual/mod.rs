//! Counterfactual evaluation: chronological splits, negative sampling, the
//! oracle predictor, metrics, performance gaps and the two distortion
//! experiments (causal shift and timestamp shuffling).

mod evaluation;
mod experiments;
mod gap;
mod metrics;

pub use evaluation::{
    negative_sample, oracle_predict, restrict, EvalItem, EvaluationSet, OracleScorer, SamplingMode, Scorer,
    Split,
};
pub use experiments::{
    prepare_experiment_a, prepare_experiment_b, proxy_distance, run_experiment_a, run_experiment_b,
    shuffle_timestamps, CounterfactualOutcome, ExperimentAConfig, ExperimentAData, ExperimentAResult,
    ExperimentBConfig, ExperimentBData, ExperimentBResult, TestCopy,
};
pub use gap::{
    beta_curve, delta_star_curve, gap_grid, gap_probability, hypothesis_study, perturb_model, performance_gap,
    GapCell, GapRecord, HypothesisConfig, HypothesisRecord, ProbabilityEstimate,
};
pub use metrics::{metric, MetricKind};
