use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::evaluation::{negative_sample, restrict, EvaluationSet, SamplingMode, Scorer, Split};
use super::gap::{performance_gap, GapRecord};
use super::metrics::{metric, MetricKind};
use crate::causal::{degeneracy_check, generate_sequence, CausalModel, EventSequence};
use crate::distance::{directed_distance, mean_distance};
use crate::error::{Error, Result};
use crate::point_process::{timeline_order, Event, TriggerStream};
use crate::seed::{derive_seed, rng_from_seed};
use crate::stats::{normal_ci, ConfidenceInterval};

/// Reassigns the timestamps of `sequence` by a uniform random permutation.
///
/// Event types keep their identity; the multisets of types and of times are
/// both preserved.
pub fn shuffle_timestamps(sequence: &EventSequence, seed: u64) -> EventSequence {
    let mut times: Vec<f64> = sequence.events().iter().map(|e| e.time).collect();
    times.shuffle(&mut rng_from_seed(seed));
    let mut events: Vec<Event> = sequence
        .events()
        .iter()
        .zip(times)
        .map(|(e, t)| Event::new(e.event_type, t))
        .collect();
    events.sort_by(timeline_order);
    EventSequence::from_sorted(events, sequence.horizon())
}

/// A metric on the original test set and on its counterfactual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualOutcome {
    pub metric: MetricKind,
    pub y_x_u: f64,
    pub y_xprime_u: f64,
    pub train_window: (f64, f64),
    pub test_window: (f64, f64),
}

impl CounterfactualOutcome {
    /// Gap between the errors `1 - y` on the counterfactual and original.
    pub fn gap(&self) -> Result<GapRecord> {
        performance_gap(1.0 - self.y_x_u, 1.0 - self.y_xprime_u, self.metric)
    }
}

fn validate_split(horizon: f64, tau_split: f64) -> Result<()> {
    if !(horizon > 0.0) {
        return Err(Error::param("horizon", format!("must be positive, got {horizon}")));
    }
    if !(tau_split > 0.0 && tau_split < horizon) {
        return Err(Error::DegenerateWindow(format!(
            "split {tau_split} must lie strictly inside (0, {horizon})"
        )));
    }
    Ok(())
}

fn nonempty(seq: &EventSequence, what: &str) -> Result<()> {
    if seq.is_empty() {
        return Err(Error::DegenerateWindow(format!("{what} window holds no events")));
    }
    Ok(())
}

fn score_and_measure(
    scorer: &dyn Scorer,
    split: Split,
    eval: &EvaluationSet,
    history: &EventSequence,
    which: MetricKind,
) -> Result<f64> {
    let scores = scorer.score(split, eval, history)?;
    metric(&scores, &eval.labels(), which)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentAConfig {
    pub horizon: f64,
    /// Defaults to half the horizon.
    pub tau_split: Option<f64>,
    pub negatives_per_positive: usize,
    /// Iterations of the model-distance estimate; `None` skips it.
    pub distance_iters: Option<usize>,
    pub metric: MetricKind,
}

impl Default for ExperimentAConfig {
    fn default() -> Self {
        Self {
            horizon: 1000.0,
            tau_split: None,
            negatives_per_positive: 1,
            distance_iters: Some(crate::distance::DEFAULT_ITERS),
            metric: MetricKind::Accuracy,
        }
    }
}

impl ExperimentAConfig {
    pub fn split(&self) -> f64 {
        self.tau_split.unwrap_or(self.horizon / 2.0)
    }
}

/// Splits and evaluation sets of a causal-shift experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentAData {
    pub universe: usize,
    pub horizon: f64,
    pub tau_split: f64,
    pub train: EventSequence,
    pub test: EventSequence,
    pub test_cf: EventSequence,
    pub eval_test: EvaluationSet,
    pub eval_cf: EvaluationSet,
    /// Positives visible when scoring the original test set.
    pub history_test: EventSequence,
    /// Training positives followed by the counterfactual test positives.
    pub history_cf: EventSequence,
    pub degeneracy_passed: bool,
}

pub fn prepare_experiment_a(
    model_0: &CausalModel,
    model_dagger: &CausalModel,
    config: &ExperimentAConfig,
    seed: u64,
) -> Result<ExperimentAData> {
    if model_0.n() != model_dagger.n() {
        return Err(Error::param("model_dagger", "type universes differ"));
    }
    let (horizon, tau) = (config.horizon, config.split());
    validate_split(horizon, tau)?;
    let real_0 = generate_sequence(model_0, horizon, derive_seed(seed, "s0", 0))?;
    let real_dagger = generate_sequence(model_dagger, horizon, derive_seed(seed, "s-dagger", 0))?;
    let train = restrict(&real_0.accepted, 0.0, tau)?;
    let test = restrict(&real_0.accepted, tau, horizon)?;
    let test_cf = restrict(&real_dagger.accepted, tau, horizon)?;
    nonempty(&test, "test")?;
    nonempty(&test_cf, "counterfactual test")?;
    let k = config.negatives_per_positive;
    let n = model_0.n();
    let eval_test = negative_sample(&test, (tau, horizon), n, SamplingMode::Transductive, k, derive_seed(seed, "neg-test", 0))?;
    let eval_cf = negative_sample(&test_cf, (tau, horizon), n, SamplingMode::Transductive, k, derive_seed(seed, "neg-cf", 0))?;
    let history_cf = train.union(&test_cf);
    Ok(ExperimentAData {
        universe: n,
        horizon,
        tau_split: tau,
        degeneracy_passed: degeneracy_check(&real_0.triggers, &real_0.accepted)
            && degeneracy_check(&real_dagger.triggers, &real_dagger.accepted),
        train,
        test,
        test_cf,
        eval_test,
        eval_cf,
        history_test: real_0.accepted,
        history_cf,
    })
}

impl ExperimentAData {
    pub fn evaluate(&self, scorer: &dyn Scorer, which: MetricKind) -> Result<CounterfactualOutcome> {
        Ok(CounterfactualOutcome {
            metric: which,
            y_x_u: score_and_measure(scorer, Split::Test, &self.eval_test, &self.history_test, which)?,
            y_xprime_u: score_and_measure(scorer, Split::TestCf, &self.eval_cf, &self.history_cf, which)?,
            train_window: (0.0, self.tau_split),
            test_window: (self.tau_split, self.horizon),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentAResult {
    pub outcome: CounterfactualOutcome,
    pub gap: GapRecord,
    pub degeneracy_passed: bool,
}

/// Causal shift: train window from the true model, test windows from the
/// true and from the distorted model.
pub fn run_experiment_a(
    model_0: &CausalModel,
    model_dagger: &CausalModel,
    config: &ExperimentAConfig,
    scorer: &dyn Scorer,
    seed: u64,
) -> Result<ExperimentAResult> {
    let data = prepare_experiment_a(model_0, model_dagger, config, seed)?;
    let outcome = data.evaluate(scorer, config.metric)?;
    let mut gap = outcome.gap()?;
    if let Some(iters) = config.distance_iters {
        let d_bar = mean_distance(model_0, model_dagger, config.horizon, iters, derive_seed(seed, "d-bar", 0))?;
        gap = gap.with_distance(d_bar.mean);
    }
    Ok(ExperimentAResult {
        outcome,
        gap,
        degeneracy_passed: data.degeneracy_passed,
    })
}

/// Directed distance of `model` on `history`, probing at the evaluation
/// set's candidate events in place of the unobserved triggers.
pub fn proxy_distance(model: &CausalModel, history: &EventSequence, eval_set: &EvaluationSet) -> Result<f64> {
    let mut per_type: Vec<Vec<f64>> = vec![Vec::new(); model.n()];
    for it in &eval_set.items {
        if it.event_type >= model.n() {
            return Err(Error::param("eval_set", format!("type {} outside model", it.event_type)));
        }
        per_type[it.event_type].push(it.time);
    }
    let probes = per_type
        .into_iter()
        .enumerate()
        .map(|(i, mut times)| {
            times.sort_by(f64::total_cmp);
            times.dedup();
            TriggerStream::new(i, times)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(directed_distance(model, model, history, &probes)?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentBConfig {
    pub horizon: f64,
    pub tau_split: Option<f64>,
    pub n_shuffles: usize,
    pub negatives_per_positive: usize,
    pub metric: MetricKind,
}

impl Default for ExperimentBConfig {
    fn default() -> Self {
        Self {
            horizon: 1000.0,
            tau_split: None,
            n_shuffles: 10,
            negatives_per_positive: 1,
            metric: MetricKind::Accuracy,
        }
    }
}

impl ExperimentBConfig {
    pub fn split(&self) -> f64 {
        self.tau_split.unwrap_or(self.horizon / 2.0)
    }
}

/// One version of the test window with its evaluation set and history.
#[derive(Debug, Clone, PartialEq)]
pub struct TestCopy {
    pub test: EventSequence,
    pub eval: EvaluationSet,
    pub history: EventSequence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentBData {
    pub universe: usize,
    pub horizon: f64,
    pub tau_split: f64,
    pub train: EventSequence,
    pub original: TestCopy,
    pub shuffled: Vec<TestCopy>,
    pub degeneracy_passed: bool,
}

fn test_copy(train: &EventSequence, test: EventSequence, window: (f64, f64), n: usize, k: usize, neg_seed: u64) -> Result<TestCopy> {
    let eval = negative_sample(&test, window, n, SamplingMode::Transductive, k, neg_seed)?;
    let history = train.union(&test);
    Ok(TestCopy { test, eval, history })
}

pub fn prepare_experiment_b(model_0: &CausalModel, config: &ExperimentBConfig, seed: u64) -> Result<ExperimentBData> {
    if config.n_shuffles == 0 {
        return Err(Error::param("n_shuffles", "need at least one shuffled copy"));
    }
    let (horizon, tau) = (config.horizon, config.split());
    validate_split(horizon, tau)?;
    let real = generate_sequence(model_0, horizon, derive_seed(seed, "s0", 0))?;
    let train = restrict(&real.accepted, 0.0, tau)?;
    let test = restrict(&real.accepted, tau, horizon)?;
    nonempty(&test, "test")?;
    let n = model_0.n();
    let k = config.negatives_per_positive;
    // copies share the negative-sampling stream so an identity shuffle
    // reproduces the original evaluation set
    let neg_seed = derive_seed(seed, "neg-test", 0);
    let window = (tau, horizon);
    let original = test_copy(&train, test.clone(), window, n, k, neg_seed)?;
    let shuffled = (0..config.n_shuffles as u64)
        .map(|s| {
            let copy = shuffle_timestamps(&test, derive_seed(seed, "shuffle", s));
            test_copy(&train, copy, window, n, k, neg_seed)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentBData {
        universe: n,
        horizon,
        tau_split: tau,
        train,
        original,
        shuffled,
        degeneracy_passed: degeneracy_check(&real.triggers, &real.accepted),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentBResult {
    /// One outcome per shuffled copy, each against the same original.
    pub outcomes: Vec<CounterfactualOutcome>,
    /// Proxy distance of the original test window under the true model.
    pub original_distance: f64,
    pub shuffle_distances: Vec<f64>,
    pub shuffle_distance_ci: ConfidenceInterval,
    pub degeneracy_passed: bool,
}

impl ExperimentBResult {
    pub fn y_original(&self) -> f64 {
        self.outcomes[0].y_x_u
    }

    pub fn y_shuffled(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.y_xprime_u).collect()
    }
}

impl ExperimentBData {
    pub fn evaluate(&self, model_0: &CausalModel, scorer: &dyn Scorer, which: MetricKind) -> Result<ExperimentBResult> {
        let y_x = score_and_measure(scorer, Split::Test, &self.original.eval, &self.original.history, which)?;
        let mut outcomes = Vec::with_capacity(self.shuffled.len());
        let mut shuffle_distances = Vec::with_capacity(self.shuffled.len());
        for copy in &self.shuffled {
            outcomes.push(CounterfactualOutcome {
                metric: which,
                y_x_u: y_x,
                y_xprime_u: score_and_measure(scorer, Split::TestCf, &copy.eval, &copy.history, which)?,
                train_window: (0.0, self.tau_split),
                test_window: (self.tau_split, self.horizon),
            });
            shuffle_distances.push(proxy_distance(model_0, &copy.history, &copy.eval)?);
        }
        Ok(ExperimentBResult {
            outcomes,
            original_distance: proxy_distance(model_0, &self.original.history, &self.original.eval)?,
            shuffle_distance_ci: normal_ci(&shuffle_distances, 0.95),
            shuffle_distances,
            degeneracy_passed: self.degeneracy_passed,
        })
    }
}

/// Timestamp shuffling: the test window of one realisation against
/// `n_shuffles` independently shuffled copies.
pub fn run_experiment_b(
    model_0: &CausalModel,
    config: &ExperimentBConfig,
    scorer: &dyn Scorer,
    seed: u64,
) -> Result<ExperimentBResult> {
    prepare_experiment_b(model_0, config, seed)?.evaluate(model_0, scorer, config.metric)
}
