use std::collections::BTreeSet;

use rand::seq::index::sample as sample_indices;
use serde::{Deserialize, Serialize};

use crate::causal::{CausalModel, EventSequence};
use crate::error::{Error, Result};
use crate::point_process::Event;
use crate::seed::rng_from_seed;

/// Events of `sequence` with times in `[a, b)`.
pub fn restrict(sequence: &EventSequence, a: f64, b: f64) -> Result<EventSequence> {
    if !(a >= 0.0 && a < b) {
        return Err(Error::param("b", format!("need 0 <= a < b, got [{a}, {b})")));
    }
    let events = sequence
        .events()
        .iter()
        .filter(|e| e.time >= a && e.time < b)
        .copied()
        .collect();
    Ok(EventSequence::from_sorted(events, sequence.horizon()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Negatives drawn from every other type of the universe.
    Global,
    /// Negatives drawn only from types observed among the positives.
    Transductive,
}

/// Dataset splits exchanged with external predictors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
    TestCf,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
            Split::TestCf => "test_cf",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "train" => Some(Split::Train),
            "test" => Some(Split::Test),
            "test_cf" => Some(Split::TestCf),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalItem {
    pub event_type: usize,
    pub time: f64,
    pub label: bool,
}

/// Labelled candidate events: observed positives and sampled negatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSet {
    pub items: Vec<EvalItem>,
    pub window: (f64, f64),
    pub mode: SamplingMode,
}

impl EvaluationSet {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn labels(&self) -> Vec<bool> {
        self.items.iter().map(|it| it.label).collect()
    }

    pub fn positives(&self) -> impl Iterator<Item = &EvalItem> {
        self.items.iter().filter(|it| it.label)
    }

    /// Every trigger in the window, labelled by whether it was accepted.
    pub fn from_triggers(
        triggers: &[crate::point_process::TriggerStream],
        accepted: &EventSequence,
        window: (f64, f64),
    ) -> Self {
        let mut items: Vec<EvalItem> = triggers
            .iter()
            .flat_map(|s| {
                s.times()
                    .iter()
                    .filter(|&&t| t >= window.0 && t < window.1)
                    .map(move |&t| EvalItem {
                        event_type: s.event_type,
                        time: t,
                        label: accepted.contains(s.event_type, t),
                    })
            })
            .collect();
        items.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.event_type.cmp(&b.event_type)));
        Self {
            items,
            window,
            mode: SamplingMode::Global,
        }
    }
}

/// Pairs each positive `(i, t)` with `k` distinct negatives `(j, t)`,
/// `j != i`, drawn uniformly from the candidate types of `mode`.
pub fn negative_sample(
    positives: &EventSequence,
    window: (f64, f64),
    universe_size: usize,
    mode: SamplingMode,
    k: usize,
    seed: u64,
) -> Result<EvaluationSet> {
    if universe_size < 2 {
        return Err(Error::param("universe_size", format!("need >= 2, got {universe_size}")));
    }
    if k == 0 {
        return Err(Error::param("k", "need at least one negative per positive"));
    }
    if let Some(e) = positives.events().iter().find(|e| e.event_type >= universe_size) {
        return Err(Error::param(
            "positives",
            format!("type {} outside universe of size {universe_size}", e.event_type),
        ));
    }
    if let Some(e) = positives.events().iter().find(|e| e.time < window.0 || e.time >= window.1) {
        return Err(Error::param(
            "window",
            format!("positive at {} outside [{}, {})", e.time, window.0, window.1),
        ));
    }
    let candidates: Vec<usize> = match mode {
        SamplingMode::Global => (0..universe_size).collect(),
        SamplingMode::Transductive => {
            let observed: BTreeSet<usize> = positives.events().iter().map(|e| e.event_type).collect();
            if observed.len() < 2 && !positives.is_empty() {
                return Err(Error::Sampling(format!(
                    "transductive sampling needs >= 2 observed types, found {}",
                    observed.len()
                )));
            }
            observed.into_iter().collect()
        }
    };
    if k + 1 > candidates.len() && !positives.is_empty() {
        return Err(Error::param(
            "k",
            format!("{k} negatives requested but only {} other types", candidates.len() - 1),
        ));
    }
    let mut rng = rng_from_seed(seed);
    let mut items = Vec::with_capacity(positives.len() * (k + 1));
    for &Event { event_type: i, time: t } in positives.events() {
        items.push(EvalItem {
            event_type: i,
            time: t,
            label: true,
        });
        let others: Vec<usize> = candidates.iter().copied().filter(|&c| c != i).collect();
        for idx in sample_indices(&mut rng, others.len(), k) {
            items.push(EvalItem {
                event_type: others[idx],
                time: t,
                label: false,
            });
        }
    }
    Ok(EvaluationSet { items, window, mode })
}

/// Scores each candidate by its feasibility under `model` given `history`.
///
/// Every candidate shares its timestamp with an observed event, so the
/// trigger factor is taken to be one.
pub fn oracle_predict(model: &CausalModel, eval_set: &EvaluationSet, history: &EventSequence) -> Vec<f64> {
    eval_set
        .items
        .iter()
        .map(|it| {
            let feasible = it.event_type < model.n() && model.feasible(it.event_type, it.time, history);
            if feasible { 1.0 } else { 0.0 }
        })
        .collect()
}

/// Source of per-item scores for an evaluation set.
pub trait Scorer {
    fn score(&self, split: Split, eval_set: &EvaluationSet, history: &EventSequence) -> Result<Vec<f64>>;
}

/// The predictor with access to the true causal parameters.
#[derive(Debug, Clone, Copy)]
pub struct OracleScorer<'a>(pub &'a CausalModel);

impl Scorer for OracleScorer<'_> {
    fn score(&self, _split: Split, eval_set: &EvaluationSet, history: &EventSequence) -> Result<Vec<f64>> {
        Ok(oracle_predict(self.0, eval_set, history))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::{generate_sequence, ModelPrior};
    use ndarray::array;

    fn seq(events: &[(usize, f64)], horizon: f64) -> EventSequence {
        EventSequence::new(events.iter().map(|&(i, t)| Event::new(i, t)).collect(), horizon).unwrap()
    }

    #[test]
    fn restrict_examples() {
        let s = seq(&[(0, 0.0), (1, 2.0), (0, 5.0), (2, 9.5)], 10.0);
        assert_eq!(restrict(&s, 0.0, 10.0).unwrap(), s);
        assert!(restrict(&s, 10.0, 20.0).unwrap().is_empty());
        let r = restrict(&s, 2.0, 5.0).unwrap();
        assert_eq!(r.events(), &[Event::new(1, 2.0)]);
        assert!(restrict(&s, 3.0, 3.0).is_err());
        assert!(restrict(&s, -1.0, 3.0).is_err());
    }

    #[test]
    fn single_positive_global_negative_is_forced() {
        let s = seq(&[(1, 3.0)], 10.0);
        let ev = negative_sample(&s, (0.0, 10.0), 2, SamplingMode::Global, 1, 0).unwrap();
        assert_eq!(ev.len(), 2);
        assert_eq!(ev.items[1], EvalItem { event_type: 0, time: 3.0, label: false });
    }

    #[test]
    fn negative_sampling_counts_and_errors() {
        let s = seq(&[(1, 3.0), (2, 4.0), (1, 5.0)], 10.0);
        let ev = negative_sample(&s, (0.0, 10.0), 5, SamplingMode::Global, 1, 0).unwrap();
        assert_eq!(ev.len(), 2 * s.len());
        let ev = negative_sample(&s, (0.0, 10.0), 5, SamplingMode::Global, 3, 0).unwrap();
        assert_eq!(ev.len(), 4 * s.len());

        let single = seq(&[(1, 3.0), (1, 5.0)], 10.0);
        assert!(matches!(
            negative_sample(&single, (0.0, 10.0), 5, SamplingMode::Transductive, 1, 0),
            Err(Error::Sampling(_))
        ));
        assert!(negative_sample(&s, (0.0, 10.0), 1, SamplingMode::Global, 1, 0).is_err());
        assert!(negative_sample(&s, (0.0, 10.0), 3, SamplingMode::Transductive, 2, 0).is_err());
        assert!(negative_sample(&s, (0.0, 4.5), 5, SamplingMode::Global, 1, 0).is_err());
    }

    #[test]
    fn label_soundness() {
        let model = ModelPrior::default().sample_mixed_sign(4).unwrap();
        let g = generate_sequence(&model, 300.0, 1).unwrap();
        let ev = negative_sample(&g.accepted, (0.0, 300.0), 7, SamplingMode::Transductive, 1, 9).unwrap();
        for it in &ev.items {
            if it.label {
                assert!(g.accepted.contains(it.event_type, it.time));
            } else {
                assert!(ev.positives().any(|p| p.time == it.time && p.event_type != it.event_type));
            }
        }
    }

    #[test]
    fn transductive_negatives_are_uniform_over_observed() {
        // 10^4 positives spread over 5 of 10 types
        let observed = [1usize, 3, 4, 7, 9];
        let events: Vec<(usize, f64)> = (0..10_000).map(|k| (observed[k % 5], k as f64 * 0.01)).collect();
        let s = seq(&events, 200.0);
        let ev = negative_sample(&s, (0.0, 200.0), 10, SamplingMode::Transductive, 1, 42).unwrap();
        let mut counts = [0usize; 10];
        for it in ev.items.iter().filter(|it| !it.label) {
            counts[it.event_type] += 1;
        }
        for (ty, &c) in counts.iter().enumerate() {
            if observed.contains(&ty) {
                // candidate for the 8000 positives of other types, chosen w.p. 1/4
                let expected = 8000.0 * 0.25;
                let sigma = (8000.0f64 * 0.25 * 0.75).sqrt();
                assert!((c as f64 - expected).abs() < 3.0 * sigma, "type {ty}: {c}");
            } else {
                assert_eq!(c, 0);
            }
        }
    }

    #[test]
    fn oracle_on_true_triggers_is_exact() {
        let model = ModelPrior::default().sample_mixed_sign(2).unwrap();
        let g = generate_sequence(&model, 500.0, 3).unwrap();
        let ev = EvaluationSet::from_triggers(&g.triggers, &g.accepted, (0.0, 500.0));
        let scores = oracle_predict(&model, &ev, &g.accepted);
        for (s, it) in scores.iter().zip(&ev.items) {
            assert_eq!(*s == 1.0, it.label);
        }
    }

    #[test]
    fn oracle_scores_nonnegative_models_as_all_feasible() {
        let model = CausalModel::new(vec![1.0, 1.0], array![[0.4, 0.1], [0.0, 0.0]], 1.0).unwrap();
        let g = generate_sequence(&model, 100.0, 3).unwrap();
        let ev = negative_sample(&g.accepted, (0.0, 100.0), 2, SamplingMode::Global, 1, 1).unwrap();
        assert!(oracle_predict(&model, &ev, &g.accepted).iter().all(|s| *s == 1.0));
    }

    #[test]
    fn feasible_negative_scores_one() {
        // type 0 has no parents so any negative of type 0 is feasible
        let model = CausalModel::new(vec![1.0, 1.0], array![[0.0, 0.0], [0.0, -1.0]], 1.0).unwrap();
        let history = seq(&[(1, 1.0)], 10.0);
        let ev = EvaluationSet {
            items: vec![
                EvalItem { event_type: 1, time: 1.0, label: true },
                EvalItem { event_type: 0, time: 1.0, label: false },
            ],
            window: (0.0, 10.0),
            mode: SamplingMode::Global,
        };
        assert_eq!(oracle_predict(&model, &ev, &history), vec![1.0, 1.0]);
    }
}
