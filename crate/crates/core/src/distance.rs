//! Distance between causal models via cross-model prediction error.
//!
//! Model B predicts, at every trigger of A's realisation, whether the
//! triggered event fires given A's accepted history. The directed distance
//! averages the disagreement with what A actually did; the symmetric
//! distance is the geometric mean of both directions and its Monte-Carlo
//! mean over paired realisations is the model distance.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::causal::{generate_sequence, CausalModel, EventSequence, GeneratedSequence};
use crate::error::{Error, Result};
use crate::point_process::TriggerStream;
use crate::seed::derive_seed;
use crate::stats::{mean, sample_variance};

pub const DEFAULT_ITERS: usize = 32;

fn check_universe(model: &CausalModel, seq: &EventSequence) -> Result<()> {
    if let Some(e) = seq.events().iter().find(|e| e.event_type >= model.n()) {
        return Err(Error::param(
            "sequence",
            format!("event type {} outside a model with {} types", e.event_type, model.n()),
        ));
    }
    Ok(())
}

/// Prediction of `model_b` for a type-`i` event at `t` on A's history.
pub fn cross_predict(
    model_b: &CausalModel,
    i: usize,
    t: f64,
    sequence_a: &EventSequence,
    trigger: bool,
) -> Result<bool> {
    if i >= model_b.n() {
        return Err(Error::param("i", format!("type {i} outside model with {} types", model_b.n())));
    }
    check_universe(model_b, sequence_a)?;
    Ok(trigger && model_b.feasible(i, t, sequence_a))
}

/// One direction of the distance, with the per-type breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectedDistance {
    pub value: f64,
    /// Mean disagreement per type; `None` for types without triggers.
    pub per_type: Vec<Option<f64>>,
    pub skipped: Vec<usize>,
}

/// Error of `model_b` on the realisation `(sequence_a, triggers_a)` of
/// `model_a`.
///
/// Types whose trigger stream is empty are skipped and the average is taken
/// over the remaining types.
pub fn directed_distance(
    model_b: &CausalModel,
    model_a: &CausalModel,
    sequence_a: &EventSequence,
    triggers_a: &[TriggerStream],
) -> Result<DirectedDistance> {
    if model_a.n() != model_b.n() {
        return Err(Error::param(
            "model_b",
            format!("type universes differ: {} vs {}", model_b.n(), model_a.n()),
        ));
    }
    check_universe(model_a, sequence_a)?;
    let n = model_a.n();
    let mut per_type = vec![None; n];
    for stream in triggers_a {
        let i = stream.event_type;
        if i >= n {
            return Err(Error::param("triggers_a", format!("trigger type {i} outside [0, {n})")));
        }
        if stream.is_empty() {
            continue;
        }
        let disagreements = stream
            .times()
            .iter()
            .filter(|&&t| model_b.feasible(i, t, sequence_a) != sequence_a.contains(i, t))
            .count();
        per_type[i] = Some(disagreements as f64 / stream.len() as f64);
    }
    let contributing: Vec<f64> = per_type.iter().flatten().copied().collect();
    if contributing.is_empty() {
        return Err(Error::UndefinedDistance);
    }
    let skipped = (0..n).filter(|&i| per_type[i].is_none()).collect();
    Ok(DirectedDistance {
        value: contributing.iter().sum::<f64>() / contributing.len() as f64,
        per_type,
        skipped,
    })
}

/// Both directed distances and their geometric mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    /// Error of B on A's realisation.
    pub b_on_a: DirectedDistance,
    /// Error of A on B's realisation.
    pub a_on_b: DirectedDistance,
    pub symmetric: f64,
}

impl DistanceReport {
    /// Geometric mean of two directed distances.
    pub fn combine(b_on_a: DirectedDistance, a_on_b: DirectedDistance) -> Self {
        let symmetric = (b_on_a.value * a_on_b.value).sqrt();
        Self {
            b_on_a,
            a_on_b,
            symmetric,
        }
    }
}

pub fn symmetric_distance(
    model_a: &CausalModel,
    model_b: &CausalModel,
    realisation_a: &GeneratedSequence,
    realisation_b: &GeneratedSequence,
) -> Result<DistanceReport> {
    let b_on_a = directed_distance(model_b, model_a, &realisation_a.accepted, &realisation_a.triggers)?;
    let a_on_b = directed_distance(model_a, model_b, &realisation_b.accepted, &realisation_b.triggers)?;
    Ok(DistanceReport::combine(b_on_a, a_on_b))
}

/// Monte-Carlo estimate of the model distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanDistanceEstimate {
    pub mean: f64,
    /// Sample variance of the per-iteration symmetric distances.
    pub variance: f64,
    pub iters: usize,
    pub horizon: f64,
    /// Iterations redrawn because a realisation had no triggers at all.
    pub resampled: usize,
}

const MAX_RESAMPLES: u64 = 64;

fn paired_draw(
    model_a: &CausalModel,
    model_b: &CausalModel,
    horizon: f64,
    seed: u64,
    k: u64,
) -> Result<(f64, usize)> {
    for attempt in 0..MAX_RESAMPLES {
        let ra = generate_sequence(model_a, horizon, derive_seed(seed, "pair-a", k * MAX_RESAMPLES + attempt))?;
        let rb = generate_sequence(model_b, horizon, derive_seed(seed, "pair-b", k * MAX_RESAMPLES + attempt))?;
        match symmetric_distance(model_a, model_b, &ra, &rb) {
            Ok(report) => return Ok((report.symmetric, attempt as usize)),
            Err(Error::UndefinedDistance) => {
                warn!("iteration {k}: empty trigger set, redrawing (attempt {attempt})");
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::UndefinedDistance)
}

/// Mean of the symmetric distance over `iters` independent paired
/// realisations of length `horizon`.
pub fn mean_distance(
    model_a: &CausalModel,
    model_b: &CausalModel,
    horizon: f64,
    iters: usize,
    seed: u64,
) -> Result<MeanDistanceEstimate> {
    if iters == 0 {
        return Err(Error::param("iters", "need at least one iteration"));
    }
    if model_a.n() != model_b.n() {
        return Err(Error::param("model_b", "type universes differ"));
    }
    let draws = (0..iters as u64)
        .into_par_iter()
        .map(|k| paired_draw(model_a, model_b, horizon, seed, k))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = draws.iter().map(|d| d.0).collect();
    Ok(MeanDistanceEstimate {
        mean: mean(&values),
        variance: sample_variance(&values),
        iters,
        horizon,
        resampled: draws.iter().map(|d| d.1).sum(),
    })
}

/// One cell of the horizon x iterations grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyCell {
    pub horizon: f64,
    pub iters: usize,
}

/// Spread of the distance estimate at one effective sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub horizon: f64,
    pub iters: usize,
    /// `horizon * iters`
    pub effective_size: f64,
    pub mean: f64,
    /// Variance of the estimate across replications.
    pub variance: f64,
    pub replications: usize,
}

/// Replicates [`mean_distance`] on every grid cell and reports the
/// empirical variance of the estimate against `horizon * iters`.
pub fn variance_decay_study(
    model_a: &CausalModel,
    model_b: &CausalModel,
    grid: &[StudyCell],
    replications: usize,
    seed: u64,
) -> Result<Vec<VarianceRow>> {
    if grid.is_empty() {
        return Err(Error::param("grid", "need at least one cell"));
    }
    if replications < 30 {
        return Err(Error::param("replications", format!("need >= 30, got {replications}")));
    }
    grid.iter()
        .enumerate()
        .map(|(c, cell)| {
            let estimates = (0..replications as u64)
                .into_par_iter()
                .map(|rep| {
                    let s = derive_seed(seed, "variance-study", ((c as u64) << 32) | rep);
                    mean_distance(model_a, model_b, cell.horizon, cell.iters, s).map(|e| e.mean)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(VarianceRow {
                horizon: cell.horizon,
                iters: cell.iters,
                effective_size: cell.horizon * cell.iters as f64,
                mean: mean(&estimates),
                variance: sample_variance(&estimates),
                replications,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::{generate_sequence, ModelPrior};
    use crate::point_process::Event;
    use ndarray::array;

    fn pair(seed: u64) -> (CausalModel, CausalModel) {
        let prior = ModelPrior::default();
        (
            prior.sample_mixed_sign(seed).unwrap(),
            prior.sample_mixed_sign(seed + 1_000_000).unwrap(),
        )
    }

    #[test]
    fn self_prediction_matches_generation() {
        let (a, _) = pair(1);
        let g = generate_sequence(&a, 300.0, 5).unwrap();
        for s in &g.triggers {
            for &t in s.times() {
                let p = cross_predict(&a, s.event_type, t, &g.accepted, true).unwrap();
                assert_eq!(p, g.accepted.contains(s.event_type, t));
                assert!(!cross_predict(&a, s.event_type, t, &g.accepted, false).unwrap());
            }
        }
        let d = directed_distance(&a, &a, &g.accepted, &g.triggers).unwrap();
        assert_eq!(d.value, 0.0);
        let same = a.with_tau_bar(a.tau_bar()).unwrap();
        assert_eq!(directed_distance(&same, &a, &g.accepted, &g.triggers).unwrap().value, 0.0);
    }

    #[test]
    fn sign_flip_disagrees_on_single_inhibitor() {
        // type 0 has the single parent 1 with negative influence
        let a = CausalModel::new(vec![1.0, 1.0], array![[0.0, -0.5], [0.0, 0.0]], 1.0).unwrap();
        let b = a.with_theta(-a.theta()).unwrap();
        let history = EventSequence::new(vec![Event::new(1, 2.0)], 10.0).unwrap();
        let pa = cross_predict(&a, 0, 2.5, &history, true).unwrap();
        let pb = cross_predict(&b, 0, 2.5, &history, true).unwrap();
        assert!(!pa && pb);
    }

    #[test]
    fn universe_mismatch_is_rejected() {
        let a = CausalModel::new(vec![1.0], array![[0.0]], 1.0).unwrap();
        let history = EventSequence::new(vec![Event::new(3, 2.0)], 10.0).unwrap();
        assert!(cross_predict(&a, 0, 2.5, &history, true).is_err());
        assert!(cross_predict(&a, 1, 2.5, &EventSequence::empty(10.0), true).is_err());
    }

    #[test]
    fn empty_types_are_skipped_and_all_empty_is_undefined() {
        let a = CausalModel::new(vec![1.0, 1.0], array![[0.0, -0.5], [0.0, 0.0]], 1.0).unwrap();
        let triggers = vec![
            TriggerStream::new(0, vec![1.0, 3.0]).unwrap(),
            TriggerStream::empty(1),
        ];
        let accepted = EventSequence::new(vec![Event::new(0, 1.0), Event::new(0, 3.0)], 10.0).unwrap();
        let d = directed_distance(&a, &a, &accepted, &triggers).unwrap();
        assert_eq!(d.skipped, vec![1]);
        assert_eq!(d.per_type, vec![Some(0.0), None]);

        let empty = vec![TriggerStream::empty(0), TriggerStream::empty(1)];
        assert!(matches!(
            directed_distance(&a, &a, &EventSequence::empty(10.0), &empty),
            Err(Error::UndefinedDistance)
        ));
    }

    #[test]
    fn directed_distance_is_stable_for_a_fixed_pair() {
        let (a, b) = pair(7);
        let values: Vec<f64> = (0..8)
            .map(|s| {
                let g = generate_sequence(&a, 1000.0, 100 + s).unwrap();
                directed_distance(&b, &a, &g.accepted, &g.triggers).unwrap().value
            })
            .collect();
        let m = mean(&values);
        assert!(m > 0.0 && m < 1.0);
        assert!(values.iter().all(|v| (v - m).abs() <= 0.02), "{values:?}");
    }

    #[test]
    fn symmetric_distance_examples() {
        let dd = |v: f64| DirectedDistance {
            value: v,
            per_type: vec![Some(v)],
            skipped: vec![],
        };
        assert_eq!(DistanceReport::combine(dd(0.0), dd(0.7)).symmetric, 0.0);
        assert!((DistanceReport::combine(dd(0.16), dd(0.25)).symmetric - 0.2).abs() < 1e-15);

        let (a, b) = pair(3);
        let ra = generate_sequence(&a, 200.0, 1).unwrap();
        let rb = generate_sequence(&b, 200.0, 2).unwrap();
        let ab = symmetric_distance(&a, &b, &ra, &rb).unwrap();
        let ba = symmetric_distance(&b, &a, &rb, &ra).unwrap();
        assert_eq!(ab.symmetric, ba.symmetric);
    }

    #[test]
    fn mean_distance_examples() {
        let (a, b) = pair(11);
        let same = mean_distance(&a, &a, 200.0, 8, 3).unwrap();
        assert_eq!(same.mean, 0.0);
        assert_eq!(same.variance, 0.0);

        let single = mean_distance(&a, &b, 200.0, 1, 3).unwrap();
        let ra = generate_sequence(&a, 200.0, derive_seed(3, "pair-a", 0)).unwrap();
        let rb = generate_sequence(&b, 200.0, derive_seed(3, "pair-b", 0)).unwrap();
        assert_eq!(single.mean, symmetric_distance(&a, &b, &ra, &rb).unwrap().symmetric);
        assert!(mean_distance(&a, &b, 200.0, 0, 3).is_err());

        // deterministic regardless of scheduling
        assert_eq!(mean_distance(&a, &b, 100.0, 16, 9).unwrap(), mean_distance(&a, &b, 100.0, 16, 9).unwrap());
    }

    #[test]
    fn estimate_variance_falls_with_iterations() {
        let (a, b) = pair(21);
        let rows = variance_decay_study(
            &a,
            &b,
            &[
                StudyCell { horizon: 100.0, iters: 10 },
                StudyCell { horizon: 100.0, iters: 40 },
                StudyCell { horizon: 100.0, iters: 160 },
            ],
            100,
            4,
        )
        .unwrap();
        assert!(rows.windows(2).all(|w| w[1].variance < w[0].variance), "{rows:?}");
    }

    #[test]
    fn doubling_effective_size_shrinks_variance_for_most_pairs() {
        let grid = [
            StudyCell { horizon: 100.0, iters: 4 },
            StudyCell { horizon: 100.0, iters: 8 },
        ];
        let pairs = 20;
        let shrinking = (0..pairs)
            .filter(|&p| {
                let (a, b) = pair(500 + p);
                let rows = variance_decay_study(&a, &b, &grid, 50, p).unwrap();
                rows[1].variance / rows[0].variance < 1.0
            })
            .count();
        assert!(shrinking * 10 >= pairs as usize * 9, "{shrinking}/{pairs}");
    }

    #[test]
    fn study_contract() {
        let (a, b) = pair(2);
        let cell = [StudyCell { horizon: 50.0, iters: 2 }];
        assert_eq!(variance_decay_study(&a, &b, &cell, 30, 1).unwrap().len(), 1);
        assert!(variance_decay_study(&a, &b, &cell, 29, 1).is_err());
        assert!(variance_decay_study(&a, &b, &[], 30, 1).is_err());
        let degenerate = variance_decay_study(&a, &a, &cell, 30, 1).unwrap();
        assert_eq!(degenerate[0].variance, 0.0);
    }
}
