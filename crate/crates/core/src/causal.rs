//! The causal event model: structural equations over windowed history
//! indicators, driven by Poisson trigger streams.

use std::collections::HashMap;

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point_process::{merge_timeline, sample_trigger_stream, timeline_order, Event, TriggerStream};
use crate::seed::{derive_seed, derived_rng};

pub const DEFAULT_LAMBDA_RANGE: (f64, f64) = (0.5, 2.0);
pub const DEFAULT_TAU_BAR: f64 = 1.0;

/// Parameters `(lambdas, theta, tau_bar)` of a causal event model.
///
/// `theta[[i, j]]` is the influence of a past event of type `j` on the
/// acceptance of a triggered event of type `i`. Structural parents are
/// derived from the non-zero pattern of each row and cached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct CausalModel {
    lambdas: Vec<f64>,
    theta: Array2<f64>,
    tau_bar: f64,
    parents: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    lambdas: Vec<f64>,
    theta: Array2<f64>,
    tau_bar: f64,
}

impl TryFrom<RawModel> for CausalModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        CausalModel::new(raw.lambdas, raw.theta, raw.tau_bar)
    }
}

impl From<CausalModel> for RawModel {
    fn from(m: CausalModel) -> Self {
        RawModel {
            lambdas: m.lambdas,
            theta: m.theta,
            tau_bar: m.tau_bar,
        }
    }
}

impl CausalModel {
    pub fn new(lambdas: Vec<f64>, theta: Array2<f64>, tau_bar: f64) -> Result<Self> {
        let n = lambdas.len();
        if n == 0 {
            return Err(Error::param("lambdas", "model needs at least one event type"));
        }
        if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::param("lambdas", format!("intensities must be positive, got {l}")));
        }
        if theta.dim() != (n, n) {
            return Err(Error::param(
                "theta",
                format!("expected a {n}x{n} matrix, got {:?}", theta.dim()),
            ));
        }
        if let Some(v) = theta.iter().find(|v| !(v.abs() <= 1.0)) {
            return Err(Error::param("theta", format!("entries must lie in [-1, 1], got {v}")));
        }
        if !(tau_bar > 0.0 && tau_bar.is_finite()) {
            return Err(Error::param("tau_bar", format!("must be positive, got {tau_bar}")));
        }
        let parents = theta
            .rows()
            .into_iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        Ok(Self {
            lambdas,
            theta,
            tau_bar,
            parents,
        })
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn theta(&self) -> &Array2<f64> {
        &self.theta
    }

    pub fn tau_bar(&self) -> f64 {
        self.tau_bar
    }

    /// Structural parents of type `i`.
    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    /// Binary causal graph, `1` wherever `theta` is non-zero.
    pub fn adjacency(&self) -> Array2<u8> {
        self.theta.mapv(|v| u8::from(v != 0.0))
    }

    pub fn with_theta(&self, theta: Array2<f64>) -> Result<Self> {
        Self::new(self.lambdas.clone(), theta, self.tau_bar)
    }

    pub fn with_tau_bar(&self, tau_bar: f64) -> Result<Self> {
        Self::new(self.lambdas.clone(), self.theta.clone(), tau_bar)
    }

    /// True when no entry of `theta` is negative (every trigger fires).
    pub fn is_nonnegative(&self) -> bool {
        self.theta.iter().all(|v| *v >= 0.0)
    }

    /// True when `theta` has at least one negative and one positive entry.
    pub fn has_mixed_signs(&self) -> bool {
        self.theta.iter().any(|v| *v < 0.0) && self.theta.iter().any(|v| *v > 0.0)
    }

    /// The indicator part of the structural equation: whether the weighted
    /// sum of active parents is non-negative.
    #[inline]
    pub(crate) fn fires(&self, i: usize, mut flag: impl FnMut(usize) -> bool) -> bool {
        let row = self.theta.row(i);
        let sum: f64 = self.parents[i]
            .iter()
            .filter(|&&j| flag(j))
            .map(|&j| row[j])
            .sum();
        sum >= 0.0
    }

    /// Whether an event of type `i` at `t` is feasible given `history`,
    /// reading the history through this model's window.
    pub fn feasible(&self, i: usize, t: f64, history: &EventSequence) -> bool {
        self.fires(i, |j| history.history_indicator(j, t, self.tau_bar))
    }
}

/// Per-type sorted event times supporting logarithmic window queries.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct TypeIndex {
    per_type: Vec<Vec<f64>>,
}

impl TypeIndex {
    pub(crate) fn with_types(n: usize) -> Self {
        Self {
            per_type: vec![Vec::new(); n],
        }
    }

    /// Appends `t` to `j`; callers push in non-decreasing time order.
    pub(crate) fn push(&mut self, j: usize, t: f64) {
        if j >= self.per_type.len() {
            self.per_type.resize(j + 1, Vec::new());
        }
        self.per_type[j].push(t);
    }

    /// 1 iff some event of type `j` lies in `[t - tau, t)`.
    #[inline]
    pub(crate) fn active(&self, j: usize, t: f64, tau: f64) -> bool {
        let Some(times) = self.per_type.get(j) else {
            return false;
        };
        let lo = t - tau;
        let k = times.partition_point(|&s| s < lo);
        k < times.len() && times[k] < t
    }

    pub(crate) fn contains(&self, j: usize, t: f64) -> bool {
        self.per_type
            .get(j)
            .is_some_and(|times| times.binary_search_by(|s| s.total_cmp(&t)).is_ok())
    }

    pub(crate) fn times(&self, j: usize) -> &[f64] {
        self.per_type.get(j).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// A time-sorted sequence of typed events on `[0, horizon)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSequence {
    events: Vec<Event>,
    horizon: f64,
    index: TypeIndex,
}

impl EventSequence {
    /// Sorts `events` by time (ties by type) and indexes them.
    pub fn new(mut events: Vec<Event>, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::param("horizon", format!("must be positive, got {horizon}")));
        }
        if let Some(e) = events
            .iter()
            .find(|e| !e.time.is_finite() || e.time < 0.0 || e.time >= horizon)
        {
            return Err(Error::param(
                "events",
                format!("time {} outside [0, {horizon})", e.time),
            ));
        }
        events.sort_by(timeline_order);
        Ok(Self::from_sorted(events, horizon))
    }

    pub fn empty(horizon: f64) -> Self {
        Self::from_sorted(Vec::new(), horizon)
    }

    pub(crate) fn from_sorted(events: Vec<Event>, horizon: f64) -> Self {
        debug_assert!(events.windows(2).all(|w| timeline_order(&w[0], &w[1]).is_le()));
        let mut index = TypeIndex::default();
        for e in &events {
            index.push(e.event_type, e.time);
        }
        Self {
            events,
            horizon,
            index,
        }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Whether an event of type `j` occurred in `[t - tau_bar, t)`.
    pub fn history_indicator(&self, j: usize, t: f64, tau_bar: f64) -> bool {
        self.index.active(j, t, tau_bar)
    }

    /// Whether `(event_type, time)` is an element of the sequence.
    pub fn contains(&self, event_type: usize, time: f64) -> bool {
        self.index.contains(event_type, time)
    }

    /// Sorted times of one event type.
    pub fn times_of(&self, event_type: usize) -> &[f64] {
        self.index.times(event_type)
    }

    /// Distinct event types present, ascending.
    pub fn observed_types(&self) -> Vec<usize> {
        let mut types: Vec<usize> = self.events.iter().map(|e| e.event_type).collect();
        types.sort_unstable();
        types.dedup();
        types
    }

    /// Union of two sequences over the same horizon.
    pub fn union(&self, other: &EventSequence) -> EventSequence {
        let mut events = Vec::with_capacity(self.len() + other.len());
        events.extend_from_slice(&self.events);
        events.extend_from_slice(&other.events);
        events.sort_by(timeline_order);
        EventSequence::from_sorted(events, self.horizon.max(other.horizon))
    }
}

/// Evaluates the structural equation for type `i`.
///
/// `flags` must hold a history flag for every structural parent of `i`.
pub fn sem_eval(
    model: &CausalModel,
    i: usize,
    trigger: bool,
    flags: &HashMap<usize, bool>,
) -> Result<bool> {
    if i >= model.n() {
        return Err(Error::param("i", format!("type {i} outside model with {} types", model.n())));
    }
    if let Some(j) = model.parents(i).iter().find(|j| !flags.contains_key(j)) {
        return Err(Error::Contract(format!(
            "missing history flag for structural parent {j} of type {i}"
        )));
    }
    Ok(trigger && model.fires(i, |j| flags[&j]))
}

/// Trigger streams together with the events they produced.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSequence {
    pub triggers: Vec<TriggerStream>,
    pub accepted: EventSequence,
}

impl GeneratedSequence {
    pub fn trigger_count(&self) -> usize {
        self.triggers.iter().map(TriggerStream::len).sum()
    }
}

/// Forces the history flag of `parent` to `value` whenever a trigger of
/// `target` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct FlagIntervention {
    pub target: usize,
    pub parent: usize,
    pub value: bool,
}

/// Scans the merged triggers in time order, accepting each one whose
/// structural equation holds on the events accepted before it.
pub(crate) fn simulate(
    model: &CausalModel,
    triggers: &[TriggerStream],
    horizon: f64,
    intervention: Option<FlagIntervention>,
) -> EventSequence {
    let timeline = merge_timeline(triggers);
    let mut history = TypeIndex::with_types(model.n());
    let mut accepted = Vec::new();
    let tau = model.tau_bar();
    for &Event { event_type: i, time: t } in timeline.entries() {
        let fires = model.fires(i, |j| match intervention {
            Some(iv) if iv.target == i && iv.parent == j => iv.value,
            _ => history.active(j, t, tau),
        });
        if fires {
            history.push(i, t);
            accepted.push(Event::new(i, t));
        }
    }
    EventSequence::from_sorted(accepted, horizon)
}

/// Samples the per-type trigger streams used by [`generate_sequence`].
pub fn sample_triggers(model: &CausalModel, horizon: f64, seed: u64) -> Result<Vec<TriggerStream>> {
    model
        .lambdas()
        .iter()
        .enumerate()
        .map(|(i, &rate)| sample_trigger_stream(i, rate, horizon, derive_seed(seed, "triggers", i as u64)))
        .collect()
}

/// Runs the acceptance scan of `model` over fixed trigger streams.
pub fn replay_triggers(model: &CausalModel, triggers: &[TriggerStream], horizon: f64) -> EventSequence {
    simulate(model, triggers, horizon, None)
}

/// Generates a causal event sequence on `[0, horizon)`.
pub fn generate_sequence(model: &CausalModel, horizon: f64, seed: u64) -> Result<GeneratedSequence> {
    let triggers = sample_triggers(model, horizon, seed)?;
    let accepted = simulate(model, &triggers, horizon, None);
    Ok(GeneratedSequence { triggers, accepted })
}

/// `true` when at least one trigger was rejected.
///
/// A dataset on which every trigger fires carries no causal signal; such a
/// dataset fails this check.
pub fn degeneracy_check(triggers: &[TriggerStream], accepted: &EventSequence) -> bool {
    let total: usize = triggers.iter().map(TriggerStream::len).sum();
    accepted.len() != total
}

/// Random graph model for the causal adjacency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdjacencySpec {
    ErdosRenyi { p: f64 },
    Identity,
    Explicit { matrix: Array2<u8> },
}

impl AdjacencySpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            AdjacencySpec::ErdosRenyi { p } if !(0.0..=1.0).contains(p) => {
                Err(Error::param("p", format!("edge probability must lie in [0, 1], got {p}")))
            }
            AdjacencySpec::Explicit { matrix } if matrix.dim() != (n, n) => Err(Error::param(
                "matrix",
                format!("expected {n}x{n}, got {:?}", matrix.dim()),
            )),
            AdjacencySpec::Explicit { matrix } if matrix.iter().any(|v| *v > 1) => {
                Err(Error::param("matrix", "adjacency must be binary"))
            }
            _ => Ok(()),
        }
    }

    fn sample(&self, n: usize, rng: &mut impl Rng) -> Array2<u8> {
        match self {
            AdjacencySpec::ErdosRenyi { p } => {
                Array2::from_shape_simple_fn((n, n), || u8::from(rng.random_bool(*p)))
            }
            AdjacencySpec::Identity => Array2::from_shape_fn((n, n), |(i, j)| u8::from(i == j)),
            AdjacencySpec::Explicit { matrix } => matrix.clone(),
        }
    }
}

/// Draws a non-zero influence from `Uniform[-1, 1]`.
pub(crate) fn sample_nonzero_influence(rng: &mut impl Rng) -> f64 {
    let dist = Uniform::new_inclusive(-1.0, 1.0).expect("valid bounds");
    loop {
        let v = dist.sample(rng);
        if v != 0.0 {
            return v;
        }
    }
}

pub(crate) fn sample_lambdas(n: usize, range: (f64, f64), rng: &mut impl Rng) -> Result<Vec<f64>> {
    let (lo, hi) = range;
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(Error::param(
            "lambda_range",
            format!("need 0 < lo <= hi, got ({lo}, {hi})"),
        ));
    }
    if lo == hi {
        return Ok(vec![lo; n]);
    }
    let dist = Uniform::new(lo, hi).map_err(|e| Error::param("lambda_range", e.to_string()))?;
    Ok((0..n).map(|_| dist.sample(rng)).collect())
}

/// Samples a random causal model: adjacency per `adjacency`, intensities
/// uniform on `lambda_range`, and non-zero uniform influences on the
/// adjacency support.
pub fn sample_random_model(
    n: usize,
    adjacency: &AdjacencySpec,
    lambda_range: (f64, f64),
    tau_bar: f64,
    seed: u64,
) -> Result<CausalModel> {
    if n == 0 {
        return Err(Error::param("n", "need at least one event type"));
    }
    adjacency.validate(n)?;
    let lambdas = sample_lambdas(n, lambda_range, &mut derived_rng(seed, "lambdas", 0))?;
    let mut rng = derived_rng(seed, "theta", 0);
    let a = adjacency.sample(n, &mut rng);
    let theta = a.mapv(|edge| if edge == 1 { sample_nonzero_influence(&mut rng) } else { 0.0 });
    CausalModel::new(lambdas, theta, tau_bar)
}

/// Bundled sampling parameters for random models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPrior {
    pub n: usize,
    pub adjacency: AdjacencySpec,
    pub lambda_range: (f64, f64),
    pub tau_bar: f64,
}

impl Default for ModelPrior {
    fn default() -> Self {
        Self {
            n: 7,
            adjacency: AdjacencySpec::ErdosRenyi { p: 0.5 },
            lambda_range: DEFAULT_LAMBDA_RANGE,
            tau_bar: DEFAULT_TAU_BAR,
        }
    }
}

impl ModelPrior {
    pub fn sample(&self, seed: u64) -> Result<CausalModel> {
        sample_random_model(self.n, &self.adjacency, self.lambda_range, self.tau_bar, seed)
    }

    /// Samples until the model has both excitatory and inhibitory entries.
    pub fn sample_mixed_sign(&self, seed: u64) -> Result<CausalModel> {
        for attempt in 0..10_000u64 {
            let model = self.sample(derive_seed(seed, "mixed-sign", attempt))?;
            if model.has_mixed_signs() {
                return Ok(model);
            }
        }
        Err(Error::Sampling(
            "prior never produced a mixed-sign model in 10000 attempts".into(),
        ))
    }
}
