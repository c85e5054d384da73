//! Homogeneous Poisson point processes and trigger timelines.

use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// Candidate firing times of one event type on `[0, horizon)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerStream {
    pub event_type: usize,
    times: Vec<f64>,
}

impl TriggerStream {
    /// Builds a stream from strictly increasing, non-negative times.
    pub fn new(event_type: usize, times: Vec<f64>) -> Result<Self> {
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::param("times", "times must be finite and non-negative"));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("times", "times must be strictly increasing"));
        }
        Ok(Self { event_type, times })
    }

    pub fn empty(event_type: usize) -> Self {
        Self {
            event_type,
            times: Vec::new(),
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// A single `(event_type, time)` entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub event_type: usize,
    pub time: f64,
}

impl Event {
    pub fn new(event_type: usize, time: f64) -> Self {
        Self { event_type, time }
    }
}

/// Orders events by time, then by ascending type.
pub(crate) fn timeline_order(a: &Event, b: &Event) -> std::cmp::Ordering {
    a.time
        .total_cmp(&b.time)
        .then(a.event_type.cmp(&b.event_type))
}

/// All trigger times of all types merged into one sorted sequence.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timeline {
    entries: Vec<Event>,
}

impl Timeline {
    pub fn entries(&self) -> &[Event] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Samples a homogeneous Poisson point process with intensity `rate` on
/// `[0, horizon)` as cumulative sums of exponential inter-arrival gaps.
///
/// The stream for a given seed is a prefix of the stream for any longer
/// horizon with the same seed.
pub fn sample_ppp(rate: f64, horizon: f64, seed: u64) -> Result<Vec<f64>> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::param("rate", format!("must be positive, got {rate}")));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::param(
            "horizon",
            format!("must be positive, got {horizon}"),
        ));
    }
    let gaps = Exp::new(rate).map_err(|e| Error::param("rate", e.to_string()))?;
    let mut rng = rng_from_seed(seed);
    let mut times = Vec::with_capacity((rate * horizon * 1.1) as usize + 8);
    let mut t = 0.0f64;
    loop {
        let next = t + gaps.sample(&mut rng);
        // a zero gap, or one lost to rounding, would duplicate a time
        if next <= t && !times.is_empty() {
            continue;
        }
        if next >= horizon {
            break;
        }
        times.push(next);
        t = next;
    }
    Ok(times)
}

/// Samples a [`TriggerStream`] for `event_type`.
pub fn sample_trigger_stream(
    event_type: usize,
    rate: f64,
    horizon: f64,
    seed: u64,
) -> Result<TriggerStream> {
    Ok(TriggerStream {
        event_type,
        times: sample_ppp(rate, horizon, seed)?,
    })
}

/// Merges per-type streams into a single time-sorted timeline; equal times
/// are ordered by ascending event type.
pub fn merge_timeline(streams: &[TriggerStream]) -> Timeline {
    let mut entries: Vec<Event> = streams
        .iter()
        .flat_map(|s| s.times.iter().map(move |&t| Event::new(s.event_type, t)))
        .collect();
    entries.sort_by(timeline_order);
    Timeline { entries }
}
