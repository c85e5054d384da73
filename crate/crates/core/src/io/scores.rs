//! The `id,timestamp,score` return channel of external predictors.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use super::dataset::render_time;
use crate::causal::EventSequence;
use crate::counterfactual::{EvaluationSet, Scorer, Split};
use crate::error::{Error, Result};

type Key = (usize, String);

fn key(id: usize, time: f64) -> Key {
    (id, render_time(time))
}

/// Parses a scores file and aligns it with `expected`.
///
/// Rows are joined on `(id, timestamp)` with timestamps compared at the
/// dataset's rendering precision, so any row order is accepted.
pub fn parse_scores(text: &str, expected: &EvaluationSet) -> Result<Vec<f64>> {
    let mut rows: HashMap<Key, f64> = HashMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || (k == 0 && line.starts_with("id,")) {
            continue;
        }
        let bad = |what: &str| Error::Scores(format!("line {}: {what}: `{line}`", k + 1));
        let mut cols = line.split(',');
        let (Some(id), Some(ts), Some(score), None) = (cols.next(), cols.next(), cols.next(), cols.next()) else {
            return Err(bad("expected 3 columns"));
        };
        let id: usize = id.trim().parse().map_err(|_| bad("bad id"))?;
        let ts: f64 = ts.trim().parse().map_err(|_| bad("bad timestamp"))?;
        let score: f64 = score.trim().parse().map_err(|_| bad("bad score"))?;
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::Scores(format!("score {score} for ({id}, {}) outside [0, 1]", render_time(ts))));
        }
        if rows.insert(key(id, ts), score).is_some() {
            return Err(Error::Scores(format!("duplicate row for ({id}, {})", render_time(ts))));
        }
    }
    let mut wanted: BTreeMap<Key, usize> = BTreeMap::new();
    for it in &expected.items {
        *wanted.entry(key(it.event_type, it.time)).or_default() += 1;
    }
    if let Some(((id, ts), _)) = wanted.iter().find(|(_, &c)| c > 1) {
        return Err(Error::Scores(format!("evaluation set repeats ({id}, {ts})")));
    }
    let scores = expected
        .items
        .iter()
        .map(|it| {
            let k = key(it.event_type, it.time);
            rows.get(&k)
                .copied()
                .ok_or_else(|| Error::Scores(format!("missing score for ({}, {})", k.0, k.1)))
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.len() != wanted.len() {
        let (id, ts) = rows.keys().find(|k| !wanted.contains_key(*k)).expect("extra row exists");
        return Err(Error::Scores(format!(
            "{} rows for {} items; unmatched row ({id}, {ts})",
            rows.len(),
            wanted.len()
        )));
    }
    Ok(scores)
}

pub fn import_scores(path: &Path, expected: &EvaluationSet) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scores(&text, expected)
}

/// Scores read from one file per evaluation split.
#[derive(Debug, Clone, Default)]
pub struct ScoreFileScorer {
    files: BTreeMap<Split, PathBuf>,
}

impl ScoreFileScorer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_split(mut self, split: Split, path: impl Into<PathBuf>) -> Self {
        self.files.insert(split, path.into());
        self
    }
}

impl Scorer for ScoreFileScorer {
    fn score(&self, split: Split, eval_set: &EvaluationSet, _history: &EventSequence) -> Result<Vec<f64>> {
        let path = self
            .files
            .get(&split)
            .ok_or_else(|| Error::Scores(format!("no scores file for split {}", split.as_str())))?;
        import_scores(path, eval_set)
    }
}
