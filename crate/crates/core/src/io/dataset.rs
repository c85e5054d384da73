//! Line-oriented dataset files exchanged with external predictors.
//!
//! ```text
//! # format=ctig-dataset
//! # version=1
//! # mode=ctig
//! # n_nodes=5
//! # types=10
//! # horizon=1000
//! # tau_bar=1
//! # tau_split=500
//! # sampling=transductive
//! split,id,src,dst,timestamp,label
//! train,3,0,4,1.23456789e2,
//! test,7,1,4,5.00012345e2,1
//! ```
//!
//! In `events` mode the `src` and `dst` columns are empty. Training rows are
//! observed positives and carry no label.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::causal::EventSequence;
use crate::counterfactual::{EvalItem, EvaluationSet, ExperimentAData, ExperimentBData, SamplingMode, Split};
use crate::ctig::EdgeSpace;
use crate::error::{Error, Result};
use crate::point_process::Event;

pub const FORMAT_VERSION: u32 = 1;
const COLUMNS: &str = "split,id,src,dst,timestamp,label";

/// Renders a timestamp with nine significant digits.
pub fn render_time(t: f64) -> String {
    format!("{t:.8e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TypeSpace {
    Events { n: usize },
    Ctig { n_nodes: usize },
}

impl TypeSpace {
    pub fn types(&self) -> usize {
        match *self {
            TypeSpace::Events { n } => n,
            TypeSpace::Ctig { n_nodes } => n_nodes * (n_nodes - 1) / 2,
        }
    }

    fn edge_space(&self) -> Option<EdgeSpace> {
        match *self {
            TypeSpace::Ctig { n_nodes } => EdgeSpace::new(n_nodes).ok(),
            TypeSpace::Events { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub version: u32,
    pub space: TypeSpace,
    pub horizon: f64,
    pub tau_bar: f64,
    pub tau_split: f64,
    pub sampling: SamplingMode,
    /// Distance between the generating and distorting models, if known.
    pub d_bar: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub split: Split,
    pub id: usize,
    pub pair: Option<(usize, usize)>,
    pub time: f64,
    pub label: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFile {
    pub header: DatasetHeader,
    pub rows: Vec<DatasetRow>,
}

impl DatasetFile {
    /// Assembles a dataset from a training window and labelled test sets.
    pub fn assemble(
        header: DatasetHeader,
        train: &EventSequence,
        test: &EvaluationSet,
        test_cf: Option<&EvaluationSet>,
    ) -> Result<Self> {
        let space = header.space.edge_space();
        let types = header.space.types();
        let pair = |id: usize| -> Result<Option<(usize, usize)>> {
            if id >= types {
                return Err(Error::param("rows", format!("type {id} outside {types} types")));
            }
            space.as_ref().map(|s| s.pair(id)).transpose()
        };
        let mut rows = Vec::new();
        for e in train.events() {
            rows.push(DatasetRow { split: Split::Train, id: e.event_type, pair: pair(e.event_type)?, time: e.time, label: None });
        }
        for (split, set) in [(Split::Test, Some(test)), (Split::TestCf, test_cf)] {
            for it in set.into_iter().flat_map(|s| &s.items) {
                rows.push(DatasetRow { split, id: it.event_type, pair: pair(it.event_type)?, time: it.time, label: Some(it.label) });
            }
        }
        Ok(Self { header, rows })
    }

    /// The causal-shift experiment as a dataset with both test splits.
    pub fn from_experiment_a(data: &ExperimentAData, tau_bar: f64, ctig_nodes: Option<usize>, d_bar: Option<f64>) -> Result<Self> {
        let header = DatasetHeader {
            version: FORMAT_VERSION,
            space: space_for(data.universe, ctig_nodes)?,
            horizon: data.horizon,
            tau_bar,
            tau_split: data.tau_split,
            sampling: data.eval_test.mode,
            d_bar,
        };
        Self::assemble(header, &data.train, &data.eval_test, Some(&data.eval_cf))
    }

    /// One shuffled copy of the timestamp-shuffling experiment: the
    /// original test set as `test`, the copy as `test_cf`.
    pub fn from_shuffle(data: &ExperimentBData, copy: usize, tau_bar: f64, ctig_nodes: Option<usize>) -> Result<Self> {
        let shuffled = data
            .shuffled
            .get(copy)
            .ok_or_else(|| Error::param("copy", format!("only {} shuffled copies", data.shuffled.len())))?;
        let header = DatasetHeader {
            version: FORMAT_VERSION,
            space: space_for(data.universe, ctig_nodes)?,
            horizon: data.horizon,
            tau_bar,
            tau_split: data.tau_split,
            sampling: data.original.eval.mode,
            d_bar: None,
        };
        Self::assemble(header, &data.train, &data.original.eval, Some(&shuffled.eval))
    }

    pub fn rows_of(&self, split: Split) -> impl Iterator<Item = &DatasetRow> {
        self.rows.iter().filter(move |r| r.split == split)
    }

    /// Positive events of a split as a sequence.
    pub fn sequence(&self, split: Split) -> Result<EventSequence> {
        let events = self
            .rows_of(split)
            .filter(|r| r.label != Some(false))
            .map(|r| Event::new(r.id, r.time))
            .collect();
        EventSequence::new(events, self.header.horizon)
    }

    /// Labelled rows of an evaluation split.
    pub fn eval_set(&self, split: Split) -> Result<EvaluationSet> {
        let items = self
            .rows_of(split)
            .map(|r| {
                r.label
                    .map(|label| EvalItem { event_type: r.id, time: r.time, label })
                    .ok_or_else(|| Error::param("split", format!("{} rows carry no labels", split.as_str())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EvaluationSet {
            items,
            window: (self.header.tau_split, self.header.horizon),
            mode: self.header.sampling,
        })
    }
}

fn space_for(universe: usize, ctig_nodes: Option<usize>) -> Result<TypeSpace> {
    match ctig_nodes {
        None => Ok(TypeSpace::Events { n: universe }),
        Some(n_nodes) => {
            let space = EdgeSpace::new(n_nodes)?;
            if space.len() < universe {
                return Err(Error::param("ctig_nodes", format!("{n_nodes} nodes cannot hold {universe} edge types")));
            }
            Ok(TypeSpace::Ctig { n_nodes })
        }
    }
}

fn split_rank(s: Split) -> u8 {
    match s {
        Split::Train => 0,
        Split::Test => 1,
        Split::TestCf => 2,
    }
}

fn sampling_name(m: SamplingMode) -> &'static str {
    match m {
        SamplingMode::Global => "global",
        SamplingMode::Transductive => "transductive",
    }
}

/// Renders the file; rows are grouped by split and time-sorted within it.
pub fn render_dataset(file: &DatasetFile) -> String {
    let h = &file.header;
    let mut out = String::new();
    let _ = writeln!(out, "# format=ctig-dataset");
    let _ = writeln!(out, "# version={}", h.version);
    match h.space {
        TypeSpace::Events { n } => {
            let _ = writeln!(out, "# mode=events\n# types={n}");
        }
        TypeSpace::Ctig { n_nodes } => {
            let _ = writeln!(out, "# mode=ctig\n# n_nodes={n_nodes}\n# types={}", h.space.types());
        }
    }
    let _ = writeln!(out, "# horizon={}\n# tau_bar={}\n# tau_split={}", h.horizon, h.tau_bar, h.tau_split);
    let _ = writeln!(out, "# sampling={}", sampling_name(h.sampling));
    if let Some(d) = h.d_bar {
        let _ = writeln!(out, "# d_bar={d}");
    }
    out.push_str(COLUMNS);
    out.push('\n');
    let mut rows: Vec<&DatasetRow> = file.rows.iter().collect();
    rows.sort_by(|a, b| {
        split_rank(a.split)
            .cmp(&split_rank(b.split))
            .then(a.time.total_cmp(&b.time))
            .then(b.label.cmp(&a.label))
            .then(a.id.cmp(&b.id))
    });
    for r in rows {
        let (src, dst) = r.pair.map(|(a, b)| (a.to_string(), b.to_string())).unwrap_or_default();
        let label = r.label.map(|l| if l { "1" } else { "0" }).unwrap_or("");
        let _ = writeln!(out, "{},{},{src},{dst},{},{label}", r.split.as_str(), r.id, render_time(r.time));
    }
    out
}

pub fn export_dataset(file: &DatasetFile, path: &Path) -> Result<()> {
    fs::write(path, render_dataset(file)).map_err(|e| Error::io(path, e))
}

pub fn import_dataset(path: &Path) -> Result<DatasetFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text, path)
}

/// Parses a rendered dataset; `path` only labels error messages.
pub fn parse_dataset(text: &str, path: &Path) -> Result<DatasetFile> {
    let fail = |line: usize, reason: String| Error::Format { path: path.to_path_buf(), line, reason };
    let mut meta = std::collections::BTreeMap::new();
    let mut rows = Vec::new();
    let mut seen_columns = false;
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let (key, value) = rest
                .trim()
                .split_once('=')
                .ok_or_else(|| fail(line_no, format!("malformed header line `{line}`")))?;
            meta.insert(key.trim().to_string(), (value.trim().to_string(), line_no));
            continue;
        }
        if !seen_columns {
            if line != COLUMNS {
                return Err(fail(line_no, format!("expected column line `{COLUMNS}`")));
            }
            seen_columns = true;
            continue;
        }
        rows.push((line_no, line.to_string()));
    }
    if !seen_columns {
        return Err(fail(text.lines().count(), "missing column line".into()));
    }
    let get = |key: &str| -> Result<&str> {
        meta.get(key)
            .map(|(v, _)| v.as_str())
            .ok_or_else(|| fail(0, format!("missing header key `{key}`")))
    };
    let num = |key: &str| -> Result<f64> {
        let v = get(key)?;
        v.parse().map_err(|_| fail(meta[key].1, format!("`{key}` is not a number: {v}")))
    };
    let int = |key: &str| -> Result<usize> {
        let v = get(key)?;
        v.parse().map_err(|_| fail(meta[key].1, format!("`{key}` is not an integer: {v}")))
    };
    if get("format")? != "ctig-dataset" {
        return Err(fail(meta["format"].1, "unknown format".into()));
    }
    let version = int("version")? as u32;
    if version != FORMAT_VERSION {
        return Err(fail(meta["version"].1, format!("unsupported version {version}")));
    }
    let space = match get("mode")? {
        "events" => TypeSpace::Events { n: int("types")? },
        "ctig" => {
            let s = TypeSpace::Ctig { n_nodes: int("n_nodes")? };
            if s.types() != int("types")? {
                return Err(fail(meta["types"].1, "type count disagrees with node count".into()));
            }
            s
        }
        other => return Err(fail(meta["mode"].1, format!("unknown mode `{other}`"))),
    };
    let sampling = match get("sampling")? {
        "global" => SamplingMode::Global,
        "transductive" => SamplingMode::Transductive,
        other => return Err(fail(meta["sampling"].1, format!("unknown sampling mode `{other}`"))),
    };
    let header = DatasetHeader {
        version,
        space,
        horizon: num("horizon")?,
        tau_bar: num("tau_bar")?,
        tau_split: num("tau_split")?,
        sampling,
        d_bar: if meta.contains_key("d_bar") { Some(num("d_bar")?) } else { None },
    };
    let edge_space = space.edge_space();
    let types = space.types();
    let mut parsed = Vec::with_capacity(rows.len());
    let mut last: Option<(Split, f64)> = None;
    for (line_no, line) in rows {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(fail(line_no, format!("expected 6 columns, found {}", cols.len())));
        }
        let split = Split::parse(cols[0]).ok_or_else(|| fail(line_no, format!("unknown split `{}`", cols[0])))?;
        let id: usize = cols[1].parse().map_err(|_| fail(line_no, format!("bad id `{}`", cols[1])))?;
        if id >= types {
            return Err(fail(line_no, format!("id {id} outside {types} types")));
        }
        let pair = match (cols[2], cols[3], &edge_space) {
            ("", "", None) => None,
            (a, b, Some(es)) => {
                let a: usize = a.parse().map_err(|_| fail(line_no, format!("bad src `{a}`")))?;
                let b: usize = b.parse().map_err(|_| fail(line_no, format!("bad dst `{b}`")))?;
                if es.pair(id).ok() != Some((a, b)) {
                    return Err(fail(line_no, format!("pair ({a}, {b}) does not match edge id {id}")));
                }
                Some((a, b))
            }
            _ => return Err(fail(line_no, "src/dst present outside ctig mode".into())),
        };
        let time: f64 = cols[4].parse().map_err(|_| fail(line_no, format!("bad timestamp `{}`", cols[4])))?;
        let label = match (cols[5], split) {
            ("", Split::Train) => None,
            ("1", Split::Test | Split::TestCf) => Some(true),
            ("0", Split::Test | Split::TestCf) => Some(false),
            (l, s) => return Err(fail(line_no, format!("label `{l}` invalid for split {}", s.as_str()))),
        };
        if let Some((s, t)) = last {
            if s == split && time < t {
                return Err(fail(line_no, "rows not time-sorted within split".into()));
            }
        }
        last = Some((split, time));
        parsed.push(DatasetRow { split, id, pair, time, label });
    }
    Ok(DatasetFile { header, rows: parsed })
}
