//! Results documents and plot-data tables.
//!
//! Everything written here is a pure function of its inputs: JSON objects
//! keep struct field order, and floats use the shortest round-trip form.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::counterfactual::{CounterfactualOutcome, GapCell, GapRecord};
use crate::distance::VarianceRow;
use crate::error::{Error, Result};
use crate::io::lowess::lowess;

pub const REPORT_VERSION: u32 = 1;

/// A plain comma-separated table.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotTable {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

fn num(x: f64) -> String {
    if x.is_nan() { "nan".into() } else { format!("{x}") }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

impl PlotTable {
    pub fn new(name: impl Into<String>, columns: Vec<&'static str>) -> Self {
        Self { name: name.into(), columns, rows: Vec::new() }
    }

    pub fn render(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    /// Variance of the distance estimate against effective sample size.
    pub fn variance_decay(rows: &[VarianceRow]) -> Self {
        let mut t = Self::new("variance_decay", vec!["effective_size", "horizon", "iters", "mean", "variance", "replications"]);
        for r in rows {
            t.rows.push(vec![
                num(r.effective_size),
                num(r.horizon),
                r.iters.to_string(),
                num(r.mean),
                num(r.variance),
                r.replications.to_string(),
            ]);
        }
        t
    }

    /// Gap against model distance, with a LOWESS trend where at least three
    /// records carry a distance.
    pub fn gap_scatter(records: &[GapRecord], fraction: f64) -> Result<Self> {
        let mut t = Self::new("gap_scatter", vec!["d_bar", "delta", "d_star_0", "d_star_dagger", "smoothed"]);
        let mut pts: Vec<(f64, f64, &GapRecord)> =
            records.iter().filter_map(|r| r.d_bar.map(|d| (d, r.delta, r))).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let smooth = if pts.len() >= 3 {
            let xy: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, p.1)).collect();
            Some(lowess(&xy, fraction)?)
        } else {
            None
        };
        for (k, (d, delta, r)) in pts.iter().enumerate() {
            t.rows.push(vec![
                num(*d),
                num(*delta),
                num(r.d_star_0),
                num(r.d_star_dagger),
                opt(smooth.as_ref().map(|s| s[k].1)),
            ]);
        }
        Ok(t)
    }

    /// Per-run metric samples for each test set, one row per sample.
    pub fn metric_samples(name: &str, outcomes: &[Vec<CounterfactualOutcome>]) -> Self {
        let mut t = Self::new(name, vec!["run", "test_set", "metric", "value"]);
        for (run, outs) in outcomes.iter().enumerate() {
            if let Some(first) = outs.first() {
                t.rows.push(vec![run.to_string(), "original".into(), first.metric.name().into(), num(first.y_x_u)]);
            }
            for (k, o) in outs.iter().enumerate() {
                t.rows.push(vec![run.to_string(), format!("distorted_{k}"), o.metric.name().into(), num(o.y_xprime_u)]);
            }
        }
        t
    }

    /// Probability cells of a sweep, each with its surviving-record count.
    pub fn probability_cells(name: &str, cells: &[GapCell]) -> Self {
        let mut t = Self::new(name, vec!["beta", "delta_star", "probability", "positive", "count"]);
        for c in cells {
            let (p, pos, count) = match c.estimate {
                Some(e) => (num(e.probability), e.positive.to_string(), e.count.to_string()),
                None => (String::new(), "0".into(), "0".into()),
            };
            t.rows.push(vec![opt(c.beta), num(c.delta_star), p, pos, count]);
        }
        t
    }
}

/// Versioned results document.
#[derive(Debug, Clone, Serialize)]
pub struct Report<C: Serialize, R: Serialize> {
    pub version: u32,
    pub command: String,
    pub config: C,
    pub results: R,
}

impl<C: Serialize, R: Serialize> Report<C, R> {
    pub fn new(command: impl Into<String>, config: C, results: R) -> Self {
        Self { version: REPORT_VERSION, command: command.into(), config, results }
    }
}

/// Writes `report.json` and one `<name>.csv` per table into `dir`,
/// returning the written paths.
pub fn emit_report<C: Serialize, R: Serialize>(report: &Report<C, R>, tables: &[PlotTable], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::with_capacity(tables.len() + 1);
    let path = dir.join("report.json");
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    for t in tables {
        let path = dir.join(format!("{}.csv", t.name));
        fs::write(&path, t.render()).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// A one-line summary per table, for logs.
pub fn summarize(tables: &[PlotTable]) -> String {
    let mut s = String::new();
    for t in tables {
        let _ = writeln!(s, "{}: {} rows", t.name, t.rows.len());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterfactual::{gap_grid, performance_gap, MetricKind};

    fn records() -> Vec<GapRecord> {
        (0..12)
            .map(|k| {
                let d0 = 0.02 * k as f64;
                performance_gap(d0, 0.3, MetricKind::Accuracy).unwrap().with_distance(0.05 * k as f64)
            })
            .collect()
    }

    #[test]
    fn empty_inputs_give_header_only_tables() {
        let dir = tempfile::tempdir().unwrap();
        let tables = vec![
            PlotTable::gap_scatter(&[], 0.95).unwrap(),
            PlotTable::variance_decay(&[]),
            PlotTable::probability_cells("grid", &[]),
        ];
        let paths = emit_report(&Report::new("test", (), Vec::<u8>::new()), &tables, dir.path()).unwrap();
        assert_eq!(paths.len(), 4);
        assert_eq!(fs::read_to_string(&paths[1]).unwrap().lines().count(), 1);
        let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&paths[0]).unwrap()).unwrap();
        assert_eq!(doc["version"], 1);
    }

    #[test]
    fn grid_has_one_row_per_cell_with_counts() {
        let betas = [0.0, 0.1, 0.2];
        let deltas = [0.05, 0.2, 1.0];
        let cells = gap_grid(&records(), &betas, &deltas).unwrap();
        let t = PlotTable::probability_cells("grid", &cells);
        assert_eq!(t.rows.len(), 9);
        for r in &t.rows {
            assert_eq!(r.len(), 5);
            let count: usize = r[4].parse().unwrap();
            assert_eq!(r[2].is_empty(), count == 0);
        }
    }

    #[test]
    fn reports_are_byte_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let tables = vec![PlotTable::gap_scatter(&records(), 0.95).unwrap()];
        let report = Report::new("experiment-a", RunConfigLike { seed: 1 }, records());
        let pa = emit_report(&report, &tables, a.path()).unwrap();
        let pb = emit_report(&report, &tables, b.path()).unwrap();
        for (x, y) in pa.iter().zip(&pb) {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
        }
        assert!(tables[0].rows.iter().all(|r| !r[4].is_empty()));
    }

    #[derive(Serialize)]
    struct RunConfigLike {
        seed: u64,
    }
}
