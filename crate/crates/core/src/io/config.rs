//! Run configuration read from TOML.
//!
//! Parsing happens in two passes so that every problem is reported at once:
//! the document is first checked key by key against the defaults (unknown
//! keys, wrong types), then the typed values are checked against their
//! constraints. Each message starts with the dotted key path.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::causal::{AdjacencySpec, ModelPrior};
use crate::counterfactual::MetricKind;
use crate::ctig::{CtigSeeds, CtigSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Generate,
    Ctig,
    Distance,
    VarianceStudy,
    ExperimentA,
    ExperimentB,
    Properties,
    Export,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Generate => "generate",
            Experiment::Ctig => "ctig",
            Experiment::Distance => "distance",
            Experiment::VarianceStudy => "variance-study",
            Experiment::ExperimentA => "experiment-a",
            Experiment::ExperimentB => "experiment-b",
            Experiment::Properties => "properties",
            Experiment::Export => "export",
        }
    }
}

/// Where experiment models come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSource {
    Random,
    Ctig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSection {
    pub n: usize,
    pub edge_prob: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub tau_bar: f64,
    pub horizon: f64,
    /// Resample until the influence matrix has both signs.
    pub mixed_sign: bool,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            n: 7,
            edge_prob: 0.5,
            lambda_min: 0.5,
            lambda_max: 2.0,
            tau_bar: 1.0,
            horizon: 1000.0,
            mixed_sign: true,
        }
    }
}

impl ModelSection {
    pub fn prior(&self) -> ModelPrior {
        ModelPrior {
            n: self.n,
            adjacency: AdjacencySpec::ErdosRenyi { p: self.edge_prob },
            lambda_range: (self.lambda_min, self.lambda_max),
            tau_bar: self.tau_bar,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CtigSection {
    pub n: usize,
    pub r: usize,
    pub nu0: f64,
    pub nu1: f64,
    pub l: usize,
}

impl Default for CtigSection {
    fn default() -> Self {
        let s = CtigSpec::reference(0);
        Self { n: s.n, r: s.r, nu0: s.nu0, nu1: s.nu1, l: s.l }
    }
}

impl CtigSection {
    /// The construction recipe, with rates and window from `model`.
    pub fn spec(&self, model: &ModelSection, seed: u64) -> CtigSpec {
        CtigSpec {
            n: self.n,
            r: self.r,
            nu0: self.nu0,
            nu1: self.nu1,
            l: self.l,
            lambda_range: (model.lambda_min, model.lambda_max),
            tau_bar: model.tau_bar,
            seeds: CtigSeeds::from_master(seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistanceSection {
    pub iters: usize,
    pub pairs: usize,
}

impl Default for DistanceSection {
    fn default() -> Self {
        Self { iters: crate::distance::DEFAULT_ITERS, pairs: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VarianceSection {
    pub horizon: f64,
    pub iters: Vec<usize>,
    pub replications: usize,
}

impl Default for VarianceSection {
    fn default() -> Self {
        Self { horizon: 250.0, iters: vec![10, 40, 160], replications: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentASection {
    pub source: ModelSource,
    pub runs: usize,
    pub split_fraction: f64,
    pub negatives: usize,
    pub metric: MetricKind,
    /// Perturbation strength of the distorted model, drawn log-uniformly.
    pub distortion_min: f64,
    pub distortion_max: f64,
    /// Pairs of the estimated-model study.
    pub hypothesis_pairs: usize,
    /// Perturbation strength of the estimated model in that study.
    pub strength_min: f64,
    pub strength_max: f64,
    pub delta_star: f64,
    pub lowess_fraction: f64,
}

impl Default for ExperimentASection {
    fn default() -> Self {
        Self {
            source: ModelSource::Random,
            runs: 100,
            split_fraction: 0.5,
            negatives: 1,
            metric: MetricKind::Accuracy,
            distortion_min: 1e-3,
            distortion_max: 1.0,
            hypothesis_pairs: 1000,
            strength_min: 0.2,
            strength_max: 1.0,
            delta_star: 0.2,
            lowess_fraction: crate::io::lowess::DEFAULT_FRACTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentBSection {
    pub source: ModelSource,
    pub runs: usize,
    pub n_shuffles: usize,
    pub split_fraction: f64,
    pub negatives: usize,
    pub metric: MetricKind,
}

impl Default for ExperimentBSection {
    fn default() -> Self {
        Self {
            source: ModelSource::Random,
            runs: 100,
            n_shuffles: 10,
            split_fraction: 0.5,
            negatives: 1,
            metric: MetricKind::Accuracy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PropertiesSection {
    pub models: usize,
    pub max_parents: usize,
    pub pns_configs: usize,
    pub pns_horizon: f64,
}

impl Default for PropertiesSection {
    fn default() -> Self {
        Self { models: 500, max_parents: 10, pns_configs: 20, pns_horizon: 1e4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExportSection {
    /// Which experiment's datasets to write.
    pub from: Experiment,
    pub datasets: usize,
}

impl Default for ExportSection {
    fn default() -> Self {
        Self { from: Experiment::ExperimentA, datasets: 10 }
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    pub model: ModelSection,
    pub ctig: CtigSection,
    pub distance: DistanceSection,
    pub variance_study: VarianceSection,
    pub experiment_a: ExperimentASection,
    pub experiment_b: ExperimentBSection,
    pub properties: PropertiesSection,
    pub export: ExportSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Generate,
            seed: 0,
            out: PathBuf::from("out"),
            threads: 0,
            model: ModelSection::default(),
            ctig: CtigSection::default(),
            distance: DistanceSection::default(),
            variance_study: VarianceSection::default(),
            experiment_a: ExperimentASection::default(),
            experiment_b: ExperimentBSection::default(),
            properties: PropertiesSection::default(),
            export: ExportSection::default(),
        }
    }
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::String(_) => "string",
        Value::Integer(_) => "integer",
        Value::Float(_) => "float",
        Value::Boolean(_) => "boolean",
        Value::Datetime(_) => "datetime",
        Value::Array(_) => "array",
        Value::Table(_) => "table",
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() { key.to_string() } else { format!("{prefix}.{key}") }
}

/// Checks `doc` against the shape of `defaults`, widening integers where a
/// float is expected.
fn check_shape(doc: &mut Table, defaults: &Table, prefix: &str, errors: &mut Vec<String>) {
    for (key, value) in doc.iter_mut() {
        let path = join(prefix, key);
        let Some(expected) = defaults.get(key) else {
            errors.push(format!("{path}: unknown key"));
            continue;
        };
        match (expected, &mut *value) {
            (Value::Table(d), Value::Table(t)) => check_shape(t, d, &path, errors),
            (Value::Float(_), Value::Integer(i)) => *value = Value::Float(*i as f64),
            (Value::Array(d), Value::Array(items)) => {
                let want = d.first().map(kind);
                for (k, it) in items.iter().enumerate() {
                    if want.is_some_and(|w| w != kind(it)) {
                        errors.push(format!("{path}[{k}]: expected {}, found {}", want.unwrap(), kind(it)));
                    }
                }
            }
            (e, v) if kind(e) != kind(v) => {
                errors.push(format!("{path}: expected {}, found {}", kind(e), kind(v)));
            }
            _ => {}
        }
    }
}

fn unit_open(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

impl RunConfig {
    /// Constraint violations, each prefixed by its key path.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut need = |ok: bool, path: &str, what: &str| {
            if !ok {
                v.push(format!("{path}: {what}"));
            }
        };
        let m = &self.model;
        need(m.n >= 2, "model.n", "need at least 2 event types");
        need((0.0..=1.0).contains(&m.edge_prob), "model.edge_prob", "must lie in [0, 1]");
        need(m.lambda_min > 0.0, "model.lambda_min", "must be positive");
        need(m.lambda_max >= m.lambda_min, "model.lambda_max", "must be >= lambda_min");
        need(m.tau_bar > 0.0 && m.tau_bar.is_finite(), "model.tau_bar", "must be positive");
        need(m.horizon > 0.0 && m.horizon.is_finite(), "model.horizon", "must be positive");
        let c = &self.ctig;
        need(c.n >= 2, "ctig.n", "need at least 2 nodes");
        need(c.r >= 1, "ctig.r", "need at least 1 feature");
        need(c.nu0.is_finite(), "ctig.nu0", "must be finite");
        need(unit_open(c.nu1), "ctig.nu1", "must lie in (0, 1)");
        need(c.l < c.n * c.n.saturating_sub(1) / 2, "ctig.l", "must be smaller than the number of edge types");
        need(self.distance.iters >= 1, "distance.iters", "need at least 1 iteration");
        need(self.distance.pairs >= 1, "distance.pairs", "need at least 1 pair");
        let vs = &self.variance_study;
        need(vs.horizon > 0.0, "variance_study.horizon", "must be positive");
        need(!vs.iters.is_empty() && vs.iters.iter().all(|&k| k >= 1), "variance_study.iters", "need a non-empty list of positive counts");
        need(vs.replications >= 30, "variance_study.replications", "need at least 30");
        let a = &self.experiment_a;
        need(a.runs >= 1, "experiment_a.runs", "need at least 1 run");
        need(unit_open(a.split_fraction), "experiment_a.split_fraction", "must lie in (0, 1)");
        need(a.negatives >= 1, "experiment_a.negatives", "need at least 1");
        need(0.0 < a.distortion_min && a.distortion_min <= a.distortion_max && a.distortion_max <= 1.0, "experiment_a.distortion_min", "need 0 < distortion_min <= distortion_max <= 1");
        need(a.hypothesis_pairs >= 1, "experiment_a.hypothesis_pairs", "need at least 1");
        need(0.0 <= a.strength_min && a.strength_min <= a.strength_max && a.strength_max <= 1.0, "experiment_a.strength_min", "need 0 <= strength_min <= strength_max <= 1");
        need(a.delta_star > 0.0 && a.delta_star <= 1.0, "experiment_a.delta_star", "must lie in (0, 1]");
        need(a.lowess_fraction > 0.0 && a.lowess_fraction <= 1.0, "experiment_a.lowess_fraction", "must lie in (0, 1]");
        let b = &self.experiment_b;
        need(b.runs >= 1, "experiment_b.runs", "need at least 1 run");
        need(b.n_shuffles >= 1, "experiment_b.n_shuffles", "need at least 1");
        need(unit_open(b.split_fraction), "experiment_b.split_fraction", "must lie in (0, 1)");
        need(b.negatives >= 1, "experiment_b.negatives", "need at least 1");
        let p = &self.properties;
        need(p.models >= 1, "properties.models", "need at least 1");
        need(p.max_parents <= crate::properties::DEFAULT_PARENT_CAP, "properties.max_parents", "exceeds the enumeration cap of 20");
        need(p.pns_horizon > 0.0, "properties.pns_horizon", "must be positive");
        need(
            matches!(self.export.from, Experiment::ExperimentA | Experiment::ExperimentB),
            "export.from",
            "must be experiment-a or experiment-b",
        );
        need(self.export.datasets >= 1, "export.datasets", "need at least 1");
        v
    }
}

/// Parses and validates a configuration document.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let mut doc: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(vec![format!("<document>: {}", e.message())]))?;
    let defaults = match Value::try_from(RunConfig::default()) {
        Ok(Value::Table(t)) => t,
        _ => unreachable!("defaults serialize to a table"),
    };
    let mut errors = Vec::new();
    check_shape(&mut doc, &defaults, "", &mut errors);
    if !errors.is_empty() {
        return Err(Error::Config(errors));
    }
    let config: RunConfig = Value::Table(doc)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(vec![e.message().to_string()]))?;
    let violations = config.violations();
    if violations.is_empty() { Ok(config) } else { Err(Error::Config(violations)) }
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}
