//! Configuration, dataset exchange, reports and smoothing.

pub mod config;
pub mod dataset;
pub mod lowess;
pub mod report;
pub mod scores;

pub use config::{parse_config, parse_config_str, Experiment, ModelSource, RunConfig};
pub use dataset::{export_dataset, import_dataset, render_time, DatasetFile, DatasetHeader, DatasetRow, TypeSpace};
pub use lowess::lowess;
pub use report::{emit_report, PlotTable, Report};
pub use scores::{import_scores, parse_scores, ScoreFileScorer};
