//! Causal event sequences and causal temporal interaction graphs with known
//! ground truth, plus the tools to benchmark predictors against them.
//!
//! A [`CausalModel`] turns Poisson trigger streams into accepted events via
//! a thresholded structural equation over a sliding history window.
//! [`ctig`] derives such models for edge events of a graph from random node
//! features. [`distance`] measures how differently two models behave,
//! [`counterfactual`] runs causal-shift and timestamp-shuffling evaluations,
//! and [`properties`] exposes monotonicity and PNS checks.
//!
//! ```
//! use ctig::{generate_sequence, directed_distance, ModelPrior};
//!
//! let model = ModelPrior::default().sample_mixed_sign(7).unwrap();
//! let run = generate_sequence(&model, 100.0, 1).unwrap();
//! let d = directed_distance(&model, &model, &run.accepted, &run.triggers).unwrap();
//! assert_eq!(d.value, 0.0);
//! ```

pub mod causal;
pub mod counterfactual;
pub mod ctig;
pub mod distance;
pub mod error;
pub mod io;
pub mod point_process;
pub mod properties;
pub mod runner;
pub mod seed;
pub mod stats;

pub use causal::{
    degeneracy_check, generate_sequence, replay_triggers, sample_random_model, sample_triggers, sem_eval,
    AdjacencySpec, CausalModel, EventSequence, GeneratedSequence, ModelPrior,
};
pub use ctig::{build_ctig_model, CtigModel, CtigSpec, EdgeSpace};
pub use distance::{directed_distance, mean_distance, symmetric_distance, variance_decay_study, StudyCell};
pub use error::{Error, Result};
pub use point_process::{merge_timeline, sample_ppp, Event, Timeline, TriggerStream};
