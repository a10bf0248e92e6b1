//! Online hyperparameter optimization for class-incremental learning.
//!
//! Classes arrive in phases; after each phase only a handful of exemplars per
//! class survive. How plastic or stable the learner should be depends on how
//! the data arrives (all-at-once pretraining vs. an even trickle), which is
//! unknown ahead of time. This crate treats the per-phase hyperparameters —
//! distillation-loss weights, learning rate, classifier type — as arms of an
//! adversarial bandit: an Exp3 policy samples an action each phase, scores it
//! on a validation set rebuilt from the phase's own training data, and shifts
//! probability mass toward actions that keep accuracy high as the stream
//! evolves.
//!
//! Module map:
//! - [`bandit`]: Exp3 weights, normalization, sampling, updates.
//! - [`hyperspace`]: the action tuple and the discretized action space.
//! - [`learner`]: the small dense classifier, losses with hand-derived
//!   gradients, SGD, NCM/FC prediction, herding.
//! - [`datastream`]: phase schedules, synthetic/CSV datasets, exemplar
//!   memory, local train/validation rebuilds.
//! - [`orchestrator`]: the per-phase loop tying policy learning to CIL
//!   training.
//! - [`harness`]: configuration, experiment matrices, baselines, reports.
//!
//! See the crate's `examples/` directory for one runnable walkthrough per
//! capability, and the `acceptance` test target for the behavioral suite.

pub mod bandit;
pub mod datastream;
pub mod error;
pub mod harness;
pub mod hyperspace;
pub mod learner;
pub mod orchestrator;
pub mod seeding;

pub use error::{Error, Result};
