//! Actigraphy-based depression screening.
//!
//! The pipeline turns minute-level activity streams into day-level feature
//! vectors, trains a class-balanced random forest on them, validates it
//! with subject-aware protocols and scores new uploads from a different
//! device after per-device scaling.
//!
//! ```text
//! ingest ─► timeseries ─► scaling ─► features ─► model ─► eval
//!                                         └──────────► screening
//! ```
//!
//! Heavy loops (trees, folds, pairs, subjects) run on rayon when the
//! `parallel` feature is enabled and sequentially otherwise; see [`par`].

pub mod eval;
pub mod features;
pub mod ingest;
pub mod model;
pub mod par;
pub mod scaling;
pub mod screening;
pub mod synth;
pub mod timeseries;

mod error;

pub use error::{Error, Result};
pub use features::{Dataset, FeatureSchema, FeatureVector, HourlyScaling};
pub use ingest::{ClassLabel, DeviceKind, MinuteRecord, SubjectSeries};
pub use model::{ForestConfig, ForestModel, ModelBundle};
pub use par::Exec;
pub use scaling::{ScalerKind, ScalerParams};
