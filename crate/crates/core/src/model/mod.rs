//! Random forest with balanced class weights, the stratified dummy
//! baseline, and the deployable model bundle.

mod bundle;
mod dummy;
mod forest;
pub mod tree;

use thiserror::Error;

pub use bundle::{load_bundle, save_bundle, ModelBundle, TrainingMetadata, BUNDLE_FORMAT_VERSION};
pub use dummy::{fit_dummy, predict_dummy, DummyModel};
pub use forest::{
    balanced_weights, fit_forest, fit_forest_rows, label_for_score, predict_label, predict_score,
    ClassWeights, ForestConfig, ForestModel, MaxFeatures, DECISION_THRESHOLD,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("need at least 2 training rows, got {0}")]
    TooFewRows(usize),
    #[error("feature vector has {found} values, model expects {expected}")]
    SchemaMismatch { expected: usize, found: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("bundle field `{field}`: {reason}")]
    Decode { field: String, reason: String },
    #[error("bundle format version {found} is not supported (this build reads {supported})")]
    Version { found: u64, supported: u32 },
}
