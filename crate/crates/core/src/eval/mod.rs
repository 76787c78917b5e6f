//! Metrics, ROC, and the three validation protocols: stratified k-fold over
//! days, leave-one-pair-out over subjects, and cross-device transfer.

mod metrics;
mod protocols;
mod report;
mod roc;

use thiserror::Error;

pub use metrics::{confusion, mean_sd, ConfusionMatrix, MeanSd, MetricsReport};
pub use protocols::{
    make_pairs, run_cv5, run_kfold, run_pair_loocv, run_pair_loocv_hours, run_transfer_eval,
    stratified_kfold, CvOutcome, DayPrediction, EvalSummary, IterationResult, ModelKind,
    PairDetail, PairLoocvOptions, PairLoocvOutcome, Protocol, SubjectPredictions, TransferOutcome,
    POOR_PAIR_ACCURACY,
};
pub use report::{iterations_csv, summary_csv, summary_text, SummaryRow};
pub use roc::{roc_auc, RocCurve, RocPoint};

use crate::features::FeatureError;
use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("label/prediction length mismatch ({actual} vs {predicted})")]
    LengthMismatch { actual: usize, predicted: usize },
    #[error("no samples to evaluate")]
    Empty,
    #[error("both classes must be present")]
    SingleClass,
    #[error("score is NaN")]
    NanScore,
    #[error("k must be at least 2, got {0}")]
    BadK(usize),
    #[error("class {class:?} has {count} rows, fewer than k = {k}")]
    ClassTooSmall {
        class: crate::ingest::ClassLabel,
        count: usize,
        k: usize,
    },
    #[error(
        "need at least {need} subjects per class, have {depressed} depressed and {healthy} healthy"
    )]
    TooFewSubjects {
        need: usize,
        depressed: usize,
        healthy: usize,
    },
    #[error("subject `{0}` has no class label")]
    Unlabeled(String),
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
