use thiserror::Error;

use crate::{eval, features, ingest, model, scaling, screening, timeseries};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Umbrella error for code that crosses module boundaries.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] ingest::IngestError),
    #[error(transparent)]
    Timeseries(#[from] timeseries::TimeseriesError),
    #[error(transparent)]
    Scaling(#[from] scaling::ScalingError),
    #[error(transparent)]
    Features(#[from] features::FeatureError),
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
    #[error(transparent)]
    Screening(#[from] screening::ScreeningError),
}
