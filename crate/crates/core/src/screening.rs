//! Per-day screening of one uploaded step log, shared by the CLI `predict`
//! command and the HTTP service so both produce identical rows.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{day_features, FeatureError, SubjectHours};
use crate::ingest::{parse_fitbit_steps, ClassLabel, IngestError, SubjectSeries};
use crate::model::{label_for_score, ModelBundle, ModelError};
use crate::scaling::{fit_scaler, ScalingError};
use crate::timeseries;

pub const DEFAULT_WINDOW: usize = 15;

pub const DISCLAIMER: &str = "This is a research screening tool, not a medical diagnosis. \
The result is based only on movement patterns and may be wrong. \
If you are worried about your mood, please talk to a qualified health professional.";

#[derive(Debug, Error)]
pub enum ScreeningError {
    #[error("could not read the uploaded file: {0}")]
    Malformed(#[from] IngestError),
    #[error("the file contains no activity records")]
    Empty,
    #[error("no day has at least {} recorded hours", timeseries::MIN_VALID_HOURS)]
    NoValidDays,
    #[error("window must be at least 1")]
    BadWindow,
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub date: NaiveDate,
    pub hours_present: usize,
    pub score: f64,
    pub label: ClassLabel,
    pub imputed_hours: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub format_version: u32,
    pub schema_version: u32,
    pub feature_names: Vec<String>,
    pub scaler_kind: String,
    pub n_trees: usize,
    pub dataset_name: String,
    pub row_count: usize,
    pub trained_at: String,
}

impl ModelInfo {
    pub fn from_bundle(b: &ModelBundle) -> Self {
        ModelInfo {
            format_version: b.format_version,
            schema_version: b.feature_schema.version,
            feature_names: b.feature_schema.feature_names(),
            scaler_kind: b.scaler_kind.to_string(),
            n_trees: b.forest.trees.len(),
            dataset_name: b.metadata.dataset_name.clone(),
            row_count: b.metadata.row_count,
            trained_at: b.metadata.trained_at.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreeningResponse {
    pub model_info: ModelInfo,
    /// Newest first.
    pub rows: Vec<PredictionRow>,
    /// Invalid days dated within the span of the returned rows.
    pub skipped_days: usize,
    pub disclaimer: String,
}

impl ScreeningResponse {
    /// `date,hours_present,score,label,imputed_hours` with hours joined by `;`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("date,hours_present,score,label,imputed_hours\n");
        for r in &self.rows {
            let imputed: Vec<String> = r.imputed_hours.iter().map(u8::to_string).collect();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.date,
                r.hours_present,
                r.score,
                r.label.as_str(),
                imputed.join(";")
            ));
        }
        out
    }
}

/// Scores the `window` newest valid days of `series`.
///
/// The scaler of the bundle's kind is fitted on every hourly total of the
/// upload, the same population [`crate::features::featurize_single`] uses.
pub fn screen(
    bundle: &ModelBundle,
    series: &SubjectSeries,
    window: usize,
) -> Result<ScreeningResponse, ScreeningError> {
    if window == 0 {
        return Err(ScreeningError::BadWindow);
    }
    if series.is_empty() {
        return Err(ScreeningError::Empty);
    }
    let mut hours = SubjectHours::from_series(series);
    hours.label = None;
    let totals: Vec<f64> = hours.totals().collect();
    let scaler = fit_scaler(bundle.scaler_kind, &totals)?;

    let mut days = hours.complete_days();
    if days.is_empty() {
        return Err(ScreeningError::NoValidDays);
    }
    days.sort_by_key(|d| std::cmp::Reverse(d.date));
    days.truncate(window);

    let oldest = days.last().expect("non-empty").date;
    let skipped_days = timeseries::segment_days(&hours.cells, &hours.subject_id, None)
        .iter()
        .filter(|d| !d.is_valid() && d.date >= oldest)
        .count();

    let rows = days
        .iter()
        .map(|day| {
            let fv = day_features(&day.map_hours(|h| scaler.apply(h)), &bundle.feature_schema);
            let score = bundle.forest.score_values(&fv.values)?;
            Ok(PredictionRow {
                date: day.date,
                hours_present: timeseries::HOURS_PER_DAY - day.imputed_hours.len(),
                score,
                label: label_for_score(score),
                imputed_hours: day.imputed_hours.clone(),
            })
        })
        .collect::<Result<Vec<_>, ModelError>>()?;

    Ok(ScreeningResponse {
        model_info: ModelInfo::from_bundle(bundle),
        rows,
        skipped_days,
        disclaimer: DISCLAIMER.to_string(),
    })
}

/// Parses a step-log upload, then [`screen`]s it.
pub fn screen_upload(
    bundle: &ModelBundle,
    bytes: &[u8],
    window: usize,
) -> Result<ScreeningResponse, ScreeningError> {
    let text =
        std::str::from_utf8(bytes).map_err(|e| IngestError::Format(format!("not UTF-8: {e}")))?;
    let series = parse_fitbit_steps(text)?;
    screen(bundle, &series, window)
}
