//! Day-level feature vectors: four six-hour bins, five statistics each.

use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{ClassLabel, DeviceKind, SubjectSeries};
use crate::par::{self, Exec};
use crate::scaling::{fit_scaler, ScalerKind, ScalerParams, ScalingError};
use crate::timeseries::{self, CompleteDay, HourCell, HOURS_PER_DAY};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("subjects come from more than one device ({0:?} and {1:?})")]
    MixedDevices(DeviceKind, DeviceKind),
    #[error("subject `{0}` has no class label")]
    Unlabeled(String),
    #[error("no valid days in the input")]
    NoValidDays,
    #[error("no subjects given")]
    NoSubjects,
    #[error("series is empty")]
    EmptySeries,
    #[error("invalid feature schema: {0}")]
    Schema(String),
    #[error("feature table line {line}: {reason}")]
    Table { line: usize, reason: String },
    #[error(transparent)]
    Scaling(#[from] ScalingError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Statistic {
    Mean,
    Std,
    Min,
    Max,
    Median,
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Statistic::Mean => "mean",
            Statistic::Std => "std",
            Statistic::Min => "min",
            Statistic::Max => "max",
            Statistic::Median => "median",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            Statistic::Mean,
            Statistic::Std,
            Statistic::Min,
            Statistic::Max,
            Statistic::Median,
        ]
        .into_iter()
        .find(|s| s.name() == name)
    }

    /// Evaluates the statistic on a non-empty slice. Std uses divisor n.
    pub fn eval(self, values: &[f64]) -> f64 {
        let n = values.len() as f64;
        match self {
            Statistic::Mean => values.iter().sum::<f64>() / n,
            Statistic::Std => {
                let mean = values.iter().sum::<f64>() / n;
                (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
            }
            Statistic::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
            Statistic::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Statistic::Median => {
                let mut v = values.to_vec();
                v.sort_by(f64::total_cmp);
                let mid = v.len() / 2;
                if v.len().is_multiple_of(2) {
                    (v[mid - 1] + v[mid]) / 2.0
                } else {
                    v[mid]
                }
            }
        }
    }
}

/// Layout of a feature vector. Values are ordered bin-major, statistic-minor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub version: u32,
    /// Half-open hour ranges `[start, end)`.
    pub bin_boundaries: Vec<(u8, u8)>,
    pub statistic_names: Vec<String>,
}

impl Default for FeatureSchema {
    fn default() -> Self {
        Self::v1()
    }
}

impl FeatureSchema {
    pub const V1: u32 = 1;

    pub fn v1() -> Self {
        FeatureSchema {
            version: Self::V1,
            bin_boundaries: vec![(0, 6), (6, 12), (12, 18), (18, 24)],
            statistic_names: ["mean", "std", "min", "max", "median"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }

    pub fn feature_count(&self) -> usize {
        self.bin_boundaries.len() * self.statistic_names.len()
    }

    pub fn statistics(&self) -> Result<Vec<Statistic>, FeatureError> {
        self.statistic_names
            .iter()
            .map(|n| {
                Statistic::from_name(n)
                    .ok_or_else(|| FeatureError::Schema(format!("unknown statistic `{n}`")))
            })
            .collect()
    }

    /// Bins must tile hours 0–23 in order without gaps.
    pub fn validate(&self) -> Result<(), FeatureError> {
        self.statistics()?;
        let mut next = 0u8;
        for &(lo, hi) in &self.bin_boundaries {
            if lo != next || hi <= lo {
                return Err(FeatureError::Schema(format!(
                    "bin [{lo}, {hi}) breaks the tiling"
                )));
            }
            next = hi;
        }
        if next as usize != HOURS_PER_DAY {
            return Err(FeatureError::Schema(
                "bins do not cover the whole day".into(),
            ));
        }
        Ok(())
    }

    /// Names like `h06_11_median`.
    pub fn feature_names(&self) -> Vec<String> {
        self.bin_boundaries
            .iter()
            .flat_map(|&(lo, hi)| {
                self.statistic_names
                    .iter()
                    .map(move |s| format!("h{lo:02}_{:02}_{s}", hi - 1))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub subject_id: String,
    pub date: NaiveDate,
    pub values: Vec<f64>,
    pub label: Option<ClassLabel>,
}

/// Features for one imputed (and usually scaled) day.
pub fn day_features(day: &CompleteDay, schema: &FeatureSchema) -> FeatureVector {
    let stats = schema.statistics().expect("schema validated by caller");
    let mut values = Vec::with_capacity(schema.feature_count());
    for &(lo, hi) in &schema.bin_boundaries {
        let bin = &day.hours[lo as usize..hi as usize];
        values.extend(stats.iter().map(|s| s.eval(bin)));
    }
    FeatureVector {
        subject_id: day.subject_id.clone(),
        date: day.date,
        values,
        label: day.label,
    }
}

/// How hourly totals are normalised before features are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HourlyScaling {
    Raw,
    Fit(ScalerKind),
}

impl From<ScalerKind> for HourlyScaling {
    fn from(k: ScalerKind) -> Self {
        HourlyScaling::Fit(k)
    }
}

/// Hour cells for one subject; the unit the evaluation protocols cache so
/// minute streams are aggregated only once.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubjectHours {
    pub subject_id: String,
    pub device: DeviceKind,
    pub label: Option<ClassLabel>,
    pub cells: Vec<HourCell>,
}

impl SubjectHours {
    pub fn from_series(series: &SubjectSeries) -> Self {
        SubjectHours {
            subject_id: series.subject_id.clone(),
            device: series.device,
            label: series.label,
            cells: timeseries::hourly_totals(series),
        }
    }

    pub fn totals(&self) -> impl Iterator<Item = f64> + '_ {
        self.cells.iter().map(|c| c.total)
    }

    pub fn complete_days(&self) -> Vec<CompleteDay> {
        timeseries::complete_days(&self.cells, &self.subject_id, self.label)
    }

    pub fn valid_day_count(&self) -> usize {
        timeseries::segment_days(&self.cells, &self.subject_id, self.label)
            .iter()
            .filter(|d| d.is_valid())
            .count()
    }
}

pub fn hours_for_all(subjects: &[SubjectSeries], exec: Exec) -> Vec<SubjectHours> {
    par::map_slice(subjects, exec, SubjectHours::from_series)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub schema: FeatureSchema,
    pub rows: Vec<FeatureVector>,
    pub device: DeviceKind,
    /// `None` when features were computed on raw hourly totals.
    pub scaler: Option<ScalerParams>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Labels of every row. Rows in a dataset are always labelled.
    pub fn labels(&self) -> Vec<ClassLabel> {
        self.rows
            .iter()
            .map(|r| r.label.expect("dataset rows are labelled"))
            .collect()
    }

    /// Rows restricted to `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            ..self.clone()
        }
    }

    /// `subject_id,date,<features…>,label`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("subject_id,date,");
        out.push_str(&self.schema.feature_names().join(","));
        out.push_str(",label\n");
        for row in &self.rows {
            write!(out, "{},{}", row.subject_id, row.date).unwrap();
            for v in &row.values {
                write!(out, ",{v}").unwrap();
            }
            match row.label {
                Some(l) => writeln!(out, ",{}", l.index()).unwrap(),
                None => out.push_str(",\n"),
            }
        }
        out
    }
}

/// Reads a feature table written by [`Dataset::to_csv`]. The header must
/// match `schema` exactly.
pub fn read_feature_csv(
    text: &str,
    schema: &FeatureSchema,
) -> Result<Vec<FeatureVector>, FeatureError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let expected = format!("subject_id,date,{},label", schema.feature_names().join(","));
    match lines.next() {
        Some((_, h)) if h.trim_end() == expected => {}
        _ => {
            return Err(FeatureError::Table {
                line: 1,
                reason: "header does not match the feature schema".into(),
            })
        }
    }
    let width = schema.feature_count() + 3;
    let mut rows = Vec::new();
    for (line, text) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let err = |reason: String| FeatureError::Table { line, reason };
        let fields: Vec<&str> = text.trim_end().split(',').collect();
        if fields.len() != width {
            return Err(err(format!(
                "expected {width} fields, found {}",
                fields.len()
            )));
        }
        let date = NaiveDate::parse_from_str(fields[1], "%Y-%m-%d")
            .map_err(|e| err(format!("date `{}`: {e}", fields[1])))?;
        let values = fields[2..width - 1]
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("feature `{f}` is not a finite number")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let label = match fields[width - 1] {
            "" => None,
            l => Some(l.parse::<ClassLabel>().map_err(err)?),
        };
        rows.push(FeatureVector {
            subject_id: fields[0].to_string(),
            date,
            values,
            label,
        });
    }
    Ok(rows)
}

/// Fits the scaler on every hourly total of every subject, including hours
/// from days that are later dropped.
pub fn fit_on_subjects(
    subjects: &[SubjectHours],
    scaling: HourlyScaling,
) -> Result<Option<ScalerParams>, FeatureError> {
    match scaling {
        HourlyScaling::Raw => Ok(None),
        HourlyScaling::Fit(kind) => {
            let all: Vec<f64> = subjects.iter().flat_map(|s| s.totals()).collect();
            Ok(Some(fit_scaler(kind, &all)?))
        }
    }
}

/// Valid days of one subject, imputed on the raw scale, then scaled and
/// turned into feature vectors. Rows keep the subject's label.
pub fn featurize_with(
    subject: &SubjectHours,
    scaler: Option<&ScalerParams>,
    schema: &FeatureSchema,
) -> Vec<FeatureVector> {
    subject
        .complete_days()
        .iter()
        .map(|day| match scaler {
            Some(p) => day_features(&day.map_hours(|h| p.apply(h)), schema),
            None => day_features(day, schema),
        })
        .collect()
}

/// Builds a labelled dataset from subjects sharing one device.
pub fn build_dataset(
    subjects: &[SubjectSeries],
    scaler_kind: ScalerKind,
) -> Result<Dataset, FeatureError> {
    let hours = hours_for_all(subjects, Exec::default());
    build_dataset_from_hours(&hours, scaler_kind.into(), Exec::default())
}

pub fn build_dataset_from_hours(
    subjects: &[SubjectHours],
    scaling: HourlyScaling,
    exec: Exec,
) -> Result<Dataset, FeatureError> {
    let first = subjects.first().ok_or(FeatureError::NoSubjects)?;
    for s in subjects {
        if s.device != first.device {
            return Err(FeatureError::MixedDevices(first.device, s.device));
        }
        if s.label.is_none() {
            return Err(FeatureError::Unlabeled(s.subject_id.clone()));
        }
    }

    let schema = FeatureSchema::v1();
    let scaler = fit_on_subjects(subjects, scaling)?;

    let mut ordered: Vec<&SubjectHours> = subjects.iter().collect();
    ordered.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
    let per_subject = par::map_slice(&ordered, exec, |s| {
        featurize_with(s, scaler.as_ref(), &schema)
    });
    let rows: Vec<FeatureVector> = per_subject.into_iter().flatten().collect();
    if rows.is_empty() {
        return Err(FeatureError::NoValidDays);
    }

    Ok(Dataset {
        schema,
        rows,
        device: first.device,
        scaler,
    })
}

/// Unlabelled rows for one new subject, scaled against that subject's own
/// hourly totals. Returns an empty list when no day is valid.
pub fn featurize_single(
    series: &SubjectSeries,
    scaler_kind: ScalerKind,
) -> Result<Vec<FeatureVector>, FeatureError> {
    if series.is_empty() {
        return Err(FeatureError::EmptySeries);
    }
    let mut hours = SubjectHours::from_series(series);
    hours.label = None;
    let scaler = fit_scaler(scaler_kind, &hours.totals().collect::<Vec<_>>())?;
    Ok(featurize_with(&hours, Some(&scaler), &FeatureSchema::v1()))
}
