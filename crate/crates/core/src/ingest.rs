//! Raw data formats: Depresjon activity tables and Fitbit step logs.
//!
//! Both are parsed into a [`SubjectSeries`], a minute-resolution stream with
//! a device tag. Timestamps are naive local time; no timezone arithmetic is
//! ever applied.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::par::{self, Exec};

const DEPRESJON_TIMESTAMP: &str = "%Y-%m-%d %H:%M:%S";
const FITBIT_TIMESTAMP: &str = "%m/%d/%y %H:%M:%S";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: duplicate timestamp {timestamp}")]
    Duplicate {
        line: usize,
        timestamp: NaiveDateTime,
    },
    #[error("element {index}: {reason}")]
    Element { index: usize, reason: String },
    #[error("fitbit step log must be a JSON array: {0}")]
    Format(String),
    #[error("dataset layout: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<IngestError>,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceKind {
    ActiwatchCounts,
    FitbitSteps,
}

/// Target class. The numeric encoding is fixed: healthy 0, depressed 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassLabel {
    Healthy = 0,
    Depressed = 1,
}

impl ClassLabel {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            0 => Some(ClassLabel::Healthy),
            1 => Some(ClassLabel::Depressed),
            _ => None,
        }
    }

    pub fn is_positive(self) -> bool {
        self == ClassLabel::Depressed
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Healthy => "healthy",
            ClassLabel::Depressed => "depressed",
        }
    }
}

impl std::str::FromStr for ClassLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "0" | "healthy" | "control" => Ok(ClassLabel::Healthy),
            "1" | "depressed" | "condition" => Ok(ClassLabel::Depressed),
            other => Err(format!("unknown class label `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinuteRecord {
    pub timestamp: NaiveDateTime,
    pub activity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubjectSeries {
    pub subject_id: String,
    pub device: DeviceKind,
    pub label: Option<ClassLabel>,
    /// Strictly ascending by timestamp.
    pub records: Vec<MinuteRecord>,
}

impl SubjectSeries {
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// Returns a copy with every activity value mapped through `f`.
    pub fn map_activity(&self, f: impl Fn(f64) -> f64) -> SubjectSeries {
        SubjectSeries {
            records: self
                .records
                .iter()
                .map(|r| MinuteRecord {
                    timestamp: r.timestamp,
                    activity: f(r.activity),
                })
                .collect(),
            ..self.clone()
        }
    }
}

fn truncate_seconds(ts: NaiveDateTime) -> NaiveDateTime {
    ts.with_second(0)
        .and_then(|t| t.with_nanosecond(0))
        .expect("zero seconds is always valid")
}

fn parse_activity(raw: &str) -> Result<f64, String> {
    let v: f64 = raw
        .parse()
        .map_err(|_| format!("activity `{raw}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("activity `{raw}` is not finite"));
    }
    if v < 0.0 {
        return Err(format!("activity `{raw}` is negative"));
    }
    Ok(v)
}

fn unquote(field: &str) -> &str {
    let f = field.trim();
    f.strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(f)
}

/// Parses one Depresjon activity file (`timestamp,date,activity`).
///
/// Rows may come in any order; the result is sorted. Two rows on the same
/// minute are an error.
pub fn parse_depresjon_activity(
    content: &str,
    subject_id: &str,
    label: ClassLabel,
) -> Result<SubjectSeries, IngestError> {
    let mut lines = content
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());

    let (header_line, header) = lines.next().ok_or(IngestError::Parse {
        line: 1,
        reason: "missing header row".into(),
    })?;
    let columns: Vec<String> = header
        .split(',')
        .map(|c| unquote(c).to_ascii_lowercase())
        .collect();
    let find = |name: &str| {
        columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| IngestError::Parse {
                line: header_line,
                reason: format!("header has no `{name}` column"),
            })
    };
    let ts_col = find("timestamp")?;
    find("date")?;
    let act_col = find("activity")?;

    let mut rows: Vec<(usize, MinuteRecord)> = Vec::new();
    for (line, text) in lines {
        let fields: Vec<&str> = text.split(',').map(unquote).collect();
        if fields.len() != columns.len() {
            return Err(IngestError::Parse {
                line,
                reason: format!("expected {} columns, found {}", columns.len(), fields.len()),
            });
        }
        let timestamp = NaiveDateTime::parse_from_str(fields[ts_col], DEPRESJON_TIMESTAMP)
            .map_err(|e| IngestError::Parse {
                line,
                reason: format!("timestamp `{}`: {e}", fields[ts_col]),
            })?;
        let activity = parse_activity(fields[act_col])
            .map_err(|reason| IngestError::Parse { line, reason })?;
        rows.push((
            line,
            MinuteRecord {
                timestamp: truncate_seconds(timestamp),
                activity,
            },
        ));
    }

    rows.sort_by_key(|(_, r)| r.timestamp);
    if let Some(w) = rows
        .windows(2)
        .find(|w| w[0].1.timestamp == w[1].1.timestamp)
    {
        let line = w[0].0.max(w[1].0);
        return Err(IngestError::Duplicate {
            line,
            timestamp: w[1].1.timestamp,
        });
    }

    Ok(SubjectSeries {
        subject_id: subject_id.to_string(),
        device: DeviceKind::ActiwatchCounts,
        label: Some(label),
        records: rows.into_iter().map(|(_, r)| r).collect(),
    })
}

/// Writes a series back out in the Depresjon layout.
pub fn to_depresjon_csv(series: &SubjectSeries) -> String {
    let mut out = String::from("timestamp,date,activity\n");
    for r in &series.records {
        out.push_str(&format!(
            "{},{},{}\n",
            r.timestamp.format(DEPRESJON_TIMESTAMP),
            r.timestamp.date(),
            r.activity
        ));
    }
    out
}

/// Sub-directory names of a Depresjon download.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepresjonLayout {
    pub condition_dir: String,
    pub control_dir: String,
}

impl Default for DepresjonLayout {
    fn default() -> Self {
        DepresjonLayout {
            condition_dir: "condition".into(),
            control_dir: "control".into(),
        }
    }
}

fn list_files(dir: &Path) -> Result<Vec<PathBuf>, IngestError> {
    if !dir.is_dir() {
        return Err(IngestError::Config(format!(
            "missing directory {}",
            dir.display()
        )));
    }
    let entries = fs::read_dir(dir).map_err(|source| IngestError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| IngestError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        let hidden = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with('.'));
        if path.is_file() && !hidden {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads every activity file under `root`: condition files are labelled
/// depressed, control files healthy. Subjects come back sorted by id.
pub fn load_depresjon_dataset(
    root: &Path,
    layout: &DepresjonLayout,
) -> Result<Vec<SubjectSeries>, IngestError> {
    load_depresjon_dataset_with(root, layout, Exec::default())
}

pub fn load_depresjon_dataset_with(
    root: &Path,
    layout: &DepresjonLayout,
    exec: Exec,
) -> Result<Vec<SubjectSeries>, IngestError> {
    let mut jobs = Vec::new();
    for (dir, label) in [
        (&layout.condition_dir, ClassLabel::Depressed),
        (&layout.control_dir, ClassLabel::Healthy),
    ] {
        for path in list_files(&root.join(dir))? {
            jobs.push((path, label));
        }
    }

    let parsed = par::map_slice(&jobs, exec, |(path, label)| {
        let content = fs::read_to_string(path).map_err(|source| IngestError::Io {
            path: path.clone(),
            source,
        })?;
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        parse_depresjon_activity(&content, &stem, *label).map_err(|e| IngestError::File {
            path: path.clone(),
            source: Box::new(e),
        })
    });

    let mut subjects = parsed.into_iter().collect::<Result<Vec<_>, _>>()?;
    subjects.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
    Ok(subjects)
}

/// Loads labelled step logs laid out like a Depresjon download, one JSON
/// file per subject under the condition and control directories.
pub fn load_fitbit_dataset(
    root: &Path,
    layout: &DepresjonLayout,
    exec: Exec,
) -> Result<Vec<SubjectSeries>, IngestError> {
    let mut jobs = Vec::new();
    for (dir, label) in [
        (&layout.condition_dir, ClassLabel::Depressed),
        (&layout.control_dir, ClassLabel::Healthy),
    ] {
        for path in list_files(&root.join(dir))? {
            jobs.push((path, label));
        }
    }
    let parsed = par::map_slice(&jobs, exec, |(path, label)| {
        let content = fs::read_to_string(path).map_err(|source| IngestError::Io {
            path: path.clone(),
            source,
        })?;
        let mut series = parse_fitbit_steps(&content).map_err(|e| IngestError::File {
            path: path.clone(),
            source: Box::new(e),
        })?;
        series.subject_id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        series.label = Some(*label);
        Ok(series)
    });
    let mut subjects = parsed.into_iter().collect::<Result<Vec<_>, _>>()?;
    subjects.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
    Ok(subjects)
}

/// Parses a Fitbit minute step log: a JSON array of
/// `{"dateTime": "MM/DD/YY HH:MM:SS", "value": "12"}` objects.
///
/// Entries that land on the same minute are summed.
pub fn parse_fitbit_steps(content: &str) -> Result<SubjectSeries, IngestError> {
    let doc: Value =
        serde_json::from_str(content).map_err(|e| IngestError::Format(e.to_string()))?;
    let Value::Array(items) = doc else {
        return Err(IngestError::Format(
            "top-level value is not an array".into(),
        ));
    };

    let mut records = Vec::with_capacity(items.len());
    for (index, item) in items.iter().enumerate() {
        let err = |reason: String| IngestError::Element { index, reason };
        let raw_ts = item
            .get("dateTime")
            .and_then(Value::as_str)
            .ok_or_else(|| err("missing string field `dateTime`".into()))?;
        let timestamp = NaiveDateTime::parse_from_str(raw_ts, FITBIT_TIMESTAMP)
            .map_err(|e| err(format!("dateTime `{raw_ts}`: {e}")))?;
        let activity = match item.get("value") {
            Some(Value::String(s)) => parse_activity(s.trim()),
            Some(Value::Number(n)) => parse_activity(&n.to_string()),
            Some(other) => Err(format!("value `{other}` is neither string nor number")),
            None => Err("missing field `value`".into()),
        }
        .map_err(err)?;
        records.push(MinuteRecord {
            timestamp: truncate_seconds(timestamp),
            activity,
        });
    }

    records.sort_by_key(|r| r.timestamp);
    let mut merged: Vec<MinuteRecord> = Vec::with_capacity(records.len());
    for r in records {
        match merged.last_mut() {
            Some(last) if last.timestamp == r.timestamp => last.activity += r.activity,
            _ => merged.push(r),
        }
    }

    Ok(SubjectSeries {
        subject_id: String::new(),
        device: DeviceKind::FitbitSteps,
        label: None,
        records: merged,
    })
}

/// Writes a series as a Fitbit step log with string values.
pub fn to_fitbit_json(series: &SubjectSeries) -> String {
    let items: Vec<Value> = series
        .records
        .iter()
        .map(|r| {
            serde_json::json!({
                "dateTime": r.timestamp.format(FITBIT_TIMESTAMP).to_string(),
                "value": r.activity.to_string(),
            })
        })
        .collect();
    Value::Array(items).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HEADER: &str = "timestamp,date,activity\n";

    #[test]
    fn depresjon_two_rows() {
        let text = format!(
            "{HEADER}2003-05-07 12:00:00,2003-05-07,0\n2003-05-07 12:01:00,2003-05-07,143\n"
        );
        let s = parse_depresjon_activity(&text, "condition_1", ClassLabel::Depressed).unwrap();
        assert_eq!(s.device, DeviceKind::ActiwatchCounts);
        assert_eq!(s.label, Some(ClassLabel::Depressed));
        let acts: Vec<f64> = s.records.iter().map(|r| r.activity).collect();
        assert_eq!(acts, vec![0.0, 143.0]);
    }

    #[test]
    fn depresjon_header_only_is_empty() {
        let s = parse_depresjon_activity(HEADER, "control_1", ClassLabel::Healthy).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn depresjon_negative_activity_reports_line() {
        let text = format!(
            "{HEADER}2003-05-07 12:00:00,2003-05-07,0\n2003-05-07 12:01:00,2003-05-07,-5\n"
        );
        match parse_depresjon_activity(&text, "x", ClassLabel::Healthy) {
            Err(IngestError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn depresjon_malformed_rows() {
        let wrong_cols = format!("{HEADER}2003-05-07 12:00:00,0\n");
        assert!(matches!(
            parse_depresjon_activity(&wrong_cols, "x", ClassLabel::Healthy),
            Err(IngestError::Parse { line: 2, .. })
        ));
        let bad_ts = format!("{HEADER}2003-05-07T12:00,2003-05-07,0\n");
        assert!(matches!(
            parse_depresjon_activity(&bad_ts, "x", ClassLabel::Healthy),
            Err(IngestError::Parse { line: 2, .. })
        ));
        let bad_act = format!("{HEADER}2003-05-07 12:00:00,2003-05-07,abc\n");
        assert!(parse_depresjon_activity(&bad_act, "x", ClassLabel::Healthy).is_err());
    }

    #[test]
    fn depresjon_duplicate_minute_rejected() {
        let text =
            format!("{HEADER}2003-05-07 12:00:00,2003-05-07,1\n2003-05-07 12:00:00,2003-05-07,2\n");
        assert!(matches!(
            parse_depresjon_activity(&text, "x", ClassLabel::Healthy),
            Err(IngestError::Duplicate { line: 3, .. })
        ));
    }

    #[test]
    fn depresjon_tolerates_crlf_and_quotes() {
        let text = "\"timestamp\",\"date\",\"activity\"\r\n\"2003-05-07 12:00:00\",\"2003-05-07\",\"7\"\r\n";
        let s = parse_depresjon_activity(text, "x", ClassLabel::Healthy).unwrap();
        assert_eq!(s.records[0].activity, 7.0);
    }

    #[test]
    fn fitbit_two_entries() {
        let text = r#"[{"dateTime":"01/30/23 00:00:00","value":"0"},{"dateTime":"01/30/23 00:01:00","value":"12"}]"#;
        let s = parse_fitbit_steps(text).unwrap();
        assert_eq!(s.device, DeviceKind::FitbitSteps);
        assert_eq!(s.label, None);
        let acts: Vec<f64> = s.records.iter().map(|r| r.activity).collect();
        assert_eq!(acts, vec![0.0, 12.0]);
        assert_eq!(s.records[1].timestamp.to_string(), "2023-01-30 00:01:00");
    }

    #[test]
    fn fitbit_empty_array() {
        assert!(parse_fitbit_steps("[]").unwrap().is_empty());
    }

    #[test]
    fn fitbit_same_minute_summed() {
        let text = r#"[{"dateTime":"01/30/23 08:00:00","value":3},{"dateTime":"01/30/23 08:00:30","value":"4"}]"#;
        let s = parse_fitbit_steps(text).unwrap();
        assert_eq!(s.records.len(), 1);
        assert_eq!(s.records[0].activity, 7.0);
    }

    #[test]
    fn fitbit_errors() {
        assert!(matches!(
            parse_fitbit_steps("{}"),
            Err(IngestError::Format(_))
        ));
        assert!(matches!(
            parse_fitbit_steps("not json"),
            Err(IngestError::Format(_))
        ));
        let bad = r#"[{"dateTime":"01/30/23 00:00:00","value":"1"},{"dateTime":"2023-01-30","value":"1"}]"#;
        assert!(matches!(
            parse_fitbit_steps(bad),
            Err(IngestError::Element { index: 1, .. })
        ));
        let bad_value = r#"[{"dateTime":"01/30/23 00:00:00","value":"many"}]"#;
        assert!(matches!(
            parse_fitbit_steps(bad_value),
            Err(IngestError::Element { index: 0, .. })
        ));
    }

    #[test]
    fn dataset_directory_rules() {
        let root = tempfile::tempdir().unwrap();
        fs::create_dir(root.path().join("control")).unwrap();
        fs::write(
            root.path().join("control/control_1.csv"),
            format!("{HEADER}2003-05-07 12:00:00,2003-05-07,1\n"),
        )
        .unwrap();
        let layout = DepresjonLayout::default();
        // condition directory missing
        assert!(matches!(
            load_depresjon_dataset(root.path(), &layout),
            Err(IngestError::Config(_))
        ));
        fs::create_dir(root.path().join("condition")).unwrap();
        let subjects = load_depresjon_dataset(root.path(), &layout).unwrap();
        assert_eq!(subjects.len(), 1);
        assert_eq!(subjects[0].subject_id, "control_1");
        assert_eq!(subjects[0].label, Some(ClassLabel::Healthy));
    }

    #[test]
    fn dataset_file_error_names_file() {
        let root = tempfile::tempdir().unwrap();
        fs::create_dir_all(root.path().join("condition")).unwrap();
        fs::create_dir_all(root.path().join("control")).unwrap();
        fs::write(
            root.path().join("condition/condition_9.csv"),
            "timestamp,date,activity\nbad\n",
        )
        .unwrap();
        let err = load_depresjon_dataset(root.path(), &DepresjonLayout::default()).unwrap_err();
        assert!(err.to_string().contains("condition_9.csv"), "{err}");
    }

    fn minute_stream() -> impl Strategy<Value = Vec<(i64, u32)>> {
        prop::collection::btree_map(0i64..20_000, 0u32..5_000, 0..200)
            .prop_map(|m| m.into_iter().collect())
    }

    fn series_from(kind: DeviceKind, mins: &[(i64, u32)]) -> SubjectSeries {
        let base =
            NaiveDateTime::parse_from_str("2023-01-30 00:00:00", DEPRESJON_TIMESTAMP).unwrap();
        SubjectSeries {
            subject_id: if kind == DeviceKind::FitbitSteps {
                String::new()
            } else {
                "s".into()
            },
            device: kind,
            label: (kind == DeviceKind::ActiwatchCounts).then_some(ClassLabel::Healthy),
            records: mins
                .iter()
                .map(|&(m, a)| MinuteRecord {
                    timestamp: base + chrono::Duration::minutes(m),
                    activity: a as f64 / 4.0,
                })
                .collect(),
        }
    }

    proptest! {
        #[test]
        fn depresjon_round_trip(mins in minute_stream()) {
            let s = series_from(DeviceKind::ActiwatchCounts, &mins);
            let back = parse_depresjon_activity(&to_depresjon_csv(&s), "s", ClassLabel::Healthy).unwrap();
            prop_assert_eq!(back, s);
        }

        #[test]
        fn fitbit_round_trip(mins in minute_stream()) {
            let s = series_from(DeviceKind::FitbitSteps, &mins);
            prop_assert_eq!(parse_fitbit_steps(&to_fitbit_json(&s)).unwrap(), s);
        }

        #[test]
        fn parsing_is_order_insensitive(mins in minute_stream(), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let s = series_from(DeviceKind::ActiwatchCounts, &mins);
            let csv = to_depresjon_csv(&s);
            let mut lines: Vec<&str> = csv.lines().skip(1).collect();
            lines.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let shuffled = format!("{HEADER}{}\n", lines.join("\n"));
            let back = parse_depresjon_activity(&shuffled, "s", ClassLabel::Healthy).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
