//! Minute streams to hourly day grids, with the day-drop and neighbour
//! imputation rules.

use chrono::{NaiveDate, Timelike};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{ClassLabel, SubjectSeries};

pub const HOURS_PER_DAY: usize = 24;

/// A day is kept when at least this many of its hours hold data.
pub const MIN_VALID_HOURS: usize = 22;

#[derive(Debug, Error)]
pub enum TimeseriesError {
    #[error("day {date} of `{subject_id}` has only {hours_present} hours present; at least {MIN_VALID_HOURS} required")]
    InvalidDay {
        subject_id: String,
        date: NaiveDate,
        hours_present: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HourCell {
    pub date: NaiveDate,
    pub hour: u8,
    pub total: f64,
    pub minutes_present: u16,
}

/// Sums minute activity per (date, hour). Input must be sorted ascending.
pub fn hourly_totals(series: &SubjectSeries) -> Vec<HourCell> {
    let mut cells: Vec<HourCell> = Vec::new();
    for r in &series.records {
        let date = r.timestamp.date();
        let hour = r.timestamp.hour() as u8;
        match cells.last_mut() {
            Some(c) if c.date == date && c.hour == hour => {
                c.total += r.activity;
                c.minutes_present += 1;
            }
            _ => cells.push(HourCell {
                date,
                hour,
                total: r.activity,
                minutes_present: 1,
            }),
        }
    }
    cells
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DayRecord {
    pub subject_id: String,
    pub date: NaiveDate,
    pub hours: [Option<f64>; HOURS_PER_DAY],
    pub label: Option<ClassLabel>,
}

impl DayRecord {
    pub fn hours_present(&self) -> usize {
        self.hours.iter().filter(|h| h.is_some()).count()
    }

    pub fn is_valid(&self) -> bool {
        self.hours_present() >= MIN_VALID_HOURS
    }
}

/// Groups hour cells into one record per calendar date, sorted by date.
pub fn segment_days(
    cells: &[HourCell],
    subject_id: &str,
    label: Option<ClassLabel>,
) -> Vec<DayRecord> {
    let mut sorted: Vec<&HourCell> = cells.iter().collect();
    sorted.sort_by_key(|c| (c.date, c.hour));

    let mut days: Vec<DayRecord> = Vec::new();
    for c in sorted {
        if days.last().map(|d| d.date) != Some(c.date) {
            days.push(DayRecord {
                subject_id: subject_id.to_string(),
                date: c.date,
                hours: [None; HOURS_PER_DAY],
                label,
            });
        }
        let day = days.last_mut().expect("pushed above");
        let slot = &mut day.hours[c.hour as usize];
        *slot = Some(slot.unwrap_or(0.0) + c.total);
    }
    days
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompleteDay {
    pub subject_id: String,
    pub date: NaiveDate,
    pub hours: [f64; HOURS_PER_DAY],
    pub label: Option<ClassLabel>,
    /// Ascending hour indices that were filled in.
    pub imputed_hours: Vec<u8>,
}

impl CompleteDay {
    pub fn map_hours(&self, f: impl Fn(f64) -> f64) -> CompleteDay {
        CompleteDay {
            hours: self.hours.map(f),
            ..self.clone()
        }
    }
}

/// Fills each absent hour with the mean of the nearest present hours on
/// either side within the same day, or the single neighbour at the day's
/// edges.
pub fn impute_day(day: &DayRecord) -> Result<CompleteDay, TimeseriesError> {
    if !day.is_valid() {
        return Err(TimeseriesError::InvalidDay {
            subject_id: day.subject_id.clone(),
            date: day.date,
            hours_present: day.hours_present(),
        });
    }

    let mut hours = [0.0; HOURS_PER_DAY];
    let mut imputed_hours = Vec::new();
    for h in 0..HOURS_PER_DAY {
        hours[h] = match day.hours[h] {
            Some(v) => v,
            None => {
                let before = day.hours[..h].iter().rev().find_map(|v| *v);
                let after = day.hours[h + 1..].iter().find_map(|v| *v);
                imputed_hours.push(h as u8);
                match (before, after) {
                    (Some(b), Some(a)) => (b + a) / 2.0,
                    (Some(v), None) | (None, Some(v)) => v,
                    (None, None) => unreachable!("a valid day has present hours"),
                }
            }
        };
    }

    Ok(CompleteDay {
        subject_id: day.subject_id.clone(),
        date: day.date,
        hours,
        label: day.label,
        imputed_hours,
    })
}

/// Segments, drops invalid days and imputes the rest.
pub fn complete_days(
    cells: &[HourCell],
    subject_id: &str,
    label: Option<ClassLabel>,
) -> Vec<CompleteDay> {
    segment_days(cells, subject_id, label)
        .iter()
        .filter(|d| d.is_valid())
        .map(|d| impute_day(d).expect("filtered to valid days"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{DeviceKind, MinuteRecord};
    use chrono::NaiveDateTime;

    fn ts(s: &str) -> NaiveDateTime {
        NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S").unwrap()
    }

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn series(records: Vec<MinuteRecord>) -> SubjectSeries {
        SubjectSeries {
            subject_id: "s".into(),
            device: DeviceKind::ActiwatchCounts,
            label: None,
            records,
        }
    }

    fn day_with(hours: [Option<f64>; 24]) -> DayRecord {
        DayRecord {
            subject_id: "s".into(),
            date: date("2020-01-01"),
            hours,
            label: None,
        }
    }

    #[test]
    fn full_hour_of_ones() {
        let base = ts("2020-01-01 13:00:00");
        let recs = (0..60)
            .map(|m| MinuteRecord {
                timestamp: base + chrono::Duration::minutes(m),
                activity: 1.0,
            })
            .collect();
        let cells = hourly_totals(&series(recs));
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].hour, 13);
        assert_eq!(cells[0].total, 60.0);
        assert_eq!(cells[0].minutes_present, 60);
    }

    #[test]
    fn disjoint_hours() {
        let recs = vec![
            MinuteRecord {
                timestamp: ts("2020-01-01 09:05:00"),
                activity: 10.0,
            },
            MinuteRecord {
                timestamp: ts("2020-01-01 10:59:00"),
                activity: 5.0,
            },
        ];
        let cells = hourly_totals(&series(recs));
        let totals: Vec<f64> = cells.iter().map(|c| c.total).collect();
        assert_eq!(totals, vec![10.0, 5.0]);
        assert!(hourly_totals(&series(vec![])).is_empty());
    }

    fn cells_on(d: &str, hours: impl IntoIterator<Item = u8>) -> Vec<HourCell> {
        hours
            .into_iter()
            .map(|h| HourCell {
                date: date(d),
                hour: h,
                total: h as f64,
                minutes_present: 60,
            })
            .collect()
    }

    #[test]
    fn segmentation_and_validity() {
        let mut cells = cells_on("2020-01-01", 0..24);
        cells.extend(cells_on("2020-01-02", 0..21));
        let days = segment_days(&cells, "s", Some(ClassLabel::Healthy));
        assert_eq!(days.len(), 2);
        assert_eq!(days[0].hours_present(), 24);
        assert!(days[0].is_valid());
        assert_eq!(days[1].hours_present(), 21);
        assert!(!days[1].is_valid());
        assert_eq!(days[0].label, Some(ClassLabel::Healthy));
    }

    #[test]
    fn interior_gap_mean() {
        let mut hours = [Some(1.0); 24];
        hours[9] = Some(100.0);
        hours[10] = None;
        hours[11] = Some(200.0);
        let c = impute_day(&day_with(hours)).unwrap();
        assert_eq!(c.hours[10], 150.0);
        assert_eq!(c.imputed_hours, vec![10]);
    }

    #[test]
    fn boundary_gap_uses_single_neighbour() {
        let mut hours = [Some(1.0); 24];
        hours[0] = None;
        hours[1] = Some(40.0);
        assert_eq!(impute_day(&day_with(hours)).unwrap().hours[0], 40.0);
    }

    #[test]
    fn complete_day_is_identity() {
        let hours: [Option<f64>; 24] = std::array::from_fn(|h| Some(h as f64 * 3.0));
        let c = impute_day(&day_with(hours)).unwrap();
        assert!(c.imputed_hours.is_empty());
        for h in 0..24 {
            assert_eq!(Some(c.hours[h]), hours[h]);
        }
    }

    #[test]
    fn invalid_day_is_contract_violation() {
        let mut hours = [Some(1.0); 24];
        hours[3] = None;
        hours[4] = None;
        hours[5] = None;
        assert!(matches!(
            impute_day(&day_with(hours)),
            Err(TimeseriesError::InvalidDay {
                hours_present: 21,
                ..
            })
        ));
    }

    /// Reference fill: scan outward for the closest present neighbour on
    /// each side of every absent hour.
    fn oracle_fill(hours: &[Option<f64>; 24]) -> [f64; 24] {
        let mut out = [0.0; 24];
        for h in 0..24 {
            out[h] = match hours[h] {
                Some(v) => v,
                None => {
                    let mut left = None;
                    let mut right = None;
                    for d in 1..24 {
                        if left.is_none() && h >= d {
                            left = hours[h - d];
                        }
                        if right.is_none() && h + d < 24 {
                            right = hours[h + d];
                        }
                    }
                    match (left, right) {
                        (Some(l), Some(r)) => (l + r) / 2.0,
                        (Some(v), None) | (None, Some(v)) => v,
                        _ => panic!("no neighbours"),
                    }
                }
            };
        }
        out
    }

    #[test]
    fn exhaustive_masks_up_to_three_missing() {
        let base: [f64; 24] = std::array::from_fn(|h| ((h * 37 + 11) % 50) as f64 * 2.5);
        let mut checked = [0usize; 4];
        for mask in 0u32..(1 << 24) {
            let k = mask.count_ones() as usize;
            if k > 3 {
                continue;
            }
            let hours: [Option<f64>; 24] =
                std::array::from_fn(|h| (mask & (1 << h) == 0).then_some(base[h]));
            let day = day_with(hours);
            checked[k] += 1;
            if k == 3 {
                assert!(!day.is_valid());
                assert!(impute_day(&day).is_err());
                continue;
            }
            assert!(day.is_valid());
            let c = impute_day(&day).unwrap();
            assert_eq!(c.hours, oracle_fill(&hours));
            assert_eq!(c.imputed_hours.len(), k);
        }
        assert_eq!(checked, [1, 24, 276, 2024]);
    }
}
