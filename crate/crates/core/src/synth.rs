//! Seeded synthetic cohorts shaped like wrist-actigraphy recordings.
//!
//! Used by tests, benches and the acceptance suite when the public dataset
//! is not on disk. Counts are integers drawn from a gamma–Poisson mixture
//! around a per-class circadian profile; depressed subjects get a lower,
//! flatter profile with more night activity.

use std::fs;
use std::io;
use std::path::Path;

use chrono::{Duration, NaiveDate, NaiveDateTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::features::SubjectHours;
use crate::ingest::{
    to_depresjon_csv, to_fitbit_json, ClassLabel, DepresjonLayout, DeviceKind, MinuteRecord,
    SubjectSeries,
};
use crate::par::stream_seed;
use crate::timeseries::HOURS_PER_DAY;

#[derive(Clone, Debug, PartialEq)]
pub struct CohortSpec {
    pub n_depressed: usize,
    pub n_healthy: usize,
    pub min_days: usize,
    pub max_days: usize,
    /// Chance that a day loses a run of one to three hours.
    pub gap_rate: f64,
    pub start: NaiveDate,
}

impl Default for CohortSpec {
    fn default() -> Self {
        CohortSpec {
            n_depressed: 23,
            n_healthy: 32,
            min_days: 9,
            max_days: 14,
            gap_rate: 0.1,
            start: NaiveDate::from_ymd_opt(2003, 3, 10).expect("valid date"),
        }
    }
}

/// Relative activity per hour of day.
fn profile(label: ClassLabel) -> [f64; HOURS_PER_DAY] {
    let mut p = [0.0; HOURS_PER_DAY];
    for (h, v) in p.iter_mut().enumerate() {
        let h = h as f64;
        *v = match label {
            // wake around 07:00, afternoon peak, quiet nights
            ClassLabel::Healthy => {
                if !(6.5..23.0).contains(&h) {
                    0.04
                } else {
                    0.55 + 0.45 * (std::f64::consts::PI * (h - 6.5) / 16.5).sin()
                }
            }
            // late and shallow rise, restless nights
            ClassLabel::Depressed => {
                if !(8.5..24.0).contains(&h) {
                    0.14
                } else {
                    0.35 + 0.25 * (std::f64::consts::PI * (h - 8.5) / 15.5).sin()
                }
            }
        };
    }
    p
}

fn poisson_gamma(rng: &mut ChaCha8Rng, mean: f64, shape: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    let lambda = Gamma::new(shape, mean / shape)
        .expect("positive parameters")
        .sample(rng);
    if lambda <= 0.0 {
        return 0.0;
    }
    Poisson::new(lambda)
        .expect("positive rate")
        .sample(rng)
        .round()
}

fn minutes_for_days(
    rng: &mut ChaCha8Rng,
    start: NaiveDateTime,
    n_minutes: i64,
    hourly_mean: impl Fn(&mut ChaCha8Rng, usize, i64) -> f64,
    drop_hour: impl Fn(i64, usize) -> bool,
) -> Vec<MinuteRecord> {
    let mut records = Vec::with_capacity(n_minutes as usize);
    let mut current = (i64::MIN, 0.0);
    for m in 0..n_minutes {
        let ts = start + Duration::minutes(m);
        let day = (ts.date() - start.date()).num_days();
        let hour = chrono::Timelike::hour(&ts) as usize;
        if drop_hour(day, hour) {
            continue;
        }
        let key = day * 24 + hour as i64;
        if current.0 != key {
            current = (key, hourly_mean(rng, hour, day));
        }
        let activity = poisson_gamma(rng, current.1, 0.6);
        records.push(MinuteRecord {
            timestamp: ts,
            activity,
        });
    }
    records
}

/// One Actiwatch-like subject. Recording starts mid-morning on the first
/// day and stops mid-day on the last, so both edge days are partial.
pub fn subject(id: &str, label: ClassLabel, spec: &CohortSpec, seed: u64) -> SubjectSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_days = rng.random_range(spec.min_days..=spec.max_days.max(spec.min_days)) as i64;
    let start_hour = rng.random_range(9..13);
    let start = spec
        .start
        .and_hms_opt(start_hour, 0, 0)
        .expect("valid time")
        + Duration::days(rng.random_range(0..30));
    // person-level amplitude and day-to-day variation
    let amplitude = match label {
        ClassLabel::Healthy => 240.0,
        ClassLabel::Depressed => 200.0,
    } * rng.random_range(0.7..1.4);
    let day_factors: Vec<f64> = (0..=n_days + 1)
        .map(|_| rng.random_range(0.6..1.4))
        .collect();
    let gaps: Vec<Option<(usize, usize)>> = (0..=n_days + 1)
        .map(|_| {
            rng.random_bool(spec.gap_rate)
                .then(|| (rng.random_range(0..HOURS_PER_DAY), rng.random_range(1..=3)))
        })
        .collect();
    // classes overlap: each person sits somewhere between the two profiles
    let w = match label {
        ClassLabel::Healthy => rng.random_range(0.0..0.7),
        ClassLabel::Depressed => rng.random_range(0.3..1.0),
    };
    let (ph, pd) = (profile(ClassLabel::Healthy), profile(ClassLabel::Depressed));
    let p: Vec<f64> = (0..HOURS_PER_DAY)
        .map(|h| (1.0 - w) * ph[h] + w * pd[h])
        .collect();
    let n_minutes = n_days * 1440 + rng.random_range(-300..300);
    let records = minutes_for_days(
        &mut rng,
        start,
        n_minutes,
        |r, hour, day| amplitude * day_factors[day as usize] * p[hour] * r.random_range(0.6..1.4),
        |day, hour| gaps[day as usize].is_some_and(|(h0, len)| hour >= h0 && hour < h0 + len),
    );
    SubjectSeries {
        subject_id: id.to_string(),
        device: DeviceKind::ActiwatchCounts,
        label: Some(label),
        records,
    }
}

/// Depressed subjects `condition_1..` then healthy `control_1..`.
pub fn cohort(spec: &CohortSpec, seed: u64) -> Vec<SubjectSeries> {
    let dep =
        (0..spec.n_depressed).map(|i| (format!("condition_{}", i + 1), ClassLabel::Depressed));
    let ctl = (0..spec.n_healthy).map(|i| (format!("control_{}", i + 1), ClassLabel::Healthy));
    dep.chain(ctl)
        .enumerate()
        .map(|(i, (id, label))| subject(&id, label, spec, stream_seed(seed, i as u64)))
        .collect()
}

/// A step-count log of `days` whole days from midnight; hours listed in
/// `skip_hours` are left unrecorded on every day.
pub fn fitbit_subject(id: &str, days: usize, skip_hours: &[u32], seed: u64) -> SubjectSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = NaiveDate::from_ymd_opt(2021, 5, 1)
        .expect("valid date")
        .and_hms_opt(0, 0, 0)
        .expect("valid time")
        + Duration::days(rng.random_range(0..60));
    let label = if rng.random_bool(0.5) {
        ClassLabel::Healthy
    } else {
        ClassLabel::Depressed
    };
    let p = profile(label);
    let amplitude = rng.random_range(6.0..14.0);
    let records = minutes_for_days(
        &mut rng,
        start,
        days as i64 * 1440,
        |r, hour, _| amplitude * p[hour] * r.random_range(0.5..1.5),
        |_, hour| skip_hours.contains(&(hour as u32)),
    );
    SubjectSeries {
        subject_id: id.to_string(),
        device: DeviceKind::FitbitSteps,
        label: None,
        records,
    }
}

/// A new-device subject whose hourly totals are bootstrapped, hour of day by
/// hour of day, from `source`, then put through the unit change `a·x + b`
/// per minute. Every generated hour is complete.
pub fn resample_hourly_subject(
    source: &SubjectHours,
    n_days: usize,
    a: f64,
    b: f64,
    seed: u64,
) -> SubjectSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pools: Vec<Vec<f64>> = vec![Vec::new(); HOURS_PER_DAY];
    for c in source.cells.iter().filter(|c| c.minutes_present == 60) {
        pools[c.hour as usize].push(c.total);
    }
    let start = NaiveDate::from_ymd_opt(2022, 1, 3)
        .expect("valid date")
        .and_hms_opt(0, 0, 0)
        .expect("valid time");
    let mut records = Vec::with_capacity(n_days * 1440);
    for d in 0..n_days {
        for (h, pool) in pools.iter().enumerate() {
            let total = if pool.is_empty() {
                0.0
            } else {
                pool[rng.random_range(0..pool.len())]
            };
            let base = start + Duration::days(d as i64) + Duration::hours(h as i64);
            for m in 0..60 {
                records.push(MinuteRecord {
                    timestamp: base + Duration::minutes(m),
                    activity: a * (total / 60.0) + b,
                });
            }
        }
    }
    SubjectSeries {
        subject_id: format!("{}_resampled", source.subject_id),
        device: DeviceKind::FitbitSteps,
        label: source.label,
        records,
    }
}

fn write_tree(
    root: &Path,
    subjects: &[SubjectSeries],
    ext: &str,
    encode: fn(&SubjectSeries) -> String,
) -> io::Result<()> {
    let layout = DepresjonLayout::default();
    for dir in [&layout.condition_dir, &layout.control_dir] {
        fs::create_dir_all(root.join(dir))?;
    }
    for s in subjects {
        let dir = match s.label {
            Some(ClassLabel::Depressed) => &layout.condition_dir,
            _ => &layout.control_dir,
        };
        fs::write(
            root.join(dir).join(format!("{}.{ext}", s.subject_id)),
            encode(s),
        )?;
    }
    Ok(())
}

/// Writes `subjects` as a Depresjon-style tree of CSV files under `root`.
pub fn write_depresjon_dir(root: &Path, subjects: &[SubjectSeries]) -> io::Result<()> {
    write_tree(root, subjects, "csv", to_depresjon_csv)
}

/// Same tree with one step-log JSON file per subject.
pub fn write_fitbit_dir(root: &Path, subjects: &[SubjectSeries]) -> io::Result<()> {
    write_tree(root, subjects, "json", to_fitbit_json)
}

pub fn write_fitbit_file(path: &Path, series: &SubjectSeries) -> io::Result<()> {
    fs::write(path, to_fitbit_json(series))
}
