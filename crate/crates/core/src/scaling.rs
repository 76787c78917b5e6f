//! Per-device normalisation of hourly activity and Q-Q diagnostics.
//!
//! Devices report activity in unrelated units (Actiwatch counts, Fitbit
//! steps). Each device's hourly totals are scaled against their own
//! distribution before features are built, which is what lets a model
//! trained on one device score data from another.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScalingError {
    #[error("cannot fit a scaler on an empty sample")]
    EmptySample,
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error("quantile levels must lie in (0, 1) and be strictly increasing")]
    BadLevels,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalerKind {
    MinMax,
    Robust,
}

impl fmt::Display for ScalerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalerKind::MinMax => "minmax",
            ScalerKind::Robust => "robust",
        })
    }
}

impl FromStr for ScalerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "minmax" => Ok(ScalerKind::MinMax),
            "robust" => Ok(ScalerKind::Robust),
            other => Err(format!(
                "unknown scaler `{other}` (expected minmax or robust)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalerParams {
    MinMax { min: f64, max: f64 },
    Robust { median: f64, iqr: f64 },
}

impl ScalerParams {
    pub fn kind(&self) -> ScalerKind {
        match self {
            ScalerParams::MinMax { .. } => ScalerKind::MinMax,
            ScalerParams::Robust { .. } => ScalerKind::Robust,
        }
    }

    /// Transforms one value. Out-of-range inputs are not clamped.
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            ScalerParams::MinMax { min, max } => {
                if max == min {
                    0.0
                } else {
                    (x - min) / (max - min)
                }
            }
            ScalerParams::Robust { median, iqr } => {
                if iqr == 0.0 {
                    x - median
                } else {
                    (x - median) / iqr
                }
            }
        }
    }
}

pub fn apply_scaler(params: &ScalerParams, x: f64) -> f64 {
    params.apply(x)
}

fn sorted_copy(values: &[f64]) -> Result<Vec<f64>, ScalingError> {
    if values.is_empty() {
        return Err(ScalingError::EmptySample);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ScalingError::NonFinite);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Quantile of an ascending, non-empty sample by linear interpolation
/// between the closest ranks (position `q·(n−1)`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi || frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

pub fn fit_scaler(kind: ScalerKind, values: &[f64]) -> Result<ScalerParams, ScalingError> {
    let sorted = sorted_copy(values)?;
    Ok(match kind {
        ScalerKind::MinMax => ScalerParams::MinMax {
            min: sorted[0],
            max: sorted[sorted.len() - 1],
        },
        ScalerKind::Robust => ScalerParams::Robust {
            median: quantile_sorted(&sorted, 0.5),
            iqr: quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25),
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QQSeries {
    pub levels: Vec<f64>,
    /// `(quantile of sample a, quantile of sample b)` per level.
    pub points: Vec<(f64, f64)>,
}

/// Levels 0.01, 0.02, …, 0.99.
pub fn default_levels() -> Vec<f64> {
    (1..100).map(|i| i as f64 / 100.0).collect()
}

pub fn qq_points(
    sample_a: &[f64],
    sample_b: &[f64],
    levels: &[f64],
) -> Result<QQSeries, ScalingError> {
    let a = sorted_copy(sample_a)?;
    let b = sorted_copy(sample_b)?;
    let in_range = levels.iter().all(|&q| q > 0.0 && q < 1.0);
    let increasing = levels.windows(2).all(|w| w[0] < w[1]);
    if !in_range || !increasing {
        return Err(ScalingError::BadLevels);
    }
    Ok(QQSeries {
        levels: levels.to_vec(),
        points: levels
            .iter()
            .map(|&q| (quantile_sorted(&a, q), quantile_sorted(&b, q)))
            .collect(),
    })
}

impl QQSeries {
    /// Pearson correlation of the two coordinate sequences. Note this is
    /// blind to per-sample affine rescaling.
    pub fn pearson(&self) -> Option<f64> {
        if self.points.len() < 2 {
            return None;
        }
        let (mx, my) = self.means();
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for &(x, y) in &self.points {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
            syy += (y - my) * (y - my);
        }
        (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
    }

    /// Lin's concordance correlation: agreement of the points with the
    /// identity line `y = x`, 1 only when the quantiles coincide.
    pub fn concordance(&self) -> Option<f64> {
        if self.points.len() < 2 {
            return None;
        }
        let n = self.points.len() as f64;
        let (mx, my) = self.means();
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for &(x, y) in &self.points {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
            syy += (y - my) * (y - my);
        }
        let denom = sxx / n + syy / n + (mx - my) * (mx - my);
        (denom > 0.0).then(|| 2.0 * (sxy / n) / denom)
    }

    fn means(&self) -> (f64, f64) {
        let n = self.points.len() as f64;
        let (sx, sy) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
        (sx / n, sy / n)
    }

    /// `level,qa,qb` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,qa,qb\n");
        for (q, (a, b)) in self.levels.iter().zip(&self.points) {
            out.push_str(&format!("{q:.2},{a},{b}\n"));
        }
        out
    }
}
