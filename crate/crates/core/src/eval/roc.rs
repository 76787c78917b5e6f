use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::ingest::ClassLabel;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores `>= threshold` are called positive. The first point uses +∞.
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// From (0, 0) to (1, 1), thresholds descending.
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

impl RocCurve {
    /// `fpr,tpr,threshold` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fpr,tpr,threshold\n");
        for p in &self.points {
            out.push_str(&format!("{:.6},{:.6},{}\n", p.fpr, p.tpr, p.threshold));
        }
        out
    }
}

/// ROC curve with one step per distinct score; tied scores move both
/// rates at once, and the trapezoidal area counts them as half.
pub fn roc_auc(actual: &[ClassLabel], scores: &[f64]) -> Result<RocCurve, EvalError> {
    if actual.len() != scores.len() {
        return Err(EvalError::LengthMismatch {
            actual: actual.len(),
            predicted: scores.len(),
        });
    }
    let pos = actual.iter().filter(|l| l.is_positive()).count();
    let neg = actual.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(EvalError::SingleClass);
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(EvalError::NanScore);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        let (prev_tpr, prev_fpr) = (tp as f64 / pos as f64, fp as f64 / neg as f64);
        while i < order.len() && scores[order[i]] == threshold {
            if actual[order[i]].is_positive() {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let (tpr, fpr) = (tp as f64 / pos as f64, fp as f64 / neg as f64);
        auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        points.push(RocPoint {
            fpr,
            tpr,
            threshold,
        });
    }
    Ok(RocCurve { points, auc })
}
