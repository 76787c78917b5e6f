use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::ingest::ClassLabel;

/// Binary confusion counts; depressed is the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub fp: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn new(tp: usize, fn_: usize, fp: usize, tn: usize) -> Self {
        ConfusionMatrix { tp, fn_, fp, tn }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fn_ + self.fp + self.tn
    }

    pub fn actual_positives(&self) -> usize {
        self.tp + self.fn_
    }

    pub fn actual_negatives(&self) -> usize {
        self.fp + self.tn
    }

    pub fn metrics(&self) -> MetricsReport {
        let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
        MetricsReport {
            sensitivity: ratio(self.tp, self.actual_positives()),
            specificity: ratio(self.tn, self.actual_negatives()),
            accuracy: ratio(self.tp + self.tn, self.total()),
        }
    }

    /// The matrix seen with the class roles swapped.
    pub fn transposed(&self) -> Self {
        ConfusionMatrix {
            tp: self.tn,
            fn_: self.fp,
            fp: self.fn_,
            tn: self.tp,
        }
    }
}

impl std::ops::Add for ConfusionMatrix {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        ConfusionMatrix {
            tp: self.tp + o.tp,
            fn_: self.fn_ + o.fn_,
            fp: self.fp + o.fp,
            tn: self.tn + o.tn,
        }
    }
}

/// `None` marks a metric whose denominator is zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub accuracy: Option<f64>,
}

pub fn confusion(
    actual: &[ClassLabel],
    predicted: &[ClassLabel],
) -> Result<ConfusionMatrix, EvalError> {
    if actual.len() != predicted.len() {
        return Err(EvalError::LengthMismatch {
            actual: actual.len(),
            predicted: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut m = ConfusionMatrix::default();
    for (a, p) in actual.iter().zip(predicted) {
        match (a.is_positive(), p.is_positive()) {
            (true, true) => m.tp += 1,
            (true, false) => m.fn_ += 1,
            (false, true) => m.fp += 1,
            (false, false) => m.tn += 1,
        }
    }
    Ok(m)
}

/// Mean and population SD over the defined values; `None` when there are none.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    /// How many iterations contributed.
    pub n: usize,
}

pub fn mean_sd(values: impl IntoIterator<Item = Option<f64>>) -> MeanSd {
    let v: Vec<f64> = values.into_iter().flatten().collect();
    if v.is_empty() {
        return MeanSd {
            mean: None,
            sd: None,
            n: 0,
        };
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    MeanSd {
        mean: Some(mean),
        sd: Some(var.sqrt()),
        n: v.len(),
    }
}
