use serde::{Deserialize, Serialize};

use super::metrics::MeanSd;
use super::protocols::EvalSummary;

/// One line of the summary table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub protocol: String,
    pub model: String,
    pub sensitivity: MeanSd,
    pub specificity: MeanSd,
    pub accuracy: MeanSd,
    pub iterations: usize,
}

impl From<&EvalSummary> for SummaryRow {
    fn from(s: &EvalSummary) -> Self {
        SummaryRow {
            protocol: s.protocol.as_str().to_string(),
            model: s.model.as_str().to_string(),
            sensitivity: s.sensitivity,
            specificity: s.specificity,
            accuracy: s.accuracy,
            iterations: s.iterations.len(),
        }
    }
}

fn cell(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| format!("{v:.4}"))
}

/// Per-iteration rows for every summary given; undefined metrics print `NA`.
pub fn iterations_csv(seed: u64, summaries: &[&EvalSummary]) -> String {
    let mut out = String::from(
        "protocol,model,seed,iteration,id,n_test,tp,fn,fp,tn,sensitivity,specificity,accuracy\n",
    );
    for s in summaries {
        for it in &s.iterations {
            let c = it.confusion;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                s.protocol.as_str(),
                s.model.as_str(),
                seed,
                it.index,
                it.id,
                it.n_test,
                c.tp,
                c.fn_,
                c.fp,
                c.tn,
                cell(it.metrics.sensitivity),
                cell(it.metrics.specificity),
                cell(it.metrics.accuracy),
            ));
        }
    }
    out
}

/// Mean and SD per metric, one row per (protocol, model).
pub fn summary_csv(summaries: &[&EvalSummary]) -> String {
    let mut out = String::from(
        "protocol,model,iterations,sensitivity_mean,sensitivity_sd,specificity_mean,specificity_sd,accuracy_mean,accuracy_sd\n",
    );
    for s in summaries {
        let r = SummaryRow::from(*s);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.protocol,
            r.model,
            r.iterations,
            cell(r.sensitivity.mean),
            cell(r.sensitivity.sd),
            cell(r.specificity.mean),
            cell(r.specificity.sd),
            cell(r.accuracy.mean),
            cell(r.accuracy.sd),
        ));
    }
    out
}

/// Aligned plain-text table for terminals.
pub fn summary_text(summaries: &[&EvalSummary]) -> String {
    let pm = |m: MeanSd| match (m.mean, m.sd) {
        (Some(a), Some(b)) => format!("{a:.2} ± {b:.2}"),
        _ => "NA".to_string(),
    };
    let mut out = format!(
        "{:<12} {:<8} {:>14} {:>14} {:>14}\n",
        "protocol", "model", "sensitivity", "specificity", "accuracy"
    );
    for s in summaries {
        out.push_str(&format!(
            "{:<12} {:<8} {:>14} {:>14} {:>14}\n",
            s.protocol.as_str(),
            s.model.as_str(),
            pm(s.sensitivity),
            pm(s.specificity),
            pm(s.accuracy),
        ));
        if !s.skipped.is_empty() {
            out.push_str(&format!("  skipped: {}\n", s.skipped.join(", ")));
        }
    }
    out
}
