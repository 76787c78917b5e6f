use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{confusion, mean_sd, ConfusionMatrix, MeanSd, MetricsReport};
use super::roc::{roc_auc, RocCurve};
use super::EvalError;
use crate::features::{
    build_dataset_from_hours, featurize_single, featurize_with, hours_for_all, Dataset,
    HourlyScaling, SubjectHours,
};
use crate::ingest::{ClassLabel, SubjectSeries};
use crate::model::{
    fit_dummy, fit_forest, fit_forest_rows, label_for_score, predict_dummy, ForestConfig,
};
use crate::par::{self, stream_seed};
use crate::scaling::ScalerKind;

// RNG stream tags under the protocol seed
const FOLD_STREAM: u64 = 0;
const FOREST_STREAM: u64 = 1;
const DUMMY_STREAM: u64 = 2;
const PAIR_STREAM: u64 = 3;

/// Pairs whose held-out forest accuracy falls below this are flagged.
pub const POOR_PAIR_ACCURACY: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    KFold,
    PairLoocv,
    Transfer,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::KFold => "kfold",
            Protocol::PairLoocv => "pair_loocv",
            Protocol::Transfer => "transfer",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Forest,
    Dummy,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Forest => "forest",
            ModelKind::Dummy => "dummy",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationResult {
    pub index: usize,
    /// Fold number, pair `dep+healthy`, or subject id.
    pub id: String,
    pub n_test: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub protocol: Protocol,
    pub model: ModelKind,
    pub iterations: Vec<IterationResult>,
    /// Iterations left out because they had nothing to test.
    pub skipped: Vec<String>,
    pub sensitivity: MeanSd,
    pub specificity: MeanSd,
    pub accuracy: MeanSd,
}

impl EvalSummary {
    pub fn from_iterations(
        protocol: Protocol,
        model: ModelKind,
        mut iterations: Vec<IterationResult>,
        skipped: Vec<String>,
    ) -> Self {
        iterations.sort_by_key(|it| it.index);
        EvalSummary {
            protocol,
            model,
            sensitivity: mean_sd(iterations.iter().map(|i| i.metrics.sensitivity)),
            specificity: mean_sd(iterations.iter().map(|i| i.metrics.specificity)),
            accuracy: mean_sd(iterations.iter().map(|i| i.metrics.accuracy)),
            iterations,
            skipped,
        }
    }

    pub fn pooled_confusion(&self) -> ConfusionMatrix {
        self.iterations
            .iter()
            .fold(ConfusionMatrix::default(), |acc, it| acc + it.confusion)
    }
}

fn iteration(
    index: usize,
    id: String,
    actual: &[ClassLabel],
    predicted: &[ClassLabel],
) -> Result<IterationResult, EvalError> {
    let confusion = confusion(actual, predicted)?;
    Ok(IterationResult {
        index,
        id,
        n_test: actual.len(),
        metrics: confusion.metrics(),
        confusion,
    })
}

/// Splits row indices into `k` folds, stratified by class.
///
/// Each class is shuffled with the seeded RNG and dealt round-robin; the
/// second class continues dealing where the first stopped so fold sizes
/// stay within one row of each other.
pub fn stratified_kfold(
    labels: &[ClassLabel],
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, EvalError> {
    if k < 2 {
        return Err(EvalError::BadK(k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, FOLD_STREAM));
    let mut folds = vec![Vec::new(); k];
    let mut slot = 0;
    for class in [ClassLabel::Healthy, ClassLabel::Depressed] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(EvalError::ClassTooSmall {
                class,
                count: members.len(),
                k,
            });
        }
        members.shuffle(&mut rng);
        for i in members {
            folds[slot % k].push(i);
            slot += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub k: usize,
    pub seed: u64,
    pub forest: EvalSummary,
    pub dummy: EvalSummary,
    /// ROC over all held-out scores concatenated across folds.
    pub pooled_roc: RocCurve,
    /// Per-fold ROC; `None` for a fold holding a single class.
    pub fold_rocs: Vec<Option<RocCurve>>,
}

pub fn run_cv5(data: &Dataset, config: &ForestConfig, seed: u64) -> Result<CvOutcome, EvalError> {
    run_kfold(data, 5, config, seed)
}

/// Stratified k-fold over day rows (days of one subject may land in
/// different folds). Forest and dummy are trained on the same folds.
pub fn run_kfold(
    data: &Dataset,
    k: usize,
    config: &ForestConfig,
    seed: u64,
) -> Result<CvOutcome, EvalError> {
    let labels = data.labels();
    let folds = stratified_kfold(&labels, k, seed)?;
    let rows: Vec<Vec<f64>> = data.rows.iter().map(|r| r.values.clone()).collect();

    let per_fold = par::map_indexed(k, config.exec, |f| -> Result<_, EvalError> {
        let test = &folds[f];
        let train: Vec<usize> = (0..k)
            .filter(|&g| g != f)
            .flat_map(|g| folds[g].iter().copied())
            .collect();
        let train_rows: Vec<Vec<f64>> = train.iter().map(|&i| rows[i].clone()).collect();
        let train_labels: Vec<ClassLabel> = train.iter().map(|&i| labels[i]).collect();

        let cfg = config.with_seed(stream_seed(stream_seed(seed, FOREST_STREAM), f as u64));
        let forest = fit_forest_rows(&train_rows, &train_labels, &data.schema, &cfg)?;
        let scores = test
            .iter()
            .map(|&i| forest.score_values(&rows[i]))
            .collect::<Result<Vec<f64>, _>>()?;
        let actual: Vec<ClassLabel> = test.iter().map(|&i| labels[i]).collect();
        let predicted: Vec<ClassLabel> = scores.iter().map(|&s| label_for_score(s)).collect();

        let dummy_seed = stream_seed(stream_seed(seed, DUMMY_STREAM), f as u64);
        let dummy = fit_dummy(&train_labels, dummy_seed)?;
        let dummy_pred = predict_dummy(
            &dummy,
            test.len(),
            &mut ChaCha8Rng::seed_from_u64(dummy_seed),
        );

        let id = format!("fold{}", f + 1);
        Ok((
            iteration(f, id.clone(), &actual, &predicted)?,
            iteration(f, id, &actual, &dummy_pred)?,
            roc_auc(&actual, &scores).ok(),
            actual,
            scores,
        ))
    });

    let mut forest_its = Vec::with_capacity(k);
    let mut dummy_its = Vec::with_capacity(k);
    let mut fold_rocs = Vec::with_capacity(k);
    let mut all_actual = Vec::new();
    let mut all_scores = Vec::new();
    for r in per_fold {
        let (fi, di, roc, actual, scores) = r?;
        forest_its.push(fi);
        dummy_its.push(di);
        fold_rocs.push(roc);
        all_actual.extend(actual);
        all_scores.extend(scores);
    }

    Ok(CvOutcome {
        k,
        seed,
        forest: EvalSummary::from_iterations(
            Protocol::KFold,
            ModelKind::Forest,
            forest_its,
            vec![],
        ),
        dummy: EvalSummary::from_iterations(Protocol::KFold, ModelKind::Dummy, dummy_its, vec![]),
        pooled_roc: roc_auc(&all_actual, &all_scores)?,
        fold_rocs,
    })
}

/// Disjoint (depressed, healthy) pairs by seeded random matching. The
/// default count is the size of the smaller class.
pub fn make_pairs<'a>(
    subjects: impl IntoIterator<Item = (&'a str, ClassLabel)>,
    seed: u64,
    max_pairs: Option<usize>,
) -> Result<Vec<(String, String)>, EvalError> {
    let mut depressed = Vec::new();
    let mut healthy = Vec::new();
    for (id, label) in subjects {
        match label {
            ClassLabel::Depressed => depressed.push(id.to_string()),
            ClassLabel::Healthy => healthy.push(id.to_string()),
        }
    }
    if depressed.is_empty() || healthy.is_empty() {
        return Err(EvalError::TooFewSubjects {
            need: 1,
            depressed: depressed.len(),
            healthy: healthy.len(),
        });
    }
    depressed.sort();
    healthy.sort();
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, PAIR_STREAM));
    depressed.shuffle(&mut rng);
    healthy.shuffle(&mut rng);
    let count = depressed
        .len()
        .min(healthy.len())
        .min(max_pairs.unwrap_or(usize::MAX));
    Ok(depressed.into_iter().zip(healthy).take(count).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairLoocvOptions {
    pub scaling: HourlyScaling,
    pub max_pairs: Option<usize>,
    pub poor_threshold: f64,
}

impl Default for PairLoocvOptions {
    fn default() -> Self {
        PairLoocvOptions {
            scaling: HourlyScaling::Fit(ScalerKind::Robust),
            max_pairs: None,
            poor_threshold: POOR_PAIR_ACCURACY,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDetail {
    pub index: usize,
    pub depressed_id: String,
    pub healthy_id: String,
    pub n_test: usize,
    pub forest_accuracy: Option<f64>,
    pub dummy_accuracy: Option<f64>,
    pub poor: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairLoocvOutcome {
    pub seed: u64,
    pub forest: EvalSummary,
    pub dummy: EvalSummary,
    pub pairs: Vec<PairDetail>,
    /// Over all held-out day scores; `None` if they hold one class only.
    pub pooled_roc: Option<RocCurve>,
}

impl PairLoocvOutcome {
    pub fn poor_pairs(&self) -> usize {
        self.pairs.iter().filter(|p| p.poor).count()
    }
}

pub fn run_pair_loocv(
    subjects: &[SubjectSeries],
    config: &ForestConfig,
    seed: u64,
    options: &PairLoocvOptions,
) -> Result<PairLoocvOutcome, EvalError> {
    let hours = hours_for_all(subjects, config.exec);
    run_pair_loocv_hours(&hours, config, seed, options)
}

/// Holds out one depressed and one healthy subject per iteration. The
/// scaler is refitted on the remaining subjects and the held pair is
/// scaled with it.
pub fn run_pair_loocv_hours(
    subjects: &[SubjectHours],
    config: &ForestConfig,
    seed: u64,
    options: &PairLoocvOptions,
) -> Result<PairLoocvOutcome, EvalError> {
    let mut labelled = Vec::with_capacity(subjects.len());
    for s in subjects {
        let label = s
            .label
            .ok_or_else(|| EvalError::Unlabeled(s.subject_id.clone()))?;
        labelled.push((s.subject_id.as_str(), label));
    }
    let n_dep = labelled.iter().filter(|(_, l)| l.is_positive()).count();
    let n_healthy = labelled.len() - n_dep;
    if n_dep < 2 || n_healthy < 2 {
        return Err(EvalError::TooFewSubjects {
            need: 2,
            depressed: n_dep,
            healthy: n_healthy,
        });
    }
    let pairs = make_pairs(labelled.iter().copied(), seed, options.max_pairs)?;

    let per_pair = par::map_indexed(pairs.len(), config.exec, |p| -> Result<_, EvalError> {
        let (dep, healthy) = &pairs[p];
        let train: Vec<SubjectHours> = subjects
            .iter()
            .filter(|s| &s.subject_id != dep && &s.subject_id != healthy)
            .cloned()
            .collect();
        let data = build_dataset_from_hours(&train, options.scaling, par::Exec::Sequential)?;
        let cfg = config.with_seed(stream_seed(stream_seed(seed, FOREST_STREAM), p as u64));
        let forest = fit_forest(&data, &cfg)?;

        let test: Vec<_> = subjects
            .iter()
            .filter(|s| &s.subject_id == dep || &s.subject_id == healthy)
            .flat_map(|s| featurize_with(s, data.scaler.as_ref(), &data.schema))
            .collect();
        if test.is_empty() {
            return Ok(None);
        }
        let actual: Vec<ClassLabel> = test
            .iter()
            .map(|r| r.label.expect("labelled subject"))
            .collect();
        let scores = test
            .iter()
            .map(|r| forest.score_values(&r.values))
            .collect::<Result<Vec<_>, _>>()?;
        let predicted: Vec<ClassLabel> = scores.iter().map(|&s| label_for_score(s)).collect();

        let dummy_seed = stream_seed(stream_seed(seed, DUMMY_STREAM), p as u64);
        let dummy = fit_dummy(&data.labels(), dummy_seed)?;
        let dummy_pred = predict_dummy(
            &dummy,
            test.len(),
            &mut ChaCha8Rng::seed_from_u64(dummy_seed),
        );

        let id = format!("{dep}+{healthy}");
        Ok(Some((
            iteration(p, id.clone(), &actual, &predicted)?,
            iteration(p, id, &actual, &dummy_pred)?,
            actual,
            scores,
        )))
    });

    let mut forest_its = Vec::new();
    let mut dummy_its = Vec::new();
    let mut details = Vec::new();
    let mut skipped = Vec::new();
    let mut all_actual = Vec::new();
    let mut all_scores = Vec::new();
    for (p, r) in per_pair.into_iter().enumerate() {
        let (dep, healthy) = &pairs[p];
        let (f, d, actual, scores) = match r? {
            Some(x) => x,
            None => {
                skipped.push(format!("{dep}+{healthy}"));
                continue;
            }
        };
        details.push(PairDetail {
            index: p,
            depressed_id: dep.clone(),
            healthy_id: healthy.clone(),
            n_test: f.n_test,
            forest_accuracy: f.metrics.accuracy,
            dummy_accuracy: d.metrics.accuracy,
            poor: f
                .metrics
                .accuracy
                .is_some_and(|a| a < options.poor_threshold),
        });
        forest_its.push(f);
        dummy_its.push(d);
        all_actual.extend(actual);
        all_scores.extend(scores);
    }

    Ok(PairLoocvOutcome {
        pooled_roc: roc_auc(&all_actual, &all_scores).ok(),
        seed,
        forest: EvalSummary::from_iterations(
            Protocol::PairLoocv,
            ModelKind::Forest,
            forest_its,
            skipped.clone(),
        ),
        dummy: EvalSummary::from_iterations(
            Protocol::PairLoocv,
            ModelKind::Dummy,
            dummy_its,
            skipped,
        ),
        pairs: details,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DayPrediction {
    pub date: NaiveDate,
    pub score: f64,
    pub label: ClassLabel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubjectPredictions {
    pub subject_id: String,
    pub actual: ClassLabel,
    pub days: Vec<DayPrediction>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferOutcome {
    pub summary: EvalSummary,
    pub subjects: Vec<SubjectPredictions>,
    /// Rows the forest was trained on.
    pub training_rows: usize,
    /// Over all scored days; `None` when every subject shares one class.
    pub pooled_roc: Option<RocCurve>,
}

/// Trains one forest on the whole secondary cohort and scores each primary
/// subject after scaling that subject against its own hourly totals.
pub fn run_transfer_eval(
    secondary: &[SubjectSeries],
    primary: &[SubjectSeries],
    config: &ForestConfig,
    scaler_kind: ScalerKind,
) -> Result<TransferOutcome, EvalError> {
    let hours = hours_for_all(secondary, config.exec);
    let data = build_dataset_from_hours(&hours, HourlyScaling::Fit(scaler_kind), config.exec)?;
    let forest = fit_forest(&data, config)?;

    let per_subject = par::map_slice(primary, config.exec, |s| -> Result<_, EvalError> {
        let actual = s
            .label
            .ok_or_else(|| EvalError::Unlabeled(s.subject_id.clone()))?;
        if s.is_empty() {
            return Ok(None);
        }
        let rows = featurize_single(s, scaler_kind)?;
        if rows.is_empty() {
            return Ok(None);
        }
        let days = rows
            .iter()
            .map(|r| {
                forest.score_values(&r.values).map(|score| DayPrediction {
                    date: r.date,
                    score,
                    label: label_for_score(score),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Some(SubjectPredictions {
            subject_id: s.subject_id.clone(),
            actual,
            days,
        }))
    });

    let mut iterations = Vec::new();
    let mut subjects = Vec::new();
    let mut skipped = Vec::new();
    for (i, r) in per_subject.into_iter().enumerate() {
        match r? {
            Some(sp) => {
                let actual = vec![sp.actual; sp.days.len()];
                let predicted: Vec<ClassLabel> = sp.days.iter().map(|d| d.label).collect();
                iterations.push(iteration(i, sp.subject_id.clone(), &actual, &predicted)?);
                subjects.push(sp);
            }
            None => skipped.push(primary[i].subject_id.clone()),
        }
    }

    let actual: Vec<ClassLabel> = subjects
        .iter()
        .flat_map(|s| vec![s.actual; s.days.len()])
        .collect();
    let scores: Vec<f64> = subjects
        .iter()
        .flat_map(|s| s.days.iter().map(|d| d.score))
        .collect();
    Ok(TransferOutcome {
        pooled_roc: roc_auc(&actual, &scores).ok(),
        summary: EvalSummary::from_iterations(
            Protocol::Transfer,
            ModelKind::Forest,
            iterations,
            skipped,
        ),
        subjects,
        training_rows: data.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{self, CohortSpec};
    use proptest::prelude::*;

    fn small_config() -> ForestConfig {
        ForestConfig {
            n_trees: 20,
            ..Default::default()
        }
    }

    #[test]
    fn kfold_exact_divisibility() {
        let labels = [ClassLabel::Healthy, ClassLabel::Depressed].repeat(5);
        let folds = stratified_kfold(&labels, 5, 1).unwrap();
        for f in &folds {
            assert_eq!(f.len(), 2);
            assert_eq!(f.iter().filter(|&&i| labels[i].is_positive()).count(), 1);
        }
        assert_eq!(folds, stratified_kfold(&labels, 5, 1).unwrap());
    }

    #[test]
    fn kfold_errors() {
        let labels = vec![ClassLabel::Healthy; 10];
        assert!(matches!(
            stratified_kfold(&labels, 5, 0),
            Err(EvalError::ClassTooSmall { .. })
        ));
        assert!(matches!(
            stratified_kfold(&labels, 1, 0),
            Err(EvalError::BadK(1))
        ));
    }

    proptest! {
        #[test]
        fn kfold_partitions_and_stratifies(n0 in 5usize..60, n1 in 5usize..60, k in 2usize..6, seed in any::<u64>()) {
            let mut labels = vec![ClassLabel::Healthy; n0];
            labels.extend(vec![ClassLabel::Depressed; n1]);
            let folds = stratified_kfold(&labels, k, seed).unwrap();
            let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n0 + n1).collect::<Vec<_>>());
            for f in &folds {
                let pos = f.iter().filter(|&&i| labels[i].is_positive()).count() as f64;
                let expected = n1 as f64 * f.len() as f64 / (n0 + n1) as f64;
                prop_assert!((pos - expected).abs() <= 1.0 + 1e-9);
                prop_assert!((f.len() as f64 - (n0 + n1) as f64 / k as f64).abs() < 1.0);
            }
        }
    }

    #[test]
    fn pairs_rules() {
        let subjects: Vec<(String, ClassLabel)> = (0..23)
            .map(|i| (format!("condition_{i}"), ClassLabel::Depressed))
            .chain((0..32).map(|i| (format!("control_{i}"), ClassLabel::Healthy)))
            .collect();
        let view = || subjects.iter().map(|(s, l)| (s.as_str(), *l));
        let pairs = make_pairs(view(), 9, None).unwrap();
        assert_eq!(pairs.len(), 23);
        let mut used: Vec<&String> = pairs.iter().flat_map(|(a, b)| [a, b]).collect();
        used.sort();
        used.dedup();
        assert_eq!(used.len(), 46);
        assert_eq!(pairs, make_pairs(view(), 9, None).unwrap());
        assert_eq!(make_pairs(view(), 9, Some(21)).unwrap().len(), 21);

        let one = make_pairs(
            [("d", ClassLabel::Depressed), ("h", ClassLabel::Healthy)],
            0,
            None,
        )
        .unwrap();
        assert_eq!(one, vec![("d".to_string(), "h".to_string())]);
        assert!(make_pairs([("d", ClassLabel::Depressed)], 0, None).is_err());
    }

    #[test]
    fn cv_on_synthetic_cohort() {
        let cohort = synth::cohort(
            &CohortSpec {
                n_depressed: 6,
                n_healthy: 8,
                ..CohortSpec::default()
            },
            4,
        );
        let data = crate::features::build_dataset(&cohort, ScalerKind::Robust).unwrap();
        let out = run_cv5(&data, &small_config(), 3).unwrap();
        assert_eq!(out.forest.iterations.len(), 5);
        assert_eq!(out.forest.pooled_confusion().total(), data.len());
        assert!(out.forest.accuracy.mean.unwrap() > out.dummy.accuracy.mean.unwrap());
        assert!(out.pooled_roc.auc > 0.5);
        let again = run_cv5(&data, &small_config(), 3).unwrap();
        assert_eq!(
            serde_json::to_string(&out).unwrap(),
            serde_json::to_string(&again).unwrap()
        );
        let seq = run_cv5(
            &data,
            &ForestConfig {
                exec: par::Exec::Sequential,
                ..small_config()
            },
            3,
        )
        .unwrap();
        assert_eq!(
            serde_json::to_string(&out).unwrap(),
            serde_json::to_string(&seq).unwrap()
        );
    }

    #[test]
    fn pair_loocv_on_synthetic_cohort() {
        let cohort = synth::cohort(
            &CohortSpec {
                n_depressed: 4,
                n_healthy: 5,
                ..CohortSpec::default()
            },
            8,
        );
        let out =
            run_pair_loocv(&cohort, &small_config(), 1, &PairLoocvOptions::default()).unwrap();
        assert_eq!(out.pairs.len() + out.forest.skipped.len(), 4);
        assert!(out
            .pairs
            .iter()
            .all(|p| p.poor == (p.forest_accuracy.unwrap() < 0.5)));
        let err = run_pair_loocv(
            &cohort[..5],
            &small_config(),
            1,
            &PairLoocvOptions::default(),
        );
        assert!(matches!(err, Err(EvalError::TooFewSubjects { .. })));
    }

    #[test]
    fn transfer_skips_subjects_without_valid_days() {
        let cohort = synth::cohort(
            &CohortSpec {
                n_depressed: 4,
                n_healthy: 4,
                ..CohortSpec::default()
            },
            2,
        );
        let mut primary = synth::cohort(
            &CohortSpec {
                n_depressed: 0,
                n_healthy: 2,
                ..CohortSpec::default()
            },
            99,
        );
        for p in &mut primary {
            p.device = crate::ingest::DeviceKind::FitbitSteps;
        }
        // keep only a few hours of the second subject
        primary[1].records.truncate(300);
        let out =
            run_transfer_eval(&cohort, &primary, &small_config(), ScalerKind::Robust).unwrap();
        assert_eq!(out.summary.iterations.len(), 1);
        assert_eq!(out.summary.skipped, vec![primary[1].subject_id.clone()]);
        assert_eq!(out.summary.iterations[0].metrics.sensitivity, None);
        assert_eq!(out.summary.sensitivity.mean, None);
    }
}
