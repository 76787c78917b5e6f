use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow_tree, GrowParams, TrainingData, Tree};
use super::ModelError;
use crate::features::{Dataset, FeatureSchema, FeatureVector};
use crate::ingest::ClassLabel;
use crate::par::{self, stream_seed, Exec};

/// Per-class weights `n_total / (2 · n_c)`, indexed by `ClassLabel::index`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights(pub [f64; 2]);

impl ClassWeights {
    pub fn get(&self, label: ClassLabel) -> f64 {
        self.0[label.index()]
    }
}

pub fn balanced_weights(labels: &[ClassLabel]) -> Result<ClassWeights, ModelError> {
    let mut counts = [0usize; 2];
    for l in labels {
        counts[l.index()] += 1;
    }
    if counts.contains(&0) {
        return Err(ModelError::SingleClass);
    }
    let n = labels.len() as f64;
    Ok(ClassWeights(counts.map(|c| n / (2.0 * c as f64))))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// `⌈√d⌉`.
    Sqrt,
    Fixed(usize),
    All,
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => (d as f64).sqrt().ceil() as usize,
            MaxFeatures::Fixed(k) => k.clamp(1, d.max(1)),
            MaxFeatures::All => d,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub seed: u64,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_features: MaxFeatures::Sqrt,
            max_depth: None,
            min_samples_leaf: 1,
            seed: 42,
            exec: Exec::default(),
        }
    }
}

impl ForestConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        ForestConfig { seed, ..self }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub config: ForestConfig,
    pub class_weights: ClassWeights,
    pub schema_version: u32,
    pub n_features: usize,
}

/// Trains a class-balanced random forest. Each tree draws its bootstrap
/// sample and feature orders from its own stream `(seed, tree_index)`, so
/// the model is identical under any execution strategy.
pub fn fit_forest(data: &Dataset, config: &ForestConfig) -> Result<ForestModel, ModelError> {
    let rows: Vec<Vec<f64>> = data.rows.iter().map(|r| r.values.clone()).collect();
    let labels = data.labels();
    fit_forest_rows(&rows, &labels, &data.schema, config)
}

pub fn fit_forest_rows(
    rows: &[Vec<f64>],
    labels: &[ClassLabel],
    schema: &FeatureSchema,
    config: &ForestConfig,
) -> Result<ForestModel, ModelError> {
    if config.n_trees == 0 {
        return Err(ModelError::Config("n_trees must be at least 1".into()));
    }
    if rows.len() < 2 {
        return Err(ModelError::TooFewRows(rows.len()));
    }
    let n_features = schema.feature_count();
    if let Some(bad) = rows.iter().find(|r| r.len() != n_features) {
        return Err(ModelError::SchemaMismatch {
            expected: n_features,
            found: bad.len(),
        });
    }
    let class_weights = balanced_weights(labels)?;
    let classes: Vec<usize> = labels.iter().map(|l| l.index()).collect();
    let data = TrainingData {
        rows,
        classes: &classes,
        weights: class_weights.0,
    };
    let params = GrowParams {
        max_features: config.max_features.resolve(n_features),
        max_depth: config.max_depth,
        min_samples_leaf: config.min_samples_leaf,
    };

    let n = rows.len();
    let trees = par::map_indexed(config.n_trees, config.exec, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(config.seed, t as u64));
        let bootstrap: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        grow_tree(&data, bootstrap, params, &mut rng)
    });

    Ok(ForestModel {
        trees,
        config: *config,
        class_weights,
        schema_version: schema.version,
        n_features,
    })
}

impl ForestModel {
    /// Mean over trees of the positive share of each reached leaf.
    pub fn score_values(&self, x: &[f64]) -> Result<f64, ModelError> {
        if x.len() != self.n_features {
            return Err(ModelError::SchemaMismatch {
                expected: self.n_features,
                found: x.len(),
            });
        }
        let sum: f64 = self.trees.iter().map(|t| t.score(x)).sum();
        Ok(sum / self.trees.len() as f64)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.trees.is_empty() {
            return Err("forest has no trees".into());
        }
        for (i, t) in self.trees.iter().enumerate() {
            t.validate(self.n_features)
                .map_err(|e| format!("tree {i}: {e}"))?;
        }
        Ok(())
    }
}

pub fn predict_score(model: &ForestModel, x: &FeatureVector) -> Result<f64, ModelError> {
    model.score_values(&x.values)
}

/// Label threshold on the forest score.
pub const DECISION_THRESHOLD: f64 = 0.5;

pub fn label_for_score(score: f64) -> ClassLabel {
    if score >= DECISION_THRESHOLD {
        ClassLabel::Depressed
    } else {
        ClassLabel::Healthy
    }
}

pub fn predict_label(model: &ForestModel, x: &FeatureVector) -> Result<ClassLabel, ModelError> {
    predict_score(model, x).map(label_for_score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::DeviceKind;
    use chrono::NaiveDate;
    use proptest::prelude::*;
    use rand::Rng;

    fn dataset(rows: Vec<(Vec<f64>, ClassLabel)>) -> Dataset {
        let date = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        Dataset {
            schema: FeatureSchema::v1(),
            rows: rows
                .into_iter()
                .enumerate()
                .map(|(i, (values, l))| FeatureVector {
                    subject_id: format!("s{i}"),
                    date,
                    values,
                    label: Some(l),
                })
                .collect(),
            device: DeviceKind::ActiwatchCounts,
            scaler: None,
        }
    }

    fn separable(n: usize) -> Dataset {
        dataset(
            (0..n)
                .map(|i| {
                    let x0 = i as f64 - (n / 2) as f64 + 0.5;
                    let mut v: Vec<f64> = (0..20).map(|j| ((i * 7 + j * 3) % 5) as f64).collect();
                    v[0] = x0;
                    let l = if x0 < 0.0 {
                        ClassLabel::Healthy
                    } else {
                        ClassLabel::Depressed
                    };
                    (v, l)
                })
                .collect(),
        )
    }

    #[test]
    fn balanced_weight_values() {
        let mut labels = vec![ClassLabel::Healthy; 75];
        labels.extend(vec![ClassLabel::Depressed; 25]);
        let w = balanced_weights(&labels).unwrap();
        assert!((w.get(ClassLabel::Healthy) - 100.0 / 150.0).abs() < 1e-15);
        assert_eq!(w.get(ClassLabel::Depressed), 2.0);

        let even = [ClassLabel::Healthy, ClassLabel::Depressed].repeat(25);
        assert_eq!(balanced_weights(&even).unwrap().0, [1.0, 1.0]);
        assert!(matches!(
            balanced_weights(&[ClassLabel::Healthy; 4]),
            Err(ModelError::SingleClass)
        ));
    }

    #[test]
    fn sqrt_features() {
        assert_eq!(MaxFeatures::Sqrt.resolve(20), 5);
        assert_eq!(MaxFeatures::Sqrt.resolve(16), 4);
    }

    #[test]
    fn separable_training_accuracy() {
        let ds = separable(20);
        let model = fit_forest(&ds, &ForestConfig::default()).unwrap();
        for row in &ds.rows {
            assert_eq!(predict_label(&model, row).unwrap(), row.label.unwrap());
        }
    }

    #[test]
    fn deterministic_across_runs_and_strategies() {
        let ds = separable(40);
        let seq = ForestConfig {
            exec: Exec::Sequential,
            n_trees: 25,
            ..Default::default()
        };
        let par = ForestConfig {
            exec: Exec::Parallel,
            ..seq
        };
        let a = fit_forest(&ds, &seq).unwrap();
        let b = fit_forest(&ds, &seq).unwrap();
        let c = fit_forest(&ds, &par).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&c).unwrap()
        );
        let other = fit_forest(&ds, &seq.with_seed(7)).unwrap();
        assert_ne!(a.trees, other.trees);
    }

    #[test]
    fn degenerate_dataset_gives_single_leaves() {
        let ds = dataset(
            (0..6)
                .map(|i| (vec![1.0; 20], ClassLabel::from_index(i % 2).unwrap()))
                .collect(),
        );
        let model = fit_forest(
            &ds,
            &ForestConfig {
                n_trees: 10,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(model.trees.iter().all(|t| t.nodes.len() == 1));
        let s = predict_score(&model, &ds.rows[0]).unwrap();
        assert!((0.0..=1.0).contains(&s));
    }

    #[test]
    fn errors() {
        let one = dataset(vec![(vec![0.0; 20], ClassLabel::Healthy)]);
        assert!(matches!(
            fit_forest(&one, &ForestConfig::default()),
            Err(ModelError::TooFewRows(1))
        ));
        let single = dataset(vec![(vec![0.0; 20], ClassLabel::Healthy); 3]);
        assert!(matches!(
            fit_forest(&single, &ForestConfig::default()),
            Err(ModelError::SingleClass)
        ));
        let model = fit_forest(
            &separable(10),
            &ForestConfig {
                n_trees: 3,
                ..Default::default()
            },
        )
        .unwrap();
        let short = FeatureVector {
            values: vec![0.0; 19],
            ..separable(2).rows[0].clone()
        };
        assert!(matches!(
            predict_score(&model, &short),
            Err(ModelError::SchemaMismatch { .. })
        ));
    }

    #[test]
    fn score_is_mean_of_leaf_ratios() {
        use super::super::tree::Node;
        let leaf = |m: [f64; 2]| Tree {
            nodes: vec![Node::Leaf { mass: m }],
        };
        let mut model = fit_forest(
            &separable(10),
            &ForestConfig {
                n_trees: 1,
                ..Default::default()
            },
        )
        .unwrap();
        model.trees = vec![leaf([3.0, 1.0])];
        let x = separable(2).rows[0].clone();
        assert_eq!(predict_score(&model, &x).unwrap(), 0.25);
        model.trees = vec![leaf([0.0, 2.0]), leaf([0.0, 5.0])];
        assert_eq!(predict_score(&model, &x).unwrap(), 1.0);
        model.trees = vec![leaf([1.0, 1.0]), leaf([3.0, 1.0]), leaf([0.0, 1.0])];
        let s1 = predict_score(&model, &x).unwrap();
        model.trees.reverse();
        assert_eq!(s1, predict_score(&model, &x).unwrap());
    }

    fn random_rows(
        rng: &mut ChaCha8Rng,
        n: usize,
        binary_col: usize,
    ) -> Vec<(Vec<f64>, ClassLabel)> {
        (0..n)
            .map(|_| {
                let mut v: Vec<f64> = (0..20).map(|_| rng.random_range(0..8) as f64).collect();
                v[binary_col] = rng.random_range(0..2) as f64;
                let signal = v[0] + v[3] + 4.0 * v[binary_col] + rng.random_range(0.0..4.0);
                let l = if signal > 11.0 {
                    ClassLabel::Depressed
                } else {
                    ClassLabel::Healthy
                };
                (v, l)
            })
            .collect()
    }

    fn warp(rows: &[(Vec<f64>, ClassLabel)], col: usize) -> Vec<(Vec<f64>, ClassLabel)> {
        rows.iter()
            .map(|(v, l)| {
                let mut v = v.clone();
                v[col] = v[col].exp() * 3.0 + 1.0;
                (v, *l)
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn monotone_transform_keeps_structure_and_labels(seed in any::<u64>(), col in 0usize..20) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut train = random_rows(&mut rng, 60, col);
            train[0].1 = ClassLabel::Healthy;
            train[1].1 = ClassLabel::Depressed;
            let test = random_rows(&mut rng, 30, col);
            let cfg = ForestConfig { n_trees: 15, seed, ..Default::default() };
            let a = fit_forest(&dataset(train.clone()), &cfg).unwrap();
            let b = fit_forest(&dataset(warp(&train, col)), &cfg).unwrap();

            // same topology, split features and leaf masses; only thresholds move
            use super::super::tree::Node;
            for (ta, tb) in a.trees.iter().zip(&b.trees) {
                prop_assert_eq!(ta.nodes.len(), tb.nodes.len());
                for (na, nb) in ta.nodes.iter().zip(&tb.nodes) {
                    match (na, nb) {
                        (Node::Split { feature: fa, left: la, right: ra, threshold: xa },
                         Node::Split { feature: fb, left: lb, right: rb, threshold: xb }) => {
                            prop_assert_eq!((fa, la, ra), (fb, lb, rb));
                            if *fa != col {
                                prop_assert_eq!(xa, xb);
                            }
                        }
                        (Node::Leaf { mass: ma }, Node::Leaf { mass: mb }) => prop_assert_eq!(ma, mb),
                        _ => prop_assert!(false, "node kinds differ"),
                    }
                }
            }

            // the warped column is two-valued, so routing of unseen rows is preserved
            let ta = dataset(test.clone());
            let tb = dataset(warp(&test, col));
            for (ra, rb) in ta.rows.iter().zip(&tb.rows) {
                let sa = predict_score(&a, ra).unwrap();
                let sb = predict_score(&b, rb).unwrap();
                prop_assert!((0.0..=1.0).contains(&sa));
                prop_assert_eq!(sa, sb);
                prop_assert_eq!(label_for_score(sa), label_for_score(sb));
            }
        }
    }
}
