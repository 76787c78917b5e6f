//! Binary classification tree grown greedily on weighted Gini impurity.
//!
//! Rows enter a node as a multiset of indices (a bootstrap sample may
//! repeat a row). Class masses are `count_c · weight_c`.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Weighted mass per class, indexed by `ClassLabel::index`.
    Leaf { mass: [f64; 2] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_mass(&self, x: &[f64]) -> [f64; 2] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
                Node::Leaf { mass } => return *mass,
            }
        }
    }

    /// Positive-class share of the reached leaf.
    pub fn score(&self, x: &[f64]) -> f64 {
        let [neg, pos] = self.leaf_mass(x);
        pos / (neg + pos)
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    /// Structural checks used when loading a model from disk.
    pub fn validate(&self, n_features: usize) -> Result<(), String> {
        if self.nodes.is_empty() {
            return Err("tree has no nodes".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if *feature >= n_features {
                        return Err(format!("node {i}: feature {feature} out of range"));
                    }
                    if !threshold.is_finite() {
                        return Err(format!("node {i}: non-finite threshold"));
                    }
                    // children always follow their parent in preorder
                    if *left <= i
                        || *right <= i
                        || *left >= self.nodes.len()
                        || *right >= self.nodes.len()
                    {
                        return Err(format!("node {i}: bad child index"));
                    }
                }
                Node::Leaf { mass } => {
                    if mass.iter().any(|m| !m.is_finite() || *m < 0.0) || mass[0] + mass[1] <= 0.0 {
                        return Err(format!("node {i}: invalid leaf mass"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Gini impurity `1 − Σ p_c²` of a node with the given class masses.
pub fn weighted_gini(mass: [f64; 2]) -> f64 {
    let total = mass[0] + mass[1];
    if total <= 0.0 {
        return 0.0;
    }
    let p0 = mass[0] / total;
    let p1 = mass[1] / total;
    1.0 - p0 * p0 - p1 * p1
}

/// Weighted impurity decrease of splitting a node into two children.
pub fn split_gain(left: [f64; 2], right: [f64; 2]) -> f64 {
    let parent = [left[0] + right[0], left[1] + right[1]];
    let total = |m: [f64; 2]| m[0] + m[1];
    total(parent) * weighted_gini(parent)
        - total(left) * weighted_gini(left)
        - total(right) * weighted_gini(right)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Training view shared by every node of every tree.
pub struct TrainingData<'a> {
    pub rows: &'a [Vec<f64>],
    /// Class index per row.
    pub classes: &'a [usize],
    pub weights: [f64; 2],
}

impl TrainingData<'_> {
    fn counts(&self, idx: &[usize]) -> [usize; 2] {
        let mut c = [0usize; 2];
        for &i in idx {
            c[self.classes[i]] += 1;
        }
        c
    }

    fn mass(&self, counts: [usize; 2]) -> [f64; 2] {
        [
            counts[0] as f64 * self.weights[0],
            counts[1] as f64 * self.weights[1],
        ]
    }
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = (lo + hi) / 2.0;
    // adjacent floats: keep the threshold strictly below `hi`
    if mid >= hi {
        lo
    } else {
        mid
    }
}

/// Best split over the features in `feature_order`, scanned in that order.
///
/// Features that are constant on the node are skipped and do not count
/// towards `max_features`. Within a feature, thresholds are midpoints
/// between consecutive distinct values, tried in ascending order; a later
/// candidate replaces the incumbent only on strictly larger gain.
pub fn best_split(
    data: &TrainingData<'_>,
    idx: &[usize],
    feature_order: &[usize],
    max_features: usize,
    min_samples_leaf: usize,
) -> Option<Split> {
    let n = idx.len();
    let total = data.counts(idx);
    let mut best: Option<Split> = None;
    let mut visited = 0;
    let mut column: Vec<(f64, usize)> = Vec::with_capacity(n);

    for &feature in feature_order {
        if visited >= max_features {
            break;
        }
        column.clear();
        column.extend(
            idx.iter()
                .map(|&i| (data.rows[i][feature], data.classes[i])),
        );
        column.sort_by(|a, b| a.0.total_cmp(&b.0));
        if column[0].0 == column[n - 1].0 {
            continue;
        }
        visited += 1;

        let mut left = [0usize; 2];
        for pos in 1..n {
            left[column[pos - 1].1] += 1;
            if column[pos - 1].0 == column[pos].0 {
                continue;
            }
            if pos < min_samples_leaf || n - pos < min_samples_leaf {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let gain = split_gain(data.mass(left), data.mass(right));
            if best.is_none_or(|b| gain > b.gain) {
                best = Some(Split {
                    feature,
                    threshold: midpoint(column[pos - 1].0, column[pos].0),
                    gain,
                });
            }
        }
    }
    best
}

#[derive(Clone, Copy, Debug)]
pub struct GrowParams {
    pub max_features: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
}

/// Grows one tree on the multiset `idx`.
pub fn grow_tree<R: Rng>(
    data: &TrainingData<'_>,
    idx: Vec<usize>,
    params: GrowParams,
    rng: &mut R,
) -> Tree {
    let n_features = data.rows.first().map_or(0, Vec::len);
    let mut nodes = Vec::new();
    let mut features: Vec<usize> = (0..n_features).collect();
    grow_node(data, idx, 0, params, rng, &mut features, &mut nodes);
    Tree { nodes }
}

fn grow_node<R: Rng>(
    data: &TrainingData<'_>,
    mut idx: Vec<usize>,
    depth: usize,
    params: GrowParams,
    rng: &mut R,
    features: &mut [usize],
    nodes: &mut Vec<Node>,
) -> usize {
    let id = nodes.len();
    let counts = data.counts(&idx);
    let mass = data.mass(counts);
    nodes.push(Node::Leaf { mass });

    let pure = counts[0] == 0 || counts[1] == 0;
    let too_small = idx.len() < 2 * params.min_samples_leaf.max(1);
    let too_deep = params.max_depth.is_some_and(|d| depth >= d);
    if pure || too_small || too_deep {
        return id;
    }

    features.shuffle(rng);
    let Some(split) = best_split(
        data,
        &idx,
        features,
        params.max_features,
        params.min_samples_leaf.max(1),
    ) else {
        return id;
    };

    let right_idx: Vec<usize> = idx
        .iter()
        .copied()
        .filter(|&i| data.rows[i][split.feature] > split.threshold)
        .collect();
    idx.retain(|&i| data.rows[i][split.feature] <= split.threshold);

    let left = grow_node(data, idx, depth + 1, params, rng, features, nodes);
    let right = grow_node(data, right_idx, depth + 1, params, rng, features, nodes);
    nodes[id] = Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
    };
    id
}
