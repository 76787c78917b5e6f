//! Model bundle file format.
//!
//! UTF-8 JSON lines. Line 1 is the header object:
//!
//! ```text
//! {"format_version":1,"schema":{…},"scaler_kind":"robust","config":{…},
//!  "class_weights":[w0,w1],"schema_version":1,"n_features":20,
//!  "n_trees":100,"metadata":{"dataset_name":…,"row_count":…,"trained_at":…}}
//! ```
//!
//! followed by exactly `n_trees` lines, one per tree:
//! `{"tree":i,"nodes":[{"split":{…}}|{"leaf":{"mass":[m0,m1]}}, …]}` with
//! nodes in preorder and node 0 the root.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::forest::{ClassWeights, ForestConfig, ForestModel};
use super::tree::{Node, Tree};
use super::ModelError;
use crate::features::FeatureSchema;
use crate::scaling::ScalerKind;

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub dataset_name: String,
    pub row_count: usize,
    pub trained_at: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelBundle {
    pub format_version: u32,
    pub forest: ForestModel,
    pub scaler_kind: ScalerKind,
    pub feature_schema: FeatureSchema,
    pub metadata: TrainingMetadata,
}

impl ModelBundle {
    pub fn new(
        forest: ForestModel,
        scaler_kind: ScalerKind,
        feature_schema: FeatureSchema,
        metadata: TrainingMetadata,
    ) -> Self {
        ModelBundle {
            format_version: BUNDLE_FORMAT_VERSION,
            forest,
            scaler_kind,
            feature_schema,
            metadata,
        }
    }
}

#[derive(Serialize)]
struct TreeLine<'a> {
    tree: usize,
    nodes: &'a [Node],
}

pub fn save_bundle(bundle: &ModelBundle) -> Vec<u8> {
    let f = &bundle.forest;
    let header = serde_json::json!({
        "format_version": bundle.format_version,
        "schema": bundle.feature_schema,
        "scaler_kind": bundle.scaler_kind,
        "config": f.config,
        "class_weights": f.class_weights,
        "schema_version": f.schema_version,
        "n_features": f.n_features,
        "n_trees": f.trees.len(),
        "metadata": bundle.metadata,
    });
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for (i, t) in f.trees.iter().enumerate() {
        let line = TreeLine {
            tree: i,
            nodes: &t.nodes,
        };
        out.push_str(&serde_json::to_string(&line).expect("tree serializes"));
        out.push('\n');
    }
    out.into_bytes()
}

fn decode_err(field: &str, reason: impl ToString) -> ModelError {
    ModelError::Decode {
        field: field.to_string(),
        reason: reason.to_string(),
    }
}

fn take<T: DeserializeOwned>(map: &mut Map<String, Value>, field: &str) -> Result<T, ModelError> {
    let v = map
        .remove(field)
        .ok_or_else(|| decode_err(field, "missing"))?;
    serde_json::from_value(v).map_err(|e| decode_err(field, e))
}

pub fn load_bundle(bytes: &[u8]) -> Result<ModelBundle, ModelError> {
    let text = std::str::from_utf8(bytes).map_err(|e| decode_err("bundle", e))?;
    let mut lines = text.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| decode_err("header", "empty input"))?;
    let header: Value = serde_json::from_str(header_line).map_err(|e| decode_err("header", e))?;
    let Value::Object(mut map) = header else {
        return Err(decode_err("header", "not a JSON object"));
    };

    let version: u64 = take(&mut map, "format_version")?;
    if version != BUNDLE_FORMAT_VERSION as u64 {
        return Err(ModelError::Version {
            found: version,
            supported: BUNDLE_FORMAT_VERSION,
        });
    }
    let feature_schema: FeatureSchema = take(&mut map, "schema")?;
    let scaler_kind: ScalerKind = take(&mut map, "scaler_kind")?;
    let config: ForestConfig = take(&mut map, "config")?;
    let class_weights: ClassWeights = take(&mut map, "class_weights")?;
    let schema_version: u32 = take(&mut map, "schema_version")?;
    let n_features: usize = take(&mut map, "n_features")?;
    let n_trees: usize = take(&mut map, "n_trees")?;
    let metadata: TrainingMetadata = take(&mut map, "metadata")?;

    feature_schema
        .validate()
        .map_err(|e| decode_err("schema", e))?;
    if schema_version != feature_schema.version {
        return Err(decode_err(
            "schema_version",
            format!(
                "{schema_version} does not match schema {}",
                feature_schema.version
            ),
        ));
    }
    if n_features != feature_schema.feature_count() {
        return Err(decode_err("n_features", "does not match the schema"));
    }

    let mut trees = Vec::with_capacity(n_trees);
    for i in 0..n_trees {
        let field = format!("tree[{i}]");
        let line = lines.next().ok_or_else(|| {
            decode_err(
                &field,
                format!("truncated: expected {n_trees} trees, found {i}"),
            )
        })?;
        let v: Value = serde_json::from_str(line).map_err(|e| decode_err(&field, e))?;
        let Value::Object(mut obj) = v else {
            return Err(decode_err(&field, "not a JSON object"));
        };
        let index: usize =
            take(&mut obj, "tree").map_err(|_| decode_err(&field, "missing index"))?;
        if index != i {
            return Err(decode_err(&field, format!("out of order (index {index})")));
        }
        let nodes: Vec<Node> = take(&mut obj, "nodes").map_err(|e| decode_err(&field, e))?;
        trees.push(Tree { nodes });
    }
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(decode_err("bundle", "trailing data after the last tree"));
    }

    let forest = ForestModel {
        trees,
        config,
        class_weights,
        schema_version,
        n_features,
    };
    forest.validate().map_err(|e| decode_err("forest", e))?;

    Ok(ModelBundle {
        format_version: BUNDLE_FORMAT_VERSION,
        forest,
        scaler_kind,
        feature_schema,
        metadata,
    })
}
