//! Fitted models plus the preprocessing state needed to apply them, and the
//! versioned JSON model file.
//!
//! File layout (`format_version` 1), keys in this order:
//!
//! ```text
//! format_version, model_kind (mlr|ridge|forest), target_name, feature_names,
//! normalization { features: [{name,min,max}], target: {name,min,max}|null } | null,
//! categorical_encoding { columns: {name: [token, ...]} },
//! payload
//! ```
//!
//! Linear payloads hold `intercept`, `coefficients`, `regularization_lambda`
//! and `diagnostics`. Forest payloads hold `params`, `oob_r2` and `trees`,
//! each tree a flat preorder list of `{"split": {feature, threshold}}` and
//! `{"leaf": {value, count}}` records.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dataset::EncodingMap;
use crate::error::{Error, Result};
use crate::forest::{predict_forest, ForestModel, ForestParams, TreeNode};
use crate::linalg::Matrix;
use crate::linear::{predict_linear, FitDiagnostics, LinearModel};
use crate::preprocess::{ColumnRange, NormalizationParams};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Mlr,
    Ridge,
    Forest,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Mlr, ModelKind::Ridge, ModelKind::Forest];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Mlr => "mlr",
            ModelKind::Ridge => "ridge",
            ModelKind::Forest => "forest",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mlr" => Ok(ModelKind::Mlr),
            "ridge" => Ok(ModelKind::Ridge),
            "forest" => Ok(ModelKind::Forest),
            other => Err(format!("unknown model kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Mlr(LinearModel),
    Ridge(LinearModel),
    Forest(ForestModel),
}

impl FittedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            FittedModel::Mlr(_) => ModelKind::Mlr,
            FittedModel::Ridge(_) => ModelKind::Ridge,
            FittedModel::Forest(_) => ModelKind::Forest,
        }
    }

    pub fn feature_names(&self) -> &[String] {
        match self {
            FittedModel::Mlr(m) | FittedModel::Ridge(m) => &m.feature_names,
            FittedModel::Forest(m) => &m.feature_names,
        }
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        match self {
            FittedModel::Mlr(m) | FittedModel::Ridge(m) => predict_linear(m, x),
            FittedModel::Forest(m) => predict_forest(m, x),
        }
    }

    pub fn training_r2(&self) -> Option<f64> {
        match self {
            FittedModel::Mlr(m) | FittedModel::Ridge(m) => m.diagnostics.training_r2,
            FittedModel::Forest(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelNormalization {
    pub features: NormalizationParams,
    pub target: Option<ColumnRange>,
}

/// A fitted model with the scaling and encoding it was trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelArtifact {
    pub model: FittedModel,
    pub target_name: String,
    pub normalization: Option<ModelNormalization>,
    pub encoding: EncodingMap,
}

/// Predictions in original target units, with the number of feature cells
/// clamped into the training range.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub values: Vec<f64>,
    pub clamped_cells: usize,
}

impl ModelArtifact {
    pub fn bare(model: FittedModel, target_name: &str) -> Self {
        ModelArtifact {
            model,
            target_name: target_name.to_string(),
            normalization: None,
            encoding: EncodingMap::default(),
        }
    }

    pub fn feature_names(&self) -> &[String] {
        self.model.feature_names()
    }

    /// Scales raw features, predicts, and maps the result back to target units.
    pub fn predict(&self, x: &Matrix) -> Result<Prediction> {
        let Some(norm) = &self.normalization else {
            return Ok(Prediction {
                values: self.model.predict(x)?,
                clamped_cells: 0,
            });
        };
        let (scaled, clamped_cells) = norm.features.apply_matrix(x)?;
        let mut values = self.model.predict(&scaled)?;
        if let Some(t) = &norm.target {
            for v in &mut values {
                *v = t.min + *v * (t.max - t.min);
            }
        }
        Ok(Prediction {
            values,
            clamped_cells,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u64,
    model_kind: ModelKind,
    target_name: String,
    feature_names: Vec<String>,
    normalization: Option<ModelNormalization>,
    categorical_encoding: EncodingMap,
    payload: Value,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinearPayload {
    intercept: f64,
    coefficients: Vec<f64>,
    regularization_lambda: f64,
    diagnostics: FitDiagnostics,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ForestPayload {
    params: ForestParams,
    oob_r2: Option<f64>,
    trees: Vec<Vec<NodeRecord>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum NodeRecord {
    Split { feature: usize, threshold: f64 },
    Leaf { value: f64, count: usize },
}

fn flatten(node: &TreeNode, out: &mut Vec<NodeRecord>) {
    match node {
        TreeNode::Leaf { value, count } => out.push(NodeRecord::Leaf {
            value: *value,
            count: *count,
        }),
        TreeNode::Internal {
            feature,
            threshold,
            left,
            right,
        } => {
            out.push(NodeRecord::Split {
                feature: *feature,
                threshold: *threshold,
            });
            flatten(left, out);
            flatten(right, out);
        }
    }
}

fn violation(msg: impl Into<String>) -> Error {
    Error::SchemaViolation(msg.into())
}

/// Rebuilds a tree from preorder records, iteratively so deep trees cannot
/// overflow the stack.
fn unflatten(records: &[NodeRecord], n_features: usize) -> Result<TreeNode> {
    enum Frame {
        Split {
            feature: usize,
            threshold: f64,
            left: Option<TreeNode>,
        },
    }
    let mut stack: Vec<Frame> = Vec::new();
    let mut iter = records.iter();
    loop {
        let record = iter
            .next()
            .ok_or_else(|| violation("tree ends before every split has two children"))?;
        let mut done = match *record {
            NodeRecord::Split { feature, threshold } => {
                if feature >= n_features {
                    return Err(violation(format!("split feature {feature} out of range")));
                }
                if !threshold.is_finite() {
                    return Err(violation("non-finite threshold"));
                }
                stack.push(Frame::Split {
                    feature,
                    threshold,
                    left: None,
                });
                continue;
            }
            NodeRecord::Leaf { value, count } => {
                if !value.is_finite() || count == 0 {
                    return Err(violation("leaf needs a finite value and a positive count"));
                }
                TreeNode::Leaf { value, count }
            }
        };
        // attach the completed subtree to its parents
        loop {
            match stack.pop() {
                None => {
                    if iter.next().is_some() {
                        return Err(violation("trailing nodes after a complete tree"));
                    }
                    return Ok(done);
                }
                Some(Frame::Split {
                    feature,
                    threshold,
                    left: None,
                }) => {
                    stack.push(Frame::Split {
                        feature,
                        threshold,
                        left: Some(done),
                    });
                    break;
                }
                Some(Frame::Split {
                    feature,
                    threshold,
                    left: Some(left),
                }) => {
                    done = TreeNode::Internal {
                        feature,
                        threshold,
                        left: Box::new(left),
                        right: Box::new(done),
                    };
                }
            }
        }
    }
}

pub fn to_json(a: &ModelArtifact) -> Result<String> {
    let payload = match &a.model {
        FittedModel::Mlr(m) | FittedModel::Ridge(m) => serde_json::to_value(LinearPayload {
            intercept: m.intercept,
            coefficients: m.coefficients.clone(),
            regularization_lambda: m.regularization_lambda,
            diagnostics: m.diagnostics.clone(),
        }),
        FittedModel::Forest(m) => serde_json::to_value(ForestPayload {
            params: m.params.clone(),
            oob_r2: m.oob_r2,
            trees: m
                .trees
                .iter()
                .map(|t| {
                    let mut v = Vec::new();
                    flatten(t, &mut v);
                    v
                })
                .collect(),
        }),
    }
    .map_err(|e| violation(e.to_string()))?;
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        model_kind: a.model.kind(),
        target_name: a.target_name.clone(),
        feature_names: a.feature_names().to_vec(),
        normalization: a.normalization.clone(),
        categorical_encoding: a.encoding.clone(),
        payload,
    };
    let mut text = serde_json::to_string(&file).map_err(|e| violation(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn from_json(text: &str) -> Result<ModelArtifact> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| violation(format!("not valid JSON: {e}")))?;
    match value.get("format_version").map(Value::as_u64) {
        Some(Some(FORMAT_VERSION)) => {}
        Some(Some(v)) => return Err(Error::UnsupportedVersion(v)),
        _ => return Err(violation("missing or non-integer format_version")),
    }
    let file: ModelFile = serde_json::from_value(value).map_err(|e| violation(e.to_string()))?;
    let d = file.feature_names.len();

    if let Some(norm) = &file.normalization {
        if norm.features.names() != file.feature_names {
            return Err(violation(
                "normalization columns do not match feature_names",
            ));
        }
        let ranges = norm.features.columns.iter().chain(norm.target.as_ref());
        for r in ranges {
            if !(r.min <= r.max) {
                return Err(violation(format!("range for `{}` has min > max", r.name)));
            }
        }
    }

    let model = match file.model_kind {
        ModelKind::Mlr | ModelKind::Ridge => {
            let p: LinearPayload =
                serde_json::from_value(file.payload).map_err(|e| violation(e.to_string()))?;
            if p.coefficients.len() != d {
                return Err(violation(format!(
                    "{} coefficients for {d} features",
                    p.coefficients.len()
                )));
            }
            if !(p.regularization_lambda >= 0.0) {
                return Err(violation("negative regularization_lambda"));
            }
            if file.model_kind == ModelKind::Mlr && p.regularization_lambda != 0.0 {
                return Err(violation("mlr model with nonzero lambda"));
            }
            let m = LinearModel {
                intercept: p.intercept,
                coefficients: p.coefficients,
                feature_names: file.feature_names,
                regularization_lambda: p.regularization_lambda,
                diagnostics: p.diagnostics,
            };
            if file.model_kind == ModelKind::Mlr {
                FittedModel::Mlr(m)
            } else {
                FittedModel::Ridge(m)
            }
        }
        ModelKind::Forest => {
            let p: ForestPayload =
                serde_json::from_value(file.payload).map_err(|e| violation(e.to_string()))?;
            let params = p.params.resolved(d).map_err(|e| violation(e.to_string()))?;
            if params != p.params {
                return Err(violation(
                    "forest params must carry a resolved max_features",
                ));
            }
            if p.trees.len() != params.n_trees {
                return Err(violation(format!(
                    "{} trees but n_trees = {}",
                    p.trees.len(),
                    params.n_trees
                )));
            }
            let trees = p
                .trees
                .iter()
                .map(|t| unflatten(t, d))
                .collect::<Result<_>>()?;
            FittedModel::Forest(ForestModel {
                trees,
                params,
                feature_names: file.feature_names,
                oob_r2: p.oob_r2,
            })
        }
    };
    Ok(ModelArtifact {
        model,
        target_name: file.target_name,
        normalization: file.normalization,
        encoding: file.categorical_encoding,
    })
}

pub fn save_model(a: &ModelArtifact, path: &Path) -> Result<()> {
    std::fs::write(path, to_json(a)?)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ModelArtifact> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        std::io::ErrorKind::InvalidData => violation("model file is not UTF-8"),
        _ => Error::Io(e),
    })?;
    from_json(&text)
}
