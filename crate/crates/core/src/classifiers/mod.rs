//! From-scratch multiclass classifiers over the nine emotion classes.
//!
//! All models predict distributions over the full nine-class set regardless
//! of which classes appear in training. Training is deterministic under a
//! fixed seed, including the parallel paths: parallel ensembles must be
//! bit-identical to sequential execution.

mod adaboost;
mod forest;
mod gbdt;
mod knn;
mod naive_bayes;
mod tree;

pub use gbdt::{root_split_gain, GbdtModel};
pub use tree::{best_split, RegNode, SplitChoice, TreeNode};

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{EmotionLabel, LabeledDataset, NUM_CLASSES};
use crate::error::{Error, Result};

/// Model-document format version; predict-only loading is guaranteed across
/// minor revisions of the same major version.
pub const MODEL_FORMAT_VERSION: (u32, u32) = (1, 0);

/// The trainable algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTag {
    DecisionTree,
    RandomForest,
    Gbdt,
    AdaBoost,
    Knn,
    GaussianNb,
}

impl ModelTag {
    pub const ALL: [ModelTag; 6] = [
        ModelTag::DecisionTree,
        ModelTag::RandomForest,
        ModelTag::Gbdt,
        ModelTag::AdaBoost,
        ModelTag::Knn,
        ModelTag::GaussianNb,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelTag::DecisionTree => "dt",
            ModelTag::RandomForest => "rf",
            ModelTag::Gbdt => "gbdt",
            ModelTag::AdaBoost => "adaboost",
            ModelTag::Knn => "knn",
            ModelTag::GaussianNb => "gnb",
        }
    }
}

impl std::fmt::Display for ModelTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dt" | "decision_tree" => Ok(ModelTag::DecisionTree),
            "rf" | "random_forest" => Ok(ModelTag::RandomForest),
            "gbdt" => Ok(ModelTag::Gbdt),
            "adaboost" => Ok(ModelTag::AdaBoost),
            "knn" => Ok(ModelTag::Knn),
            "gnb" | "naive_bayes" => Ok(ModelTag::GaussianNb),
            other => Err(Error::Config(format!(
                "unknown model tag {other:?} (expected dt, rf, gbdt, adaboost, knn or gnb)"
            ))),
        }
    }
}

/// Per-algorithm key/value hyperparameters. Keys are validated against the
/// algorithm before training; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HyperParams(BTreeMap<String, f64>);

impl HyperParams {
    pub fn new() -> Self {
        HyperParams(BTreeMap::new())
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.0.insert(key.to_string(), value);
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.0.get(key).copied()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parse a JSON object of numeric values, e.g. `{"max_depth": 8}`.
    pub fn from_json(json: &str) -> Result<Self> {
        let map: BTreeMap<String, f64> = serde_json::from_str(json)
            .map_err(|e| Error::InvalidHyperParam(format!("hyperparameter JSON: {e}")))?;
        Ok(HyperParams(map))
    }

    fn usize_value(&self, key: &str) -> Result<Option<usize>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) if v.fract() == 0.0 && v >= 0.0 && v <= u32::MAX as f64 => {
                Ok(Some(v as usize))
            }
            Some(v) => Err(Error::InvalidHyperParam(format!(
                "{key} must be a non-negative integer, got {v}"
            ))),
        }
    }

    fn usize_min(&self, key: &str, min: usize, default: usize) -> Result<usize> {
        let v = self.usize_value(key)?.unwrap_or(default);
        if v < min {
            return Err(Error::InvalidHyperParam(format!("{key} must be >= {min}, got {v}")));
        }
        Ok(v)
    }

    /// `max_depth`: absent or 0 means unlimited.
    fn max_depth(&self) -> Result<usize> {
        Ok(match self.usize_value("max_depth")? {
            None | Some(0) => usize::MAX,
            Some(d) => d,
        })
    }

    fn unit_fraction(&self, key: &str, default: f64, allow_zero: bool) -> Result<f64> {
        let v = self.get(key).unwrap_or(default);
        let lo_ok = if allow_zero { v >= 0.0 } else { v > 0.0 };
        if !(lo_ok && v <= 1.0 && v.is_finite()) {
            return Err(Error::InvalidHyperParam(format!(
                "{key} must lie in {}, got {v}",
                if allow_zero { "[0, 1]" } else { "(0, 1]" }
            )));
        }
        Ok(v)
    }

    fn seed(&self) -> Result<u64> {
        match self.get("seed") {
            None => Ok(42),
            Some(v) if v.fract() == 0.0 && v >= 0.0 => Ok(v as u64),
            Some(v) => Err(Error::InvalidHyperParam(format!(
                "seed must be a non-negative integer, got {v}"
            ))),
        }
    }

    fn reject_unknown(&self, tag: ModelTag) -> Result<()> {
        let allowed: &[&str] = match tag {
            ModelTag::DecisionTree => &["max_depth", "min_samples_leaf", "seed"],
            ModelTag::RandomForest => &[
                "n_trees",
                "max_depth",
                "min_samples_leaf",
                "subsample",
                "colsample",
                "seed",
            ],
            ModelTag::Gbdt => &[
                "n_rounds",
                "learning_rate",
                "max_leaves",
                "max_depth",
                "min_samples_leaf",
                "n_bins",
                "lambda",
                "subsample",
                "colsample",
                "seed",
            ],
            ModelTag::AdaBoost => &["n_rounds", "seed"],
            ModelTag::Knn => &["k", "seed"],
            ModelTag::GaussianNb => &["seed"],
        };
        for key in self.keys() {
            if !allowed.contains(&key) {
                return Err(Error::InvalidHyperParam(format!(
                    "{key:?} is not a hyperparameter of {tag}"
                )));
            }
        }
        Ok(())
    }
}

/// A trained classifier: the tag, the hyperparameters it was trained with,
/// the expected feature width, and the fitted state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Model {
    pub tag: ModelTag,
    pub hyperparams: HyperParams,
    pub n_features: usize,
    pub kind: ModelKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    DecisionTree {
        root: TreeNode,
    },
    RandomForest {
        trees: Vec<TreeNode>,
        seeds: Vec<u64>,
    },
    Gbdt(GbdtModel),
    AdaBoost {
        stumps: Vec<adaboost::Stump>,
        stump_weights: Vec<f64>,
        /// Training class priors; the fallback distribution when boosting
        /// stopped before producing any usable stump.
        priors: Vec<f64>,
    },
    Knn {
        matrix: Vec<Vec<f64>>,
        labels: Vec<usize>,
        k: usize,
    },
    GaussianNb {
        means: Vec<Vec<f64>>,
        variances: Vec<Vec<f64>>,
        priors: Vec<f64>,
    },
}

fn check_trainable(data: &LabeledDataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyTrain);
    }
    Ok(())
}

/// Train the algorithm selected by `tag`.
pub fn train(tag: ModelTag, data: &LabeledDataset, hp: &HyperParams) -> Result<Model> {
    hp.reject_unknown(tag)?;
    check_trainable(data)?;
    match tag {
        ModelTag::DecisionTree => train_decision_tree(data, hp),
        ModelTag::RandomForest => train_random_forest(data, hp),
        ModelTag::Gbdt => train_gbdt(data, hp),
        ModelTag::AdaBoost => train_adaboost(data, hp),
        ModelTag::Knn => train_knn(data, hp),
        ModelTag::GaussianNb => train_gaussian_nb(data),
    }
}

pub fn train_decision_tree(data: &LabeledDataset, hp: &HyperParams) -> Result<Model> {
    check_trainable(data)?;
    let cfg = tree::TreeConfig {
        max_depth: hp.max_depth()?,
        min_samples_leaf: hp.usize_min("min_samples_leaf", 1, 1)?,
        mtry: None,
    };
    let labels: Vec<usize> = data.labels.iter().map(|l| l.index()).collect();
    let rows: Vec<usize> = (0..data.len()).collect();
    let root = tree::grow_tree(&data.features, &labels, rows, &cfg, &mut None);
    Ok(Model {
        tag: ModelTag::DecisionTree,
        hyperparams: hp.clone(),
        n_features: data.width(),
        kind: ModelKind::DecisionTree { root },
    })
}

pub fn train_random_forest(data: &LabeledDataset, hp: &HyperParams) -> Result<Model> {
    check_trainable(data)?;
    forest::train(data, hp)
}

pub fn train_gbdt(data: &LabeledDataset, hp: &HyperParams) -> Result<Model> {
    check_trainable(data)?;
    gbdt::train(data, hp)
}

pub fn train_adaboost(data: &LabeledDataset, hp: &HyperParams) -> Result<Model> {
    check_trainable(data)?;
    adaboost::train(data, hp)
}

pub fn train_knn(data: &LabeledDataset, hp: &HyperParams) -> Result<Model> {
    check_trainable(data)?;
    knn::train(data, hp)
}

pub fn train_gaussian_nb(data: &LabeledDataset) -> Result<Model> {
    check_trainable(data)?;
    naive_bayes::train(data)
}

/// Predicted label per row: the argmax of [`predict_proba`], ties to the
/// lowest class index.
pub fn predict(model: &Model, features: &[Vec<f64>]) -> Result<Vec<EmotionLabel>> {
    let proba = predict_proba(model, features)?;
    Ok(proba
        .iter()
        .map(|p| EmotionLabel::from_index(argmax(p)).unwrap())
        .collect())
}

/// Per-class probability distribution per row; each row sums to 1.
pub fn predict_proba(model: &Model, features: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    for (i, row) in features.iter().enumerate() {
        if row.len() != model.n_features {
            return Err(Error::Shape(format!(
                "row {i} has width {}, model expects {}",
                row.len(),
                model.n_features
            )));
        }
    }
    let proba = match &model.kind {
        ModelKind::DecisionTree { root } => features
            .iter()
            .map(|row| root.class_scores(row).to_vec())
            .collect(),
        ModelKind::RandomForest { trees, .. } => forest::predict_proba(trees, features),
        ModelKind::Gbdt(gbdt) => gbdt.predict_proba(features),
        ModelKind::AdaBoost {
            stumps,
            stump_weights,
            priors,
        } => adaboost::predict_proba(stumps, stump_weights, priors, features),
        ModelKind::Knn { matrix, labels, k } => knn::predict_proba(matrix, labels, *k, features),
        ModelKind::GaussianNb {
            means,
            variances,
            priors,
        } => naive_bayes::predict_proba(means, variances, priors, features),
    };
    Ok(proba)
}

/// Index of the largest value, ties to the lowest index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

const _: () = assert!(NUM_CLASSES == 9);

/// Serialize to the versioned JSON model document.
pub fn model_to_json(model: &Model) -> Result<String> {
    let doc = serde_json::json!({
        "format_version": format!("{}.{}", MODEL_FORMAT_VERSION.0, MODEL_FORMAT_VERSION.1),
        "model": model,
    });
    serde_json::to_string_pretty(&doc)
        .map_err(|e| Error::Format(format!("serializing model: {e}")))
}

/// Load a model document; the major version must match.
pub fn model_from_json(json: &str) -> Result<Model> {
    let doc: serde_json::Value = serde_json::from_str(json)
        .map_err(|e| Error::Format(format!("model document: {e}")))?;
    let version = doc
        .get("format_version")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::Format("model document lacks format_version".into()))?;
    let major: u32 = version
        .split('.')
        .next()
        .and_then(|m| m.parse().ok())
        .ok_or_else(|| Error::Format(format!("bad format_version {version:?}")))?;
    if major != MODEL_FORMAT_VERSION.0 {
        return Err(Error::Format(format!(
            "model format {version} is incompatible with {}.{}",
            MODEL_FORMAT_VERSION.0, MODEL_FORMAT_VERSION.1
        )));
    }
    serde_json::from_value(doc["model"].clone())
        .map_err(|e| Error::Format(format!("model document: {e}")))
}
