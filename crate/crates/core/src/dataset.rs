//! Core dataset types: emotion labels and the labeled feature table.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Number of emotion classes. Fixed for every model in this crate.
pub const NUM_CLASSES: usize = 9;

/// The nine discrete emotion classes.
///
/// The declaration order is the canonical class-index order used by every
/// classifier, confusion matrix and probability vector in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionLabel {
    Calmness,
    Surprise,
    Amusement,
    Fear,
    Excitement,
    Disgust,
    Happiness,
    Anger,
    Sadness,
}

impl EmotionLabel {
    pub const ALL: [EmotionLabel; NUM_CLASSES] = [
        EmotionLabel::Calmness,
        EmotionLabel::Surprise,
        EmotionLabel::Amusement,
        EmotionLabel::Fear,
        EmotionLabel::Excitement,
        EmotionLabel::Disgust,
        EmotionLabel::Happiness,
        EmotionLabel::Anger,
        EmotionLabel::Sadness,
    ];

    /// Canonical class index, 0..9.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Inverse of [`EmotionLabel::index`].
    pub fn from_index(idx: usize) -> Option<EmotionLabel> {
        Self::ALL.get(idx).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EmotionLabel::Calmness => "calmness",
            EmotionLabel::Surprise => "surprise",
            EmotionLabel::Amusement => "amusement",
            EmotionLabel::Fear => "fear",
            EmotionLabel::Excitement => "excitement",
            EmotionLabel::Disgust => "disgust",
            EmotionLabel::Happiness => "happiness",
            EmotionLabel::Anger => "anger",
            EmotionLabel::Sadness => "sadness",
        }
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EmotionLabel {
    type Err = Error;

    /// Parses the exact lowercase label names; anything else is a
    /// [`Error::Label`] (the label set is closed).
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::Label(s.to_string()))
    }
}

/// Per-row metadata carried through feature tables so loading and writing
/// round-trips losslessly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowMeta {
    pub trial_id: String,
    pub valence: Option<u8>,
    pub arousal: Option<u8>,
}

impl RowMeta {
    pub fn new(trial_id: impl Into<String>) -> Self {
        RowMeta {
            trial_id: trial_id.into(),
            valence: None,
            arousal: None,
        }
    }
}

/// A feature matrix with emotion labels and group keys (the subject id).
///
/// Rows align across `features`, `labels`, `groups` and `meta`. The feature
/// width is normally the canonical 34-feature vector but any fixed width is
/// accepted, which keeps the classifier layer usable on synthetic benchmark
/// data of other shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<EmotionLabel>,
    pub groups: Vec<String>,
    pub meta: Vec<RowMeta>,
}

impl LabeledDataset {
    pub fn new(
        features: Vec<Vec<f64>>,
        labels: Vec<EmotionLabel>,
        groups: Vec<String>,
        meta: Vec<RowMeta>,
    ) -> Result<Self> {
        let n = features.len();
        if labels.len() != n || groups.len() != n || meta.len() != n {
            return Err(Error::Shape(format!(
                "rows disagree: {} features, {} labels, {} groups, {} meta",
                n,
                labels.len(),
                groups.len(),
                meta.len()
            )));
        }
        if let Some(w) = features.first().map(Vec::len) {
            if let Some(bad) = features.iter().find(|r| r.len() != w) {
                return Err(Error::Shape(format!(
                    "ragged feature matrix: expected width {w}, found {}",
                    bad.len()
                )));
            }
        }
        Ok(LabeledDataset {
            features,
            labels,
            groups,
            meta,
        })
    }

    /// Convenience constructor for tests and benchmarks where trial metadata
    /// does not matter.
    pub fn from_rows(
        features: Vec<Vec<f64>>,
        labels: Vec<EmotionLabel>,
        groups: Vec<String>,
    ) -> Result<Self> {
        let meta = (0..features.len())
            .map(|i| RowMeta::new(format!("row{i:04}")))
            .collect();
        Self::new(features, labels, groups, meta)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Feature width, or 0 for an empty dataset.
    pub fn width(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    /// Distinct group keys in first-appearance order.
    pub fn distinct_groups(&self) -> Vec<String> {
        let mut seen = Vec::new();
        for g in &self.groups {
            if !seen.contains(g) {
                seen.push(g.clone());
            }
        }
        seen
    }

    /// New dataset containing only the given row indices, in the given order.
    pub fn select(&self, rows: &[usize]) -> LabeledDataset {
        LabeledDataset {
            features: rows.iter().map(|&i| self.features[i].clone()).collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            groups: rows.iter().map(|&i| self.groups[i].clone()).collect(),
            meta: rows.iter().map(|&i| self.meta[i].clone()).collect(),
        }
    }
}
