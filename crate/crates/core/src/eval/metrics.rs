//! Classification metrics over the nine-class confusion matrix.

use serde::{Deserialize, Serialize};

use crate::dataset::{EmotionLabel, NUM_CLASSES};
use crate::error::{Error, Result};

/// Accuracy, macro and support-weighted precision/recall/F1, the raw
/// confusion matrix (rows = truth, columns = prediction) and the wall-clock
/// cost of producing the predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision_macro: f64,
    pub recall_macro: f64,
    pub f1_macro: f64,
    pub precision_weighted: f64,
    pub recall_weighted: f64,
    pub f1_weighted: f64,
    pub confusion: Vec<Vec<u64>>,
    pub runtime_s: f64,
}

impl Metrics {
    /// The seven scalar metrics in a fixed order, used for report averaging.
    pub const SCALAR_NAMES: [&'static str; 8] = [
        "accuracy",
        "precision_macro",
        "recall_macro",
        "f1_macro",
        "precision_weighted",
        "recall_weighted",
        "f1_weighted",
        "runtime_s",
    ];

    pub fn scalars(&self) -> [f64; 8] {
        [
            self.accuracy,
            self.precision_macro,
            self.recall_macro,
            self.f1_macro,
            self.precision_weighted,
            self.recall_weighted,
            self.f1_weighted,
            self.runtime_s,
        ]
    }
}

/// Score predictions against truth. Per-class precision and recall define
/// 0/0 as 0; macro averages run over the classes present in `y_true`,
/// weighted averages use true-class support.
pub fn evaluate_predictions(y_true: &[EmotionLabel], y_pred: &[EmotionLabel]) -> Result<Metrics> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Shape(format!(
            "{} truths vs {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::Shape("cannot score zero predictions".into()));
    }

    let mut confusion = vec![vec![0u64; NUM_CLASSES]; NUM_CLASSES];
    for (t, p) in y_true.iter().zip(y_pred) {
        confusion[t.index()][p.index()] += 1;
    }

    let total: u64 = y_true.len() as u64;
    let trace: u64 = (0..NUM_CLASSES).map(|k| confusion[k][k]).sum();
    let accuracy = trace as f64 / total as f64;

    let mut precision = [0.0f64; NUM_CLASSES];
    let mut recall = [0.0f64; NUM_CLASSES];
    let mut f1 = [0.0f64; NUM_CLASSES];
    let mut support = [0u64; NUM_CLASSES];
    for k in 0..NUM_CLASSES {
        let tp = confusion[k][k];
        let pred_k: u64 = (0..NUM_CLASSES).map(|t| confusion[t][k]).sum();
        let true_k: u64 = confusion[k].iter().sum();
        support[k] = true_k;
        precision[k] = ratio(tp, pred_k);
        recall[k] = ratio(tp, true_k);
        f1[k] = if precision[k] + recall[k] > 0.0 {
            2.0 * precision[k] * recall[k] / (precision[k] + recall[k])
        } else {
            0.0
        };
    }

    let present: Vec<usize> = (0..NUM_CLASSES).filter(|&k| support[k] > 0).collect();
    let macro_mean = |per: &[f64; NUM_CLASSES]| {
        present.iter().map(|&k| per[k]).sum::<f64>() / present.len() as f64
    };
    let weighted_mean = |per: &[f64; NUM_CLASSES]| {
        present
            .iter()
            .map(|&k| per[k] * support[k] as f64)
            .sum::<f64>()
            / total as f64
    };

    Ok(Metrics {
        accuracy,
        precision_macro: macro_mean(&precision),
        recall_macro: macro_mean(&recall),
        f1_macro: macro_mean(&f1),
        precision_weighted: weighted_mean(&precision),
        recall_weighted: weighted_mean(&recall),
        f1_weighted: weighted_mean(&f1),
        confusion,
        runtime_s: 0.0,
    })
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}
