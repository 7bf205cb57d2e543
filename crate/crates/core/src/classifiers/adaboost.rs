//! Multiclass AdaBoost (SAMME) on depth-1 decision stumps.

use serde::{Deserialize, Serialize};

use super::{argmax, HyperParams, Model, ModelKind, ModelTag};
use crate::dataset::{LabeledDataset, NUM_CLASSES};
use crate::error::Result;

/// Floor applied to the weighted error so a perfect stump keeps a finite
/// round weight.
const ERR_FLOOR: f64 = 1e-10;

/// A depth-1 stump: one threshold, one predicted class per side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature_index: usize,
    pub threshold: f64,
    pub left_class: usize,
    pub right_class: usize,
}

impl Stump {
    pub fn predict(&self, row: &[f64]) -> usize {
        if row[self.feature_index] <= self.threshold {
            self.left_class
        } else {
            self.right_class
        }
    }
}

pub fn train(data: &LabeledDataset, hp: &HyperParams) -> Result<Model> {
    let n_rounds = hp.usize_min("n_rounds", 1, 50)?;
    let _ = hp.seed()?; // no randomness: the stump search is exhaustive
    let n = data.len();
    let labels: Vec<usize> = data.labels.iter().map(|l| l.index()).collect();

    let mut priors = vec![0.0f64; NUM_CLASSES];
    for &l in &labels {
        priors[l] += 1.0 / n as f64;
    }

    let mut weights = vec![1.0 / n as f64; n];
    let mut stumps = Vec::new();
    let mut stump_weights = Vec::new();

    // SAMME keeps a stump only while it beats random guessing over 9 classes.
    let max_err = 1.0 - 1.0 / NUM_CLASSES as f64;
    for _ in 0..n_rounds {
        let (stump, _) = best_stump(&data.features, &labels, &weights);
        // Recompute the weighted error from actual mispredictions; the scan
        // error carries float dust that must not mask a perfect stump.
        let misses: Vec<bool> = (0..n)
            .map(|i| stump.predict(&data.features[i]) != labels[i])
            .collect();
        let err: f64 = misses
            .iter()
            .zip(&weights)
            .filter(|(&m, _)| m)
            .map(|(_, &w)| w)
            .sum();
        if err >= max_err {
            break;
        }
        let floored = err.max(ERR_FLOOR);
        let alpha = ((1.0 - floored) / floored).ln() + ((NUM_CLASSES - 1) as f64).ln();
        stumps.push(stump);
        stump_weights.push(alpha);
        if misses.iter().all(|&m| !m) {
            break; // perfect stump: weights would not change
        }
        let mut total = 0.0;
        for i in 0..n {
            if misses[i] {
                weights[i] *= alpha.exp();
            }
            total += weights[i];
        }
        for w in &mut weights {
            *w /= total;
        }
    }

    Ok(Model {
        tag: ModelTag::AdaBoost,
        hyperparams: hp.clone(),
        n_features: data.width(),
        kind: ModelKind::AdaBoost {
            stumps,
            stump_weights,
            priors,
        },
    })
}

/// Exhaustive weighted stump search over every (feature, midpoint); each side
/// predicts its weighted majority class. Ties resolve to the lowest feature
/// index, lowest threshold, lowest class index.
fn best_stump(features: &[Vec<f64>], labels: &[usize], weights: &[f64]) -> (Stump, f64) {
    let n = features.len();
    let width = features[0].len();

    let mut total_by_class = [0.0f64; NUM_CLASSES];
    for i in 0..n {
        total_by_class[labels[i]] += weights[i];
    }
    let majority = argmax(&total_by_class);
    // Fallback when no feature admits a split: predict the weighted majority
    // on both sides.
    let mut best = (
        Stump {
            feature_index: 0,
            threshold: f64::NEG_INFINITY,
            left_class: majority,
            right_class: majority,
        },
        1.0 - total_by_class[majority],
    );

    for f in 0..width {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| features[a][f].partial_cmp(&features[b][f]).unwrap());

        let mut left = [0.0f64; NUM_CLASSES];
        let mut right = total_by_class;
        for i in 1..n {
            let moved = order[i - 1];
            left[labels[moved]] += weights[moved];
            right[labels[moved]] -= weights[moved];

            let prev = features[order[i - 1]][f];
            let next = features[order[i]][f];
            if next <= prev {
                continue;
            }
            let left_class = argmax(&left);
            let right_class = argmax(&right);
            let err = 1.0 - left[left_class] - right[right_class];
            if err < best.1 {
                best = (
                    Stump {
                        feature_index: f,
                        threshold: 0.5 * (prev + next),
                        left_class,
                        right_class,
                    },
                    err,
                );
            }
        }
    }
    best
}

/// Normalized weighted votes; the prior distribution when no stump survived
/// training.
pub fn predict_proba(
    stumps: &[Stump],
    stump_weights: &[f64],
    priors: &[f64],
    features: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    features
        .iter()
        .map(|row| {
            if stumps.is_empty() {
                return priors.to_vec();
            }
            let mut votes = vec![0.0f64; NUM_CLASSES];
            for (stump, &alpha) in stumps.iter().zip(stump_weights) {
                votes[stump.predict(row)] += alpha;
            }
            let total: f64 = votes.iter().sum();
            if total > 0.0 {
                for v in &mut votes {
                    *v /= total;
                }
            }
            votes
        })
        .collect()
}
