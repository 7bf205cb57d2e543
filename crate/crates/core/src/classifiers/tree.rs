//! CART classification trees (Gini impurity, exhaustive midpoint scan) and
//! the regression-tree node type shared with the boosting module.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::NUM_CLASSES;

/// A classification tree node. Split predicates send `x <= threshold` left.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature_index: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        /// Class frequency distribution at the leaf; sums to 1.
        class_scores: Vec<f64>,
    },
}

impl TreeNode {
    pub fn class_scores(&self, row: &[f64]) -> &[f64] {
        match self {
            TreeNode::Leaf { class_scores } => class_scores,
            TreeNode::Split {
                feature_index,
                threshold,
                left,
                right,
            } => {
                if row[*feature_index] <= *threshold {
                    left.class_scores(row)
                } else {
                    right.class_scores(row)
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

/// A regression tree node (used per class by the boosting module).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum RegNode {
    Split {
        feature_index: usize,
        threshold: f64,
        left: Box<RegNode>,
        right: Box<RegNode>,
    },
    Leaf {
        value: f64,
    },
}

impl RegNode {
    pub fn value(&self, row: &[f64]) -> f64 {
        match self {
            RegNode::Leaf { value } => *value,
            RegNode::Split {
                feature_index,
                threshold,
                left,
                right,
            } => {
                if row[*feature_index] <= *threshold {
                    left.value(row)
                } else {
                    right.value(row)
                }
            }
        }
    }
}

pub struct TreeConfig {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Number of candidate features per split; `None` means all.
    pub mtry: Option<usize>,
}

/// The best split found for a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature_index: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Recursive CART growth over the rows in `rows`.
///
/// Candidate thresholds are midpoints between consecutive distinct sorted
/// values; ties on gain resolve to the lowest feature index then the lowest
/// threshold. Growth stops at max depth, when a node is pure, or when no
/// split leaves `min_samples_leaf` rows on both sides with positive gain.
pub fn grow_tree(
    features: &[Vec<f64>],
    labels: &[usize],
    rows: Vec<usize>,
    cfg: &TreeConfig,
    rng: &mut Option<&mut ChaCha8Rng>,
) -> TreeNode {
    grow(features, labels, rows, cfg, rng, 0)
}

fn grow(
    features: &[Vec<f64>],
    labels: &[usize],
    rows: Vec<usize>,
    cfg: &TreeConfig,
    rng: &mut Option<&mut ChaCha8Rng>,
    depth: usize,
) -> TreeNode {
    let counts = class_counts(labels, &rows);
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if pure || depth >= cfg.max_depth || rows.len() < 2 * cfg.min_samples_leaf {
        return leaf(&counts, rows.len());
    }

    let candidates = candidate_features(features[rows[0]].len(), cfg.mtry, rng);
    let best = best_split(features, labels, &rows, &counts, &candidates, cfg.min_samples_leaf);
    // Zero-gain splits are taken: on XOR-shaped data the root split is
    // uninformative alone but unlocks pure children one level down.
    match best {
        Some(split) => {
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                .into_iter()
                .partition(|&r| features[r][split.feature_index] <= split.threshold);
            TreeNode::Split {
                feature_index: split.feature_index,
                threshold: split.threshold,
                left: Box::new(grow(features, labels, left_rows, cfg, rng, depth + 1)),
                right: Box::new(grow(features, labels, right_rows, cfg, rng, depth + 1)),
            }
        }
        _ => leaf(&counts, rows.len()),
    }
}

/// Feature subset for one split: all features, or an `mtry`-sized random
/// draw without replacement, reported in ascending order so the tie-break
/// stays canonical.
fn candidate_features(
    n_features: usize,
    mtry: Option<usize>,
    rng: &mut Option<&mut ChaCha8Rng>,
) -> Vec<usize> {
    match (mtry, rng) {
        (Some(m), Some(rng)) if m < n_features => {
            let mut all: Vec<usize> = (0..n_features).collect();
            all.shuffle(rng);
            let mut chosen: Vec<usize> = all.into_iter().take(m).collect();
            chosen.sort_unstable();
            chosen
        }
        _ => (0..n_features).collect(),
    }
}

/// Exhaustive scan over (feature, midpoint) pairs; `None` when no candidate
/// satisfies the leaf-size constraint.
pub fn best_split(
    features: &[Vec<f64>],
    labels: &[usize],
    rows: &[usize],
    parent_counts: &[usize; NUM_CLASSES],
    candidate_features: &[usize],
    min_samples_leaf: usize,
) -> Option<SplitChoice> {
    let n = rows.len();
    let parent_gini = gini(parent_counts, n);
    let mut best: Option<SplitChoice> = None;

    for &f in candidate_features {
        let mut order: Vec<usize> = rows.to_vec();
        order.sort_by(|&a, &b| features[a][f].partial_cmp(&features[b][f]).unwrap());

        let mut left = [0usize; NUM_CLASSES];
        let mut right = *parent_counts;
        for i in 1..n {
            let moved = order[i - 1];
            left[labels[moved]] += 1;
            right[labels[moved]] -= 1;

            let prev = features[order[i - 1]][f];
            let next = features[order[i]][f];
            if next <= prev {
                continue;
            }
            if i < min_samples_leaf || n - i < min_samples_leaf {
                continue;
            }
            let threshold = 0.5 * (prev + next);
            let weighted =
                (i as f64 * gini(&left, i) + (n - i) as f64 * gini(&right, n - i)) / n as f64;
            let gain = parent_gini - weighted;
            if best.as_ref().map_or(true, |b| gain > b.gain) {
                best = Some(SplitChoice {
                    feature_index: f,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

fn class_counts(labels: &[usize], rows: &[usize]) -> [usize; NUM_CLASSES] {
    let mut counts = [0usize; NUM_CLASSES];
    for &r in rows {
        counts[labels[r]] += 1;
    }
    counts
}

pub(crate) fn gini(counts: &[usize; NUM_CLASSES], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for &c in counts {
        let p = c as f64 / n as f64;
        sum += p * p;
    }
    1.0 - sum
}

fn leaf(counts: &[usize; NUM_CLASSES], n: usize) -> TreeNode {
    let class_scores = counts.iter().map(|&c| c as f64 / n as f64).collect();
    TreeNode::Leaf { class_scores }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{predict, train_decision_tree, HyperParams};
    use crate::dataset::{EmotionLabel, LabeledDataset};

    fn xor_dataset() -> LabeledDataset {
        LabeledDataset::from_rows(
            vec![
                vec![0.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
            ],
            vec![
                EmotionLabel::Calmness,
                EmotionLabel::Surprise,
                EmotionLabel::Surprise,
                EmotionLabel::Calmness,
            ],
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
        )
        .unwrap()
    }

    #[test]
    fn xor_solved_at_depth_two() {
        let data = xor_dataset();
        let hp = HyperParams::new().with("max_depth", 2.0);
        let model = train_decision_tree(&data, &hp).unwrap();
        let preds = predict(&model, &data.features).unwrap();
        assert_eq!(preds, data.labels);
    }

    #[test]
    fn single_class_collapses_to_leaf() {
        let data = LabeledDataset::from_rows(
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![EmotionLabel::Anger; 3],
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap();
        let model = train_decision_tree(&data, &HyperParams::new()).unwrap();
        match &model.kind {
            crate::classifiers::ModelKind::DecisionTree { root } => {
                assert!(matches!(root, TreeNode::Leaf { .. }));
            }
            _ => unreachable!(),
        }
        let preds = predict(&model, &[vec![5.0]]).unwrap();
        assert_eq!(preds, vec![EmotionLabel::Anger]);
    }

    #[test]
    fn pure_split_reaches_zero_gini_children() {
        // Feature 0 separates the classes exactly at 0.5.
        let features = vec![vec![0.0], vec![0.2], vec![0.8], vec![1.0]];
        let labels = vec![0usize, 0, 3, 3];
        let rows: Vec<usize> = (0..4).collect();
        let mut counts = [0usize; NUM_CLASSES];
        counts[0] = 2;
        counts[3] = 2;
        let split = best_split(&features, &labels, &rows, &counts, &[0], 1).unwrap();
        assert_eq!(split.feature_index, 0);
        assert!((split.threshold - 0.5).abs() < 1e-12);
        // Parent gini is 0.5 and the children are pure.
        assert!((split.gain - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tie_breaks_to_lowest_feature_and_threshold() {
        // Both features split perfectly; feature 0 must win. Within feature 0
        // a duplicate perfect threshold cannot occur, so construct equal-gain
        // thresholds across features instead.
        let features = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let labels = vec![0usize, 1];
        let rows = vec![0, 1];
        let mut counts = [0usize; NUM_CLASSES];
        counts[0] = 1;
        counts[1] = 1;
        let split = best_split(&features, &labels, &rows, &counts, &[0, 1], 1).unwrap();
        assert_eq!(split.feature_index, 0);
    }

    #[test]
    fn min_samples_leaf_respected() {
        let features = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let labels = vec![0usize, 0, 0, 1];
        let rows: Vec<usize> = (0..4).collect();
        let mut counts = [0usize; NUM_CLASSES];
        counts[0] = 3;
        counts[1] = 1;
        // A leaf minimum of 2 forbids the pure 3/1 split at 2.5.
        let split = best_split(&features, &labels, &rows, &counts, &[0], 2).unwrap();
        assert!((split.threshold - 1.5).abs() < 1e-12);
    }
}
