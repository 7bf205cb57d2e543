//! Gradient-boosted decision trees: one-vs-all softmax objective, leaf-wise
//! tree growth, histogram split finding on equal-frequency bins.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::RegNode;
use super::{HyperParams, Model, ModelKind, ModelTag};
use crate::dataset::{LabeledDataset, NUM_CLASSES};
use crate::error::{Error, Result};

const PRIOR_FLOOR: f64 = 1e-12;

/// Trained boosting state: per-class tree lists plus the softmax bases.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GbdtModel {
    /// `trees[class][round]`.
    pub trees: Vec<Vec<RegNode>>,
    pub learning_rate: f64,
    /// Log-prior raw score per class.
    pub base_scores: Vec<f64>,
    pub lambda: f64,
    /// Mean multiclass cross-entropy on the training set after each round.
    pub train_loss: Vec<f64>,
}

impl GbdtModel {
    /// Raw (pre-softmax) scores per class for one row.
    pub fn raw_scores(&self, row: &[f64]) -> Vec<f64> {
        let mut scores = self.base_scores.clone();
        for (k, class_trees) in self.trees.iter().enumerate() {
            for tree in class_trees {
                scores[k] += self.learning_rate * tree.value(row);
            }
        }
        scores
    }

    pub fn predict_proba(&self, features: &[Vec<f64>]) -> Vec<Vec<f64>> {
        features
            .iter()
            .map(|row| softmax(&self.raw_scores(row)))
            .collect()
    }
}

pub(crate) fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|&s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

struct GbdtConfig {
    n_rounds: usize,
    learning_rate: f64,
    max_leaves: usize,
    max_depth: usize,
    min_samples_leaf: usize,
    n_bins: usize,
    lambda: f64,
    subsample: f64,
    colsample: f64,
    seed: u64,
}

impl GbdtConfig {
    fn from_hp(hp: &HyperParams) -> Result<Self> {
        let learning_rate = hp.get("learning_rate").unwrap_or(0.1);
        if !(learning_rate > 0.0 && learning_rate <= 1.0) {
            return Err(Error::InvalidHyperParam(format!(
                "learning_rate must lie in (0, 1], got {learning_rate}"
            )));
        }
        let lambda = hp.get("lambda").unwrap_or(1.0);
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidHyperParam(format!(
                "lambda must be >= 0, got {lambda}"
            )));
        }
        Ok(GbdtConfig {
            n_rounds: hp.usize_min("n_rounds", 1, 100)?,
            learning_rate,
            max_leaves: hp.usize_min("max_leaves", 2, 31)?,
            max_depth: hp.max_depth()?,
            min_samples_leaf: hp.usize_min("min_samples_leaf", 1, 1)?,
            n_bins: hp.usize_min("n_bins", 2, 255)?,
            lambda,
            subsample: hp.unit_fraction("subsample", 1.0, false)?,
            colsample: hp.unit_fraction("colsample", 1.0, false)?,
            seed: hp.seed()?,
        })
    }
}

/// Equal-frequency bin boundaries, built once on the training matrix. Bin
/// membership is `bin(x) = #(cuts < x)`, so the split "bin <= b" is exactly
/// the raw-feature predicate `x <= cuts[b]` stored in the tree.
pub(crate) struct BinGrid {
    /// Ascending cut values per feature.
    pub cuts: Vec<Vec<f64>>,
}

impl BinGrid {
    pub fn build(features: &[Vec<f64>], n_bins: usize) -> BinGrid {
        let width = features.first().map_or(0, Vec::len);
        let n = features.len();
        let cuts = (0..width)
            .map(|f| {
                let mut values: Vec<f64> = features.iter().map(|row| row[f]).collect();
                values.sort_by(|a, b| a.partial_cmp(b).unwrap());
                values.dedup();
                if values.len() <= n_bins {
                    // One bin per distinct value: binned gain equals exact gain.
                    values.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
                } else {
                    let mut cuts: Vec<f64> = Vec::with_capacity(n_bins - 1);
                    let sorted: Vec<f64> = {
                        let mut all: Vec<f64> = features.iter().map(|row| row[f]).collect();
                        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
                        all
                    };
                    for q in 1..n_bins {
                        let pos = q * n / n_bins;
                        if pos == 0 || pos >= n {
                            continue;
                        }
                        if sorted[pos] > sorted[pos - 1] {
                            let cut = 0.5 * (sorted[pos - 1] + sorted[pos]);
                            if cuts.last().map_or(true, |&c| cut > c) {
                                cuts.push(cut);
                            }
                        }
                    }
                    cuts
                }
            })
            .collect();
        BinGrid { cuts }
    }

    pub fn bin_of(&self, feature: usize, value: f64) -> usize {
        self.cuts[feature].partition_point(|&c| c < value)
    }

    /// Binned copy of the matrix, column-major.
    pub fn bin_matrix(&self, features: &[Vec<f64>]) -> Vec<Vec<u16>> {
        (0..self.cuts.len())
            .map(|f| {
                features
                    .iter()
                    .map(|row| self.bin_of(f, row[f]) as u16)
                    .collect()
            })
            .collect()
    }
}

pub fn train(data: &LabeledDataset, hp: &HyperParams) -> Result<Model> {
    let cfg = GbdtConfig::from_hp(hp)?;
    let n = data.len();
    let labels: Vec<usize> = data.labels.iter().map(|l| l.index()).collect();

    let grid = BinGrid::build(&data.features, cfg.n_bins);
    let binned = grid.bin_matrix(&data.features);

    let mut class_counts = [0usize; NUM_CLASSES];
    for &l in &labels {
        class_counts[l] += 1;
    }
    let base_scores: Vec<f64> = class_counts
        .iter()
        .map(|&c| (c as f64 / n as f64).max(PRIOR_FLOOR).ln())
        .collect();

    // scores[row][class]
    let mut scores: Vec<Vec<f64>> = vec![base_scores.clone(); n];
    let mut trees: Vec<Vec<RegNode>> = vec![Vec::with_capacity(cfg.n_rounds); NUM_CLASSES];
    let mut train_loss = Vec::with_capacity(cfg.n_rounds);

    for round in 0..cfg.n_rounds {
        let probs: Vec<Vec<f64>> = scores.iter().map(|s| softmax(s)).collect();

        let round_rows: Vec<usize> = if cfg.subsample < 1.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, round as u64, 0));
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(&mut rng);
            let keep = ((cfg.subsample * n as f64).floor() as usize).max(1);
            let mut rows: Vec<usize> = all.into_iter().take(keep).collect();
            rows.sort_unstable();
            rows
        } else {
            (0..n).collect()
        };

        // Probabilities are fixed at the round start, so the per-class trees
        // are independent and may train in parallel.
        let round_trees: Vec<GrownTree> = (0..NUM_CLASSES)
            .into_par_iter()
            .map(|k| {
                let grad: Vec<f64> = (0..n)
                    .map(|i| probs[i][k] - if labels[i] == k { 1.0 } else { 0.0 })
                    .collect();
                let hess: Vec<f64> = (0..n).map(|i| probs[i][k] * (1.0 - probs[i][k])).collect();
                let feature_set = select_features(&cfg, round as u64, k as u64, grid.cuts.len());
                grow_leafwise(
                    &binned,
                    &grid,
                    &grad,
                    &hess,
                    round_rows.clone(),
                    &feature_set,
                    &cfg,
                )
            })
            .collect();

        for i in 0..n {
            for (k, tree) in round_trees.iter().enumerate() {
                scores[i][k] += cfg.learning_rate * tree.value_binned(&binned, i);
            }
        }
        for (k, tree) in round_trees.into_iter().enumerate() {
            trees[k].push(tree.into_node(&grid));
        }

        if scores.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGradient);
        }
        let loss = -(0..n)
            .map(|i| softmax(&scores[i])[labels[i]].max(PRIOR_FLOOR).ln())
            .sum::<f64>()
            / n as f64;
        train_loss.push(loss);
    }

    Ok(Model {
        tag: ModelTag::Gbdt,
        hyperparams: hp.clone(),
        n_features: data.width(),
        kind: ModelKind::Gbdt(GbdtModel {
            trees,
            learning_rate: cfg.learning_rate,
            base_scores,
            lambda: cfg.lambda,
            train_loss,
        }),
    })
}

fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    seed.wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

fn select_features(cfg: &GbdtConfig, round: u64, class: u64, width: usize) -> Vec<usize> {
    if cfg.colsample >= 1.0 {
        return (0..width).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, round, class + 1));
    let mut all: Vec<usize> = (0..width).collect();
    all.shuffle(&mut rng);
    let keep = ((cfg.colsample * width as f64).ceil() as usize).clamp(1, width);
    let mut chosen: Vec<usize> = all.into_iter().take(keep).collect();
    chosen.sort_unstable();
    chosen
}

/// A grown tree in arena form; converted to boxed [`RegNode`]s afterwards.
enum ArenaNode {
    Leaf { value: f64 },
    Split { feature: usize, bin: u16, left: usize, right: usize },
}

struct Arena(Vec<ArenaNode>);

impl Arena {
    fn to_node(&self, idx: usize, grid: &BinGrid) -> RegNode {
        match &self.0[idx] {
            ArenaNode::Leaf { value } => RegNode::Leaf { value: *value },
            ArenaNode::Split {
                feature,
                bin,
                left,
                right,
            } => RegNode::Split {
                feature_index: *feature,
                threshold: grid.cuts[*feature][*bin as usize],
                left: Box::new(self.to_node(*left, grid)),
                right: Box::new(self.to_node(*right, grid)),
            },
        }
    }

    fn value_binned(&self, binned: &[Vec<u16>], row: usize) -> f64 {
        let mut idx = 0;
        loop {
            match &self.0[idx] {
                ArenaNode::Leaf { value } => return *value,
                ArenaNode::Split {
                    feature,
                    bin,
                    left,
                    right,
                } => {
                    idx = if binned[*feature][row] <= *bin { *left } else { *right };
                }
            }
        }
    }
}

/// Wrapper so a grown arena travels out of the parallel map with its scoring
/// intact before conversion to the serializable node form.
struct GrownTree(Arena);

impl GrownTree {
    fn value_binned(&self, binned: &[Vec<u16>], row: usize) -> f64 {
        self.0.value_binned(binned, row)
    }

    fn into_node(self, grid: &BinGrid) -> RegNode {
        self.0.to_node(0, grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct BinSplit {
    feature: usize,
    bin: u16,
    gain: f64,
}

/// Heap entry ordering: highest gain first, oldest leaf on ties.
struct HeapEntry {
    gain: f64,
    seq: usize,
    leaf: LeafCandidate,
}

struct LeafCandidate {
    arena_slot: usize,
    rows: Vec<usize>,
    depth: usize,
    split: BinSplit,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.gain == other.gain && self.seq == other.seq
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .partial_cmp(&other.gain)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn grow_leafwise(
    binned: &[Vec<u16>],
    grid: &BinGrid,
    grad: &[f64],
    hess: &[f64],
    rows: Vec<usize>,
    feature_set: &[usize],
    cfg: &GbdtConfig,
) -> GrownTree {
    let g_sum: f64 = rows.iter().map(|&r| grad[r]).sum();
    let h_sum: f64 = rows.iter().map(|&r| hess[r]).sum();
    let mut arena = Arena(vec![ArenaNode::Leaf {
        value: leaf_value(g_sum, h_sum, cfg.lambda),
    }]);

    let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
    let mut seq = 0usize;
    if let Some(split) = best_bin_split(binned, grid, grad, hess, &rows, feature_set, cfg) {
        heap.push(HeapEntry {
            gain: split.gain,
            seq,
            leaf: LeafCandidate {
                arena_slot: 0,
                rows,
                depth: 0,
                split,
            },
        });
        seq += 1;
    }

    let mut n_leaves = 1usize;
    while n_leaves < cfg.max_leaves {
        let Some(entry) = heap.pop() else { break };
        if entry.gain <= 0.0 {
            break;
        }
        let LeafCandidate {
            arena_slot,
            rows,
            depth,
            split,
        } = entry.leaf;

        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&r| binned[split.feature][r] <= split.bin);

        let make_leaf = |rows: &[usize]| {
            let g: f64 = rows.iter().map(|&r| grad[r]).sum();
            let h: f64 = rows.iter().map(|&r| hess[r]).sum();
            ArenaNode::Leaf {
                value: leaf_value(g, h, cfg.lambda),
            }
        };
        let left_slot = arena.0.len();
        arena.0.push(make_leaf(&left_rows));
        let right_slot = arena.0.len();
        arena.0.push(make_leaf(&right_rows));
        arena.0[arena_slot] = ArenaNode::Split {
            feature: split.feature,
            bin: split.bin,
            left: left_slot,
            right: right_slot,
        };
        n_leaves += 1;

        if depth + 1 < cfg.max_depth {
            for (slot, child_rows) in [(left_slot, left_rows), (right_slot, right_rows)] {
                if let Some(split) =
                    best_bin_split(binned, grid, grad, hess, &child_rows, feature_set, cfg)
                {
                    heap.push(HeapEntry {
                        gain: split.gain,
                        seq,
                        leaf: LeafCandidate {
                            arena_slot: slot,
                            rows: child_rows,
                            depth: depth + 1,
                            split,
                        },
                    });
                    seq += 1;
                }
            }
        }
    }
    GrownTree(arena)
}

fn leaf_value(g: f64, h: f64, lambda: f64) -> f64 {
    -g / (h + lambda)
}

fn split_score(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / (h + lambda)
}

/// Histogram scan over every (feature, bin boundary); ties resolve to the
/// lowest feature index, then the lowest bin.
fn best_bin_split(
    binned: &[Vec<u16>],
    grid: &BinGrid,
    grad: &[f64],
    hess: &[f64],
    rows: &[usize],
    feature_set: &[usize],
    cfg: &GbdtConfig,
) -> Option<BinSplit> {
    if rows.len() < 2 * cfg.min_samples_leaf {
        return None;
    }
    let g_total: f64 = rows.iter().map(|&r| grad[r]).sum();
    let h_total: f64 = rows.iter().map(|&r| hess[r]).sum();
    let parent_score = split_score(g_total, h_total, cfg.lambda);

    let mut best: Option<BinSplit> = None;
    for &f in feature_set {
        let n_cuts = grid.cuts[f].len();
        if n_cuts == 0 {
            continue;
        }
        let n_bins = n_cuts + 1;
        let mut hist_g = vec![0.0f64; n_bins];
        let mut hist_h = vec![0.0f64; n_bins];
        let mut hist_n = vec![0usize; n_bins];
        let column = &binned[f];
        for &r in rows {
            let b = column[r] as usize;
            hist_g[b] += grad[r];
            hist_h[b] += hess[r];
            hist_n[b] += 1;
        }

        let mut gl = 0.0;
        let mut hl = 0.0;
        let mut nl = 0usize;
        for b in 0..n_cuts {
            gl += hist_g[b];
            hl += hist_h[b];
            nl += hist_n[b];
            let nr = rows.len() - nl;
            if nl < cfg.min_samples_leaf || nr < cfg.min_samples_leaf {
                continue;
            }
            let gr = g_total - gl;
            let hr = h_total - hl;
            let gain = 0.5
                * (split_score(gl, hl, cfg.lambda) + split_score(gr, hr, cfg.lambda)
                    - parent_score);
            if best.as_ref().map_or(true, |b| gain > b.gain) {
                best = Some(BinSplit {
                    feature: f,
                    bin: b as u16,
                    gain,
                });
            }
        }
    }
    best
}

/// Best histogram-split gain at the root for the given gradients/hessians,
/// exposed so the test suites can compare the binned route against an
/// independently computed exact gain.
pub fn root_split_gain(
    features: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    n_bins: usize,
    lambda: f64,
) -> Option<f64> {
    let grid = BinGrid::build(features, n_bins);
    let binned = grid.bin_matrix(features);
    let rows: Vec<usize> = (0..features.len()).collect();
    let feature_set: Vec<usize> = (0..grid.cuts.len()).collect();
    let cfg = GbdtConfig {
        n_rounds: 1,
        learning_rate: 0.1,
        max_leaves: 2,
        max_depth: usize::MAX,
        min_samples_leaf: 1,
        n_bins,
        lambda,
        subsample: 1.0,
        colsample: 1.0,
        seed: 0,
    };
    best_bin_split(&binned, &grid, grad, hess, &rows, &feature_set, &cfg).map(|s| s.gain)
}

/// Exact (unbinned) best-split gain over raw midpoints, for the test oracles:
/// with one bin per distinct value the histogram gain must match this.
#[cfg(test)]
pub fn exact_best_gain(
    features: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    lambda: f64,
) -> Option<f64> {
    let n = features.len();
    if n < 2 {
        return None;
    }
    let width = features[0].len();
    let g_total: f64 = grad.iter().sum();
    let h_total: f64 = hess.iter().sum();
    let parent = split_score(g_total, h_total, lambda);
    let mut best: Option<f64> = None;
    for f in 0..width {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| features[a][f].partial_cmp(&features[b][f]).unwrap());
        let mut gl = 0.0;
        let mut hl = 0.0;
        for i in 1..n {
            gl += grad[order[i - 1]];
            hl += hess[order[i - 1]];
            if features[order[i]][f] <= features[order[i - 1]][f] {
                continue;
            }
            let gain = 0.5
                * (split_score(gl, hl, lambda)
                    + split_score(g_total - gl, h_total - hl, lambda)
                    - parent);
            if best.map_or(true, |b| gain > b) {
                best = Some(gain);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{predict, predict_proba};
    use crate::dataset::EmotionLabel;

    fn blob_dataset() -> LabeledDataset {
        // Three well-separated 1-D blobs.
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..60 {
            let class = i % 3;
            features.push(vec![class as f64 * 10.0 + (i % 7) as f64 * 0.1]);
            labels.push(EmotionLabel::from_index(class).unwrap());
        }
        LabeledDataset::from_rows(
            features,
            labels,
            (0..60).map(|i| format!("g{}", i % 10)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_class_predicts_that_class() {
        let data = LabeledDataset::from_rows(
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![EmotionLabel::Disgust; 3],
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap();
        let hp = HyperParams::new().with("n_rounds", 1.0).with("learning_rate", 1.0);
        let model = train(&data, &hp).unwrap();
        let preds = predict(&model, &[vec![0.5], vec![9.0]]).unwrap();
        assert!(preds.iter().all(|&p| p == EmotionLabel::Disgust));
    }

    #[test]
    fn zero_rounds_rejected() {
        let data = blob_dataset();
        let hp = HyperParams::new().with("n_rounds", 0.0);
        assert!(matches!(
            train(&data, &hp),
            Err(Error::InvalidHyperParam(_))
        ));
    }

    #[test]
    fn training_loss_non_increasing() {
        let data = blob_dataset();
        let hp = HyperParams::new().with("n_rounds", 25.0).with("learning_rate", 0.3);
        let model = train(&data, &hp).unwrap();
        let ModelKind::Gbdt(gbdt) = &model.kind else { unreachable!() };
        assert_eq!(gbdt.train_loss.len(), 25);
        for w in gbdt.train_loss.windows(2) {
            assert!(
                w[1] <= w[0] + 1e-9,
                "loss increased: {} -> {}",
                w[0],
                w[1]
            );
        }
    }

    #[test]
    fn blobs_fit_cleanly() {
        let data = blob_dataset();
        let hp = HyperParams::new().with("n_rounds", 20.0).with("learning_rate", 0.5);
        let model = train(&data, &hp).unwrap();
        let preds = predict(&model, &data.features).unwrap();
        let correct = preds
            .iter()
            .zip(&data.labels)
            .filter(|(p, l)| p == l)
            .count();
        assert_eq!(correct, data.len());
    }

    #[test]
    fn proba_matches_naive_tree_walk() {
        let data = blob_dataset();
        let hp = HyperParams::new().with("n_rounds", 5.0);
        let model = train(&data, &hp).unwrap();
        let ModelKind::Gbdt(gbdt) = &model.kind else { unreachable!() };
        let proba = predict_proba(&model, &data.features[..5]).unwrap();
        for (i, row) in data.features[..5].iter().enumerate() {
            // Naive accumulation walking every tree independently.
            let mut scores = gbdt.base_scores.clone();
            for (k, class_trees) in gbdt.trees.iter().enumerate() {
                for tree in class_trees {
                    scores[k] += gbdt.learning_rate * tree.value(row);
                }
            }
            let expect = softmax(&scores);
            for k in 0..NUM_CLASSES {
                assert!((proba[i][k] - expect[k]).abs() < 1e-12);
            }
            assert!((proba[i].iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn binned_gain_equals_exact_when_bins_cover_values() {
        let features: Vec<Vec<f64>> = (0..24)
            .map(|i| vec![(i % 6) as f64, ((i * 7) % 5) as f64 * 1.3])
            .collect();
        let grad: Vec<f64> = (0..24).map(|i| ((i * 13) % 9) as f64 / 4.0 - 1.0).collect();
        let hess: Vec<f64> = (0..24).map(|i| 0.1 + ((i * 5) % 7) as f64 * 0.05).collect();
        let cfg = GbdtConfig {
            n_rounds: 1,
            learning_rate: 0.1,
            max_leaves: 31,
            max_depth: usize::MAX,
            min_samples_leaf: 1,
            n_bins: 64,
            lambda: 1.0,
            subsample: 1.0,
            colsample: 1.0,
            seed: 0,
        };
        let grid = BinGrid::build(&features, cfg.n_bins);
        let binned = grid.bin_matrix(&features);
        let rows: Vec<usize> = (0..24).collect();
        let split = best_bin_split(&binned, &grid, &grad, &hess, &rows, &[0, 1], &cfg).unwrap();
        let exact = exact_best_gain(&features, &grad, &hess, cfg.lambda).unwrap();
        assert!(
            (split.gain - exact).abs() <= 1e-9 * exact.abs().max(1.0),
            "{} vs {exact}",
            split.gain
        );
    }
}
