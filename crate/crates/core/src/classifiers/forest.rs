//! Random forest: seeded bootstrap, random feature subsets per split,
//! majority vote.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::tree::{grow_tree, TreeConfig, TreeNode};
use super::{argmax, HyperParams, Model, ModelKind, ModelTag};
use crate::dataset::{LabeledDataset, NUM_CLASSES};
use crate::error::Result;

pub fn train(data: &LabeledDataset, hp: &HyperParams) -> Result<Model> {
    let n_trees = hp.usize_min("n_trees", 1, 100)?;
    let max_depth = hp.max_depth()?;
    let min_samples_leaf = hp.usize_min("min_samples_leaf", 1, 1)?;
    // Row sampling: 1.0 (default) bootstraps n rows with replacement, a
    // smaller fraction bootstraps that share, and 0.0 disables resampling so
    // a single tree degenerates to the plain decision tree.
    let subsample = hp.unit_fraction("subsample", 1.0, true)?;
    let n_features = data.width();
    let default_mtry = (n_features as f64).sqrt().ceil() as usize;
    let mtry = match hp.get("colsample") {
        None => default_mtry.min(n_features.max(1)),
        Some(_) => {
            let frac = hp.unit_fraction("colsample", 1.0, false)?;
            ((frac * n_features as f64).ceil() as usize).clamp(1, n_features.max(1))
        }
    };
    let seed = hp.seed()?;

    let labels: Vec<usize> = data.labels.iter().map(|l| l.index()).collect();
    let n = data.len();

    // Every tree derives its own generator from (seed, index), so parallel
    // training is bit-identical to sequential.
    let seeds: Vec<u64> = (0..n_trees)
        .map(|t| seed.wrapping_add((t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
        .collect();

    let trees: Vec<TreeNode> = seeds
        .par_iter()
        .map(|&tree_seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
            let rows: Vec<usize> = if subsample == 0.0 {
                (0..n).collect()
            } else {
                let draws = ((subsample * n as f64).floor() as usize).max(1);
                (0..draws).map(|_| rng.gen_range(0..n)).collect()
            };
            let cfg = TreeConfig {
                max_depth,
                min_samples_leaf,
                mtry: (mtry < n_features).then_some(mtry),
            };
            grow_tree(&data.features, &labels, rows, &cfg, &mut Some(&mut rng))
        })
        .collect();

    Ok(Model {
        tag: ModelTag::RandomForest,
        hyperparams: hp.clone(),
        n_features,
        kind: ModelKind::RandomForest { trees, seeds },
    })
}

/// Vote fractions across trees; each tree votes its leaf argmax so the
/// distribution argmax is exactly the majority vote with lowest-class ties.
pub fn predict_proba(trees: &[TreeNode], features: &[Vec<f64>]) -> Vec<Vec<f64>> {
    features
        .iter()
        .map(|row| {
            let mut votes = vec![0.0f64; NUM_CLASSES];
            for tree in trees {
                votes[argmax(tree.class_scores(row))] += 1.0;
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{predict, train_decision_tree};
    use crate::dataset::EmotionLabel;

    fn dataset() -> LabeledDataset {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..30 {
            let class = i % 3;
            features.push(vec![
                class as f64 * 4.0 + (i % 5) as f64 * 0.1,
                (i % 7) as f64 * 0.05,
            ]);
            labels.push(EmotionLabel::from_index(class).unwrap());
        }
        let groups = (0..30).map(|i| format!("g{}", i % 6)).collect();
        LabeledDataset::from_rows(features, labels, groups).unwrap()
    }

    #[test]
    fn single_unsampled_tree_equals_decision_tree() {
        let data = dataset();
        let hp = HyperParams::new()
            .with("n_trees", 1.0)
            .with("subsample", 0.0)
            .with("colsample", 1.0);
        let forest = train(&data, &hp).unwrap();
        let dt = train_decision_tree(&data, &HyperParams::new()).unwrap();
        let grid: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![i as f64 * 0.3, (i % 9) as f64 * 0.04])
            .collect();
        assert_eq!(
            predict(&forest, &grid).unwrap(),
            predict(&dt, &grid).unwrap()
        );
    }

    #[test]
    fn fixed_seed_reproduces_forest() {
        let data = dataset();
        let hp = HyperParams::new().with("n_trees", 12.0).with("seed", 7.0);
        let a = train(&data, &hp).unwrap();
        let b = train(&data, &hp).unwrap();
        let grid: Vec<Vec<f64>> = (0..25).map(|i| vec![i as f64 * 0.4, 0.1]).collect();
        assert_eq!(predict(&a, &grid).unwrap(), predict(&b, &grid).unwrap());
        assert_eq!(
            serde_json::to_string(&a.kind).unwrap(),
            serde_json::to_string(&b.kind).unwrap()
        );
    }

    #[test]
    fn probabilities_are_vote_fractions() {
        let data = dataset();
        let hp = HyperParams::new().with("n_trees", 8.0);
        let model = train(&data, &hp).unwrap();
        let proba = crate::classifiers::predict_proba(&model, &data.features[..4]).unwrap();
        for row in proba {
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            for v in row {
                let eighth = v * 8.0;
                assert!((eighth - eighth.round()).abs() < 1e-9);
            }
        }
    }
}
