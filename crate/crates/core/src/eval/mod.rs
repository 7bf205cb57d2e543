//! Grouped cross-validation, grid search and learning curves.

mod metrics;

pub use metrics::{evaluate_predictions, Metrics};

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifiers::{self, HyperParams, ModelTag};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::hrv::{apply_minmax, fit_minmax};

/// A deterministic assignment of groups to folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub fold_of_group: BTreeMap<String, usize>,
}

impl FoldAssignment {
    /// (train, test) row indices for one fold, preserving row order.
    pub fn split_rows(&self, groups: &[String], fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, g) in groups.iter().enumerate() {
            if self.fold_of_group[g] == fold {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        (train, test)
    }

    /// Groups assigned to one fold, sorted.
    pub fn groups_in_fold(&self, fold: usize) -> Vec<&str> {
        self.fold_of_group
            .iter()
            .filter(|(_, &f)| f == fold)
            .map(|(g, _)| g.as_str())
            .collect()
    }
}

/// Assign groups to `k` folds: groups sorted by descending example count
/// (ties by name), each placed on the fold with the fewest groups so far
/// (ties by smallest example total, then lowest fold index). Deterministic,
/// no randomness; fold group-counts differ by at most one.
pub fn group_k_fold(groups: &[String], k: usize) -> Result<FoldAssignment> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for g in groups {
        *counts.entry(g.as_str()).or_default() += 1;
    }
    if k == 0 || k > counts.len() {
        return Err(Error::TooManyFolds {
            k,
            groups: counts.len(),
        });
    }

    let mut ordered: Vec<(&str, usize)> = counts.iter().map(|(&g, &c)| (g, c)).collect();
    ordered.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));

    let mut fold_groups = vec![0usize; k];
    let mut fold_examples = vec![0usize; k];
    let mut fold_of_group = BTreeMap::new();
    for (g, c) in ordered {
        let fold = (0..k)
            .min_by(|&a, &b| {
                fold_groups[a]
                    .cmp(&fold_groups[b])
                    .then(fold_examples[a].cmp(&fold_examples[b]))
                    .then(a.cmp(&b))
            })
            .unwrap();
        fold_groups[fold] += 1;
        fold_examples[fold] += c;
        fold_of_group.insert(g.to_string(), fold);
    }
    Ok(FoldAssignment { k, fold_of_group })
}

/// Scalar summary (mean and population std across folds) of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
}

/// One point of a learning curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CurvePoint {
    Point {
        fraction: f64,
        train_accuracy: f64,
        val_accuracy: f64,
    },
    /// The fraction selected no whole group in at least one fold.
    Skipped { fraction: f64 },
}

/// Cross-validation outcome: per-fold metrics plus their summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub model_tag: ModelTag,
    pub hyperparams: HyperParams,
    pub k: usize,
    pub per_fold: Vec<Metrics>,
    pub summary: BTreeMap<String, MetricSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve_points: Option<Vec<CurvePoint>>,
}

impl CvReport {
    fn from_folds(
        model_tag: ModelTag,
        hyperparams: &HyperParams,
        k: usize,
        per_fold: Vec<Metrics>,
    ) -> CvReport {
        let mut summary = BTreeMap::new();
        for (m, name) in Metrics::SCALAR_NAMES.iter().enumerate() {
            let values: Vec<f64> = per_fold.iter().map(|f| f.scalars()[m]).collect();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let var =
                values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
            summary.insert(
                name.to_string(),
                MetricSummary {
                    mean,
                    std: var.sqrt(),
                },
            );
        }
        CvReport {
            model_tag,
            hyperparams: hyperparams.clone(),
            k,
            per_fold,
            summary,
            curve_points: None,
        }
    }

    pub fn mean_accuracy(&self) -> f64 {
        self.summary["accuracy"].mean
    }
}

/// The pipeline run on one fold: scaler fitted on the training rows only,
/// both sides transformed, model trained and scored on the held-out fold.
fn run_fold(
    data: &LabeledDataset,
    assignment: &FoldAssignment,
    fold: usize,
    model_tag: ModelTag,
    hp: &HyperParams,
) -> Result<Metrics> {
    let (train_rows, test_rows) = assignment.split_rows(&data.groups, fold);
    let train = data.select(&train_rows);
    let test = data.select(&test_rows);

    let mut scaler = fit_minmax(&train)?;
    scaler.fitted_on = Some(format!("fold{fold}"));
    let train_scaled = apply_minmax(&scaler, &train)?;
    let test_scaled = apply_minmax(&scaler, &test)?;

    let started = Instant::now();
    let model = classifiers::train(model_tag, &train_scaled, hp)?;
    let preds = classifiers::predict(&model, &test_scaled.features)?;
    let runtime = started.elapsed().as_secs_f64();

    let mut m = evaluate_predictions(&test.labels, &preds)?;
    m.runtime_s = runtime;
    Ok(m)
}

/// Grouped k-fold cross-validation of one model configuration.
pub fn cross_validate(
    data: &LabeledDataset,
    model_tag: ModelTag,
    hp: &HyperParams,
    k: usize,
) -> Result<CvReport> {
    let assignment = group_k_fold(&data.groups, k)?;
    let per_fold: Vec<Metrics> = (0..k)
        .map(|fold| run_fold(data, &assignment, fold, model_tag, hp))
        .collect::<Result<_>>()?;
    Ok(CvReport::from_folds(model_tag, hp, k, per_fold))
}

/// Full cross-validation per grid point; the best mean accuracy wins, ties
/// to the earliest grid entry.
pub fn grid_search(
    data: &LabeledDataset,
    model_tag: ModelTag,
    grid: &[HyperParams],
    k: usize,
) -> Result<(HyperParams, CvReport)> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut best: Option<(HyperParams, CvReport)> = None;
    for hp in grid {
        let report = cross_validate(data, model_tag, hp, k)?;
        let better = best
            .as_ref()
            .map_or(true, |(_, b)| report.mean_accuracy() > b.mean_accuracy());
        if better {
            best = Some((hp.clone(), report));
        }
    }
    Ok(best.unwrap())
}

/// Expand a grid description into hyperparameter combinations.
///
/// Accepts either a JSON array of objects (used verbatim, in order) or an
/// object mapping keys to arrays, expanded as a cartesian product with the
/// rightmost (lexicographically last) key varying fastest.
pub fn parse_grid(json: &str) -> Result<Vec<HyperParams>> {
    let value: serde_json::Value = serde_json::from_str(json)
        .map_err(|e| Error::InvalidHyperParam(format!("grid JSON: {e}")))?;
    match value {
        serde_json::Value::Array(entries) => entries
            .into_iter()
            .map(|e| HyperParams::from_json(&e.to_string()))
            .collect(),
        serde_json::Value::Object(map) => {
            let mut keys = Vec::new();
            let mut axes: Vec<Vec<f64>> = Vec::new();
            for (key, axis) in map {
                let values: Vec<f64> = serde_json::from_value(axis).map_err(|e| {
                    Error::InvalidHyperParam(format!("grid axis {key:?}: {e}"))
                })?;
                if values.is_empty() {
                    return Err(Error::EmptyGrid);
                }
                keys.push(key);
                axes.push(values);
            }
            if keys.is_empty() {
                return Err(Error::EmptyGrid);
            }
            let mut combos = vec![HyperParams::new()];
            for (key, axis) in keys.iter().zip(&axes) {
                let mut next = Vec::with_capacity(combos.len() * axis.len());
                for combo in &combos {
                    for &v in axis {
                        next.push(combo.clone().with(key, v));
                    }
                }
                combos = next;
            }
            Ok(combos)
        }
        _ => Err(Error::InvalidHyperParam(
            "grid JSON must be an object of arrays or an array of objects".into(),
        )),
    }
}

/// Learning curve: for each fraction, train on a seeded group-respecting
/// subsample of every training fold and record train/validation accuracy
/// averaged across folds. Fraction 1.0 reproduces [`cross_validate`].
pub fn learning_curve(
    data: &LabeledDataset,
    model_tag: ModelTag,
    hp: &HyperParams,
    fractions: &[f64],
    k: usize,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    if let Some(&bad) = fractions.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
        return Err(Error::Config(format!(
            "fractions must lie in (0, 1], got {bad}"
        )));
    }
    let assignment = group_k_fold(&data.groups, k)?;

    let mut points = Vec::with_capacity(fractions.len());
    'fractions: for (fi, &fraction) in fractions.iter().enumerate() {
        let mut train_acc_sum = 0.0;
        let mut val_acc_sum = 0.0;
        for fold in 0..k {
            let (train_rows, test_rows) = assignment.split_rows(&data.groups, fold);

            // Group-respecting subsample: keep whole groups, selection seeded
            // per (fraction, fold). At fraction 1.0 all groups survive and
            // row order is untouched.
            let mut train_groups: Vec<&String> = Vec::new();
            for &r in &train_rows {
                if !train_groups.contains(&&data.groups[r]) {
                    train_groups.push(&data.groups[r]);
                }
            }
            let keep = (fraction * train_groups.len() as f64).floor() as usize;
            if keep == 0 {
                points.push(CurvePoint::Skipped { fraction });
                continue 'fractions;
            }
            let selected: Vec<&String> = if keep >= train_groups.len() {
                train_groups
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    seed.wrapping_add((fi as u64) << 32).wrapping_add(fold as u64),
                );
                let mut shuffled = train_groups.clone();
                shuffled.shuffle(&mut rng);
                shuffled.into_iter().take(keep).collect()
            };
            let sub_rows: Vec<usize> = train_rows
                .iter()
                .copied()
                .filter(|&r| selected.contains(&&data.groups[r]))
                .collect();

            let train = data.select(&sub_rows);
            let test = data.select(&test_rows);
            let mut scaler = fit_minmax(&train)?;
            scaler.fitted_on = Some(format!("fold{fold}@{fraction}"));
            let train_scaled = apply_minmax(&scaler, &train)?;
            let test_scaled = apply_minmax(&scaler, &test)?;
            let model = classifiers::train(model_tag, &train_scaled, hp)?;

            let train_preds = classifiers::predict(&model, &train_scaled.features)?;
            let val_preds = classifiers::predict(&model, &test_scaled.features)?;
            train_acc_sum += evaluate_predictions(&train.labels, &train_preds)?.accuracy;
            val_acc_sum += evaluate_predictions(&test.labels, &val_preds)?.accuracy;
        }
        points.push(CurvePoint::Point {
            fraction,
            train_accuracy: train_acc_sum / k as f64,
            val_accuracy: val_acc_sum / k as f64,
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::EmotionLabel;

    fn grouped_dataset(n_groups: usize, per_group: usize) -> LabeledDataset {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        let mut groups = Vec::new();
        for g in 0..n_groups {
            for i in 0..per_group {
                let class = (g + i) % 3;
                features.push(vec![class as f64 * 5.0 + (i as f64) * 0.01, g as f64 * 0.001]);
                labels.push(EmotionLabel::from_index(class).unwrap());
                groups.push(format!("s{g:02}"));
            }
        }
        LabeledDataset::from_rows(features, labels, groups).unwrap()
    }

    #[test]
    fn twenty_three_groups_into_ten_folds() {
        let groups: Vec<String> = (0..23)
            .flat_map(|g| std::iter::repeat(format!("s{g:02}")).take(18))
            .collect();
        let assignment = group_k_fold(&groups, 10).unwrap();
        let mut sizes = vec![0usize; 10];
        for (_, &fold) in &assignment.fold_of_group {
            sizes[fold] += 1;
        }
        assert_eq!(sizes.iter().sum::<usize>(), 23);
        assert!(sizes.iter().all(|&s| s == 2 || s == 3), "{sizes:?}");
    }

    #[test]
    fn leave_one_group_out() {
        let groups: Vec<String> = (0..5).map(|g| format!("g{g}")).collect();
        let assignment = group_k_fold(&groups, 5).unwrap();
        let mut folds: Vec<usize> = assignment.fold_of_group.values().copied().collect();
        folds.sort_unstable();
        assert_eq!(folds, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn train_and_test_groups_disjoint() {
        let data = grouped_dataset(7, 4);
        let assignment = group_k_fold(&data.groups, 3).unwrap();
        for fold in 0..3 {
            let (train, test) = assignment.split_rows(&data.groups, fold);
            let train_groups: Vec<&String> = train.iter().map(|&i| &data.groups[i]).collect();
            for &t in &test {
                assert!(!train_groups.contains(&&data.groups[t]));
            }
        }
    }

    #[test]
    fn too_many_folds_is_error() {
        let groups = vec!["a".to_string(), "b".to_string()];
        assert!(matches!(
            group_k_fold(&groups, 3),
            Err(Error::TooManyFolds { k: 3, groups: 2 })
        ));
    }

    #[test]
    fn deterministic_label_function_scores_one() {
        let data = grouped_dataset(8, 6);
        let report =
            cross_validate(&data, ModelTag::DecisionTree, &HyperParams::new(), 4).unwrap();
        assert!((report.mean_accuracy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn report_mean_is_hand_average() {
        let data = grouped_dataset(6, 5);
        let report =
            cross_validate(&data, ModelTag::GaussianNb, &HyperParams::new(), 3).unwrap();
        let hand: f64 = report.per_fold.iter().map(|m| m.accuracy).sum::<f64>()
            / report.per_fold.len() as f64;
        assert!((report.summary["accuracy"].mean - hand).abs() < 1e-12);
    }

    #[test]
    fn grid_of_one_returns_it() {
        let data = grouped_dataset(6, 5);
        let grid = vec![HyperParams::new().with("max_depth", 3.0)];
        let (best, report) = grid_search(&data, ModelTag::DecisionTree, &grid, 3).unwrap();
        assert_eq!(best, grid[0]);
        assert_eq!(report.hyperparams, grid[0]);
    }

    #[test]
    fn grid_selects_known_best_depth() {
        // Labels need two split levels; depth 1 underfits, depth 2 is exact.
        let mut features = Vec::new();
        let mut labels = Vec::new();
        let mut groups = Vec::new();
        for g in 0..8 {
            for i in 0..8 {
                let a = (i % 4) as f64;
                let b = (i / 4) as f64;
                let class = if a < 2.0 {
                    if b < 1.0 { 0 } else { 1 }
                } else if b < 1.0 {
                    1
                } else {
                    0
                };
                features.push(vec![a + 0.01 * g as f64, b]);
                labels.push(EmotionLabel::from_index(class).unwrap());
                groups.push(format!("g{g}"));
            }
        }
        let data = LabeledDataset::from_rows(features, labels, groups).unwrap();
        let grid = vec![
            HyperParams::new().with("max_depth", 1.0),
            HyperParams::new().with("max_depth", 2.0),
        ];
        let (best, _) = grid_search(&data, ModelTag::DecisionTree, &grid, 4).unwrap();
        assert_eq!(best.get("max_depth"), Some(2.0));
    }

    #[test]
    fn parse_grid_object_expands_product() {
        let grid = parse_grid(r#"{"max_depth": [2, 4], "min_samples_leaf": [1, 3]}"#).unwrap();
        assert_eq!(grid.len(), 4);
        assert_eq!(grid[0].get("max_depth"), Some(2.0));
        assert_eq!(grid[0].get("min_samples_leaf"), Some(1.0));
        assert_eq!(grid[1].get("min_samples_leaf"), Some(3.0));
    }

    #[test]
    fn parse_grid_array_is_verbatim() {
        let grid = parse_grid(r#"[{"k": 1}, {"k": 5}]"#).unwrap();
        assert_eq!(grid.len(), 2);
        assert_eq!(grid[1].get("k"), Some(5.0));
    }

    #[test]
    fn curve_fraction_one_matches_cross_validate() {
        let data = grouped_dataset(8, 6);
        let hp = HyperParams::new();
        let report = cross_validate(&data, ModelTag::DecisionTree, &hp, 4).unwrap();
        let points =
            learning_curve(&data, ModelTag::DecisionTree, &hp, &[0.5, 1.0], 4, 42).unwrap();
        match &points[1] {
            CurvePoint::Point {
                fraction,
                val_accuracy,
                ..
            } => {
                assert_eq!(*fraction, 1.0);
                assert!((val_accuracy - report.mean_accuracy()).abs() < 1e-12);
            }
            other => panic!("unexpected point {other:?}"),
        }
    }

    #[test]
    fn curve_preserves_fraction_order() {
        let data = grouped_dataset(6, 5);
        let fractions = [0.4, 0.7, 1.0];
        let points = learning_curve(
            &data,
            ModelTag::GaussianNb,
            &HyperParams::new(),
            &fractions,
            3,
            1,
        )
        .unwrap();
        let got: Vec<f64> = points
            .iter()
            .map(|p| match p {
                CurvePoint::Point { fraction, .. } | CurvePoint::Skipped { fraction } => *fraction,
            })
            .collect();
        assert_eq!(got, fractions);
    }

    #[test]
    fn tiny_fraction_yields_skip_marker() {
        let data = grouped_dataset(4, 5);
        let points = learning_curve(
            &data,
            ModelTag::GaussianNb,
            &HyperParams::new(),
            &[0.01],
            2,
            1,
        )
        .unwrap();
        assert!(matches!(points[0], CurvePoint::Skipped { fraction } if fraction == 0.01));
    }
}
