//! K-nearest neighbours with Euclidean distance and majority vote.

use super::{HyperParams, Model, ModelKind, ModelTag};
use crate::dataset::{LabeledDataset, NUM_CLASSES};
use crate::error::{Error, Result};

pub fn train(data: &LabeledDataset, hp: &HyperParams) -> Result<Model> {
    let k = hp.usize_min("k", 1, 5)?;
    if k > data.len() {
        return Err(Error::InvalidK {
            k,
            n_train: data.len(),
        });
    }
    Ok(Model {
        tag: ModelTag::Knn,
        hyperparams: hp.clone(),
        n_features: data.width(),
        kind: ModelKind::Knn {
            matrix: data.features.clone(),
            labels: data.labels.iter().map(|l| l.index()).collect(),
            k,
        },
    })
}

/// Vote fractions over the k nearest rows; distance ties prefer the lower
/// training-row index.
pub fn predict_proba(
    matrix: &[Vec<f64>],
    labels: &[usize],
    k: usize,
    features: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    features
        .iter()
        .map(|row| {
            let mut dist: Vec<(f64, usize)> = matrix
                .iter()
                .enumerate()
                .map(|(i, train_row)| (squared_distance(row, train_row), i))
                .collect();
            dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

            let mut votes = vec![0.0f64; NUM_CLASSES];
            for &(_, idx) in dist.iter().take(k) {
                votes[labels[idx]] += 1.0 / k as f64;
            }
            votes
        })
        .collect()
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::predict;
    use crate::dataset::EmotionLabel;

    fn dataset() -> LabeledDataset {
        LabeledDataset::from_rows(
            vec![
                vec![0.0],
                vec![0.1],
                vec![0.2],
                vec![5.0],
                vec![5.1],
            ],
            vec![
                EmotionLabel::Calmness,
                EmotionLabel::Calmness,
                EmotionLabel::Calmness,
                EmotionLabel::Anger,
                EmotionLabel::Anger,
            ],
            (0..5).map(|i| format!("g{i}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn one_nearest_neighbour_recalls_training_labels() {
        let data = dataset();
        let hp = HyperParams::new().with("k", 1.0);
        let model = train(&data, &hp).unwrap();
        assert_eq!(predict(&model, &data.features).unwrap(), data.labels);
    }

    #[test]
    fn k_equal_n_predicts_majority() {
        let data = dataset();
        let hp = HyperParams::new().with("k", 5.0);
        let model = train(&data, &hp).unwrap();
        let preds = predict(&model, &[vec![100.0]]).unwrap();
        assert_eq!(preds, vec![EmotionLabel::Calmness]);
    }

    #[test]
    fn k_beyond_n_is_invalid() {
        let data = dataset();
        let hp = HyperParams::new().with("k", 6.0);
        assert!(matches!(
            train(&data, &hp),
            Err(Error::InvalidK { k: 6, n_train: 5 })
        ));
    }

    #[test]
    fn distance_tie_prefers_lower_row_index() {
        // Two training rows at the same distance but different labels.
        let data = LabeledDataset::from_rows(
            vec![vec![-1.0], vec![1.0]],
            vec![EmotionLabel::Sadness, EmotionLabel::Fear],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let hp = HyperParams::new().with("k", 1.0);
        let model = train(&data, &hp).unwrap();
        let preds = predict(&model, &[vec![0.0]]).unwrap();
        assert_eq!(preds, vec![EmotionLabel::Sadness]);
    }
}
