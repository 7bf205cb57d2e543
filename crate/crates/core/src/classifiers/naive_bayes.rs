//! Gaussian naive Bayes with per-class diagonal covariances.

use super::{HyperParams, Model, ModelKind, ModelTag};
use crate::dataset::{LabeledDataset, NUM_CLASSES};
use crate::error::Result;

/// Variance floor so constant features keep finite likelihoods.
const VAR_FLOOR: f64 = 1e-9;

pub fn train(data: &LabeledDataset) -> Result<Model> {
    let width = data.width();
    let n = data.len();

    let mut counts = vec![0usize; NUM_CLASSES];
    let mut means = vec![vec![0.0f64; width]; NUM_CLASSES];
    for (row, label) in data.features.iter().zip(&data.labels) {
        let k = label.index();
        counts[k] += 1;
        for (j, &v) in row.iter().enumerate() {
            means[k][j] += v;
        }
    }
    for (k, mean) in means.iter_mut().enumerate() {
        if counts[k] > 0 {
            for m in mean.iter_mut() {
                *m /= counts[k] as f64;
            }
        }
    }

    let mut variances = vec![vec![0.0f64; width]; NUM_CLASSES];
    for (row, label) in data.features.iter().zip(&data.labels) {
        let k = label.index();
        for (j, &v) in row.iter().enumerate() {
            let d = v - means[k][j];
            variances[k][j] += d * d;
        }
    }
    for (k, var) in variances.iter_mut().enumerate() {
        for v in var.iter_mut() {
            *v = if counts[k] > 0 {
                (*v / counts[k] as f64).max(VAR_FLOOR)
            } else {
                VAR_FLOOR
            };
        }
    }

    let priors: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();

    Ok(Model {
        tag: ModelTag::GaussianNb,
        hyperparams: HyperParams::new(),
        n_features: width,
        kind: ModelKind::GaussianNb {
            means,
            variances,
            priors,
        },
    })
}

/// Posterior distribution from the per-class diagonal Gaussians; classes with
/// zero prior get probability zero.
pub fn predict_proba(
    means: &[Vec<f64>],
    variances: &[Vec<f64>],
    priors: &[f64],
    features: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    features
        .iter()
        .map(|row| {
            let mut log_post = vec![f64::NEG_INFINITY; NUM_CLASSES];
            for k in 0..NUM_CLASSES {
                if priors[k] <= 0.0 {
                    continue;
                }
                let mut lp = priors[k].ln();
                for (j, &x) in row.iter().enumerate() {
                    let var = variances[k][j];
                    let d = x - means[k][j];
                    lp += -0.5 * (2.0 * std::f64::consts::PI * var).ln() - d * d / (2.0 * var);
                }
                log_post[k] = lp;
            }
            let max = log_post.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut probs: Vec<f64> = log_post
                .iter()
                .map(|&lp| if lp.is_finite() { (lp - max).exp() } else { 0.0 })
                .collect();
            let sum: f64 = probs.iter().sum();
            for p in &mut probs {
                *p /= sum;
            }
            probs
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::predict;
    use crate::dataset::EmotionLabel;

    #[test]
    fn symmetric_classes_split_at_the_midpoint() {
        // Equal priors, symmetric means, equal variances: the decision
        // boundary is the midpoint of the means. Locate it by bisection.
        let features = vec![vec![-3.0], vec![-2.0], vec![-1.0], vec![1.0], vec![2.0], vec![3.0]];
        let labels = vec![
            EmotionLabel::Calmness,
            EmotionLabel::Calmness,
            EmotionLabel::Calmness,
            EmotionLabel::Anger,
            EmotionLabel::Anger,
            EmotionLabel::Anger,
        ];
        let data = LabeledDataset::from_rows(
            features,
            labels,
            (0..6).map(|i| format!("g{i}")).collect(),
        )
        .unwrap();
        let model = train(&data).unwrap();

        let classify = |x: f64| predict(&model, &[vec![x]]).unwrap()[0];
        let (mut lo, mut hi) = (-2.0f64, 2.0f64);
        assert_eq!(classify(lo), EmotionLabel::Calmness);
        assert_eq!(classify(hi), EmotionLabel::Anger);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if classify(mid) == EmotionLabel::Calmness {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let boundary = 0.5 * (lo + hi);
        assert!(boundary.abs() <= 1e-6, "boundary at {boundary}");
    }

    #[test]
    fn posteriors_sum_to_one_and_skip_absent_classes() {
        let data = LabeledDataset::from_rows(
            vec![vec![0.0], vec![0.5], vec![10.0], vec![10.5]],
            vec![
                EmotionLabel::Fear,
                EmotionLabel::Fear,
                EmotionLabel::Sadness,
                EmotionLabel::Sadness,
            ],
            (0..4).map(|i| format!("g{i}")).collect(),
        )
        .unwrap();
        let model = train(&data).unwrap();
        let proba = crate::classifiers::predict_proba(&model, &[vec![0.2], vec![20.0]]).unwrap();
        for row in &proba {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for (k, &p) in row.iter().enumerate() {
                let present = k == EmotionLabel::Fear.index() || k == EmotionLabel::Sadness.index();
                if !present {
                    assert_eq!(p, 0.0);
                }
            }
        }
    }

    #[test]
    fn constant_feature_survives_via_variance_floor() {
        let data = LabeledDataset::from_rows(
            vec![vec![1.0, 0.0], vec![1.0, 1.0]],
            vec![EmotionLabel::Fear, EmotionLabel::Anger],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let model = train(&data).unwrap();
        let proba = crate::classifiers::predict_proba(&model, &[vec![1.0, 0.4]]).unwrap();
        assert!(proba[0].iter().all(|p| p.is_finite()));
    }
}
