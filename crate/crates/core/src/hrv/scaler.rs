//! Min-max scaling fitted on training rows only.

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// Per-feature min/max fitted on one training fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    /// Identifier of the fold the params were fitted on.
    pub fitted_on: Option<String>,
}

/// Fit per-feature minima and maxima on the training rows.
pub fn fit_minmax(train: &LabeledDataset) -> Result<ScalerParams> {
    if train.is_empty() {
        return Err(Error::EmptyFit);
    }
    let width = train.width();
    let mut min = vec![f64::INFINITY; width];
    let mut max = vec![f64::NEG_INFINITY; width];
    for row in &train.features {
        for (j, &v) in row.iter().enumerate() {
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    Ok(ScalerParams {
        min,
        max,
        fitted_on: None,
    })
}

/// Transform to `(x - min) / (max - min)`, clamped to `[0, 1]` so unseen
/// data cannot escape the training range; a constant feature maps to 0.
pub fn apply_minmax(params: &ScalerParams, dataset: &LabeledDataset) -> Result<LabeledDataset> {
    if dataset.width() != params.min.len() && !dataset.is_empty() {
        return Err(Error::Shape(format!(
            "scaler fitted on width {}, dataset has width {}",
            params.min.len(),
            dataset.width()
        )));
    }
    let mut out = dataset.clone();
    for row in &mut out.features {
        for (j, v) in row.iter_mut().enumerate() {
            let range = params.max[j] - params.min[j];
            *v = if range > 0.0 {
                ((*v - params.min[j]) / range).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
    }
    Ok(out)
}
