//! Poincare-plot (lag-1 scatter) descriptors.

use crate::error::{Error, Result};
use crate::qrs::RrSeries;

/// Floor for the `cvi` logarithm so a zero-variability series stays finite.
const CVI_FLOOR: f64 = 1e-10;

/// The 6 nonlinear entries of the canonical vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PoincareFeatures {
    pub sd1: f64,
    pub sd2: f64,
    pub sd2_sd1_ratio: f64,
    pub ellipse_area: f64,
    pub csi: f64,
    pub cvi: f64,
}

/// `sd1` and `sd2` are the population standard deviations of the rotated
/// lag-1 coordinates `(RRn - RRn+1)/sqrt(2)` and `(RRn + RRn+1)/sqrt(2)`.
/// Ratios are defined as 0 when `sd1` is 0.
pub fn poincare_features(rr: &RrSeries) -> Result<PoincareFeatures> {
    let x = &rr.intervals_ms;
    if x.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} intervals, need at least 3 for lag-1 statistics",
            x.len()
        )));
    }

    let sqrt2 = std::f64::consts::SQRT_2;
    let diffs: Vec<f64> = x.windows(2).map(|w| (w[0] - w[1]) / sqrt2).collect();
    let sums: Vec<f64> = x.windows(2).map(|w| (w[0] + w[1]) / sqrt2).collect();
    let sd1 = population_std(&diffs);
    let sd2 = population_std(&sums);

    let (ratio, csi) = if sd1 > 0.0 {
        (sd2 / sd1, sd2 / sd1)
    } else {
        (0.0, 0.0)
    };

    Ok(PoincareFeatures {
        sd1,
        sd2,
        sd2_sd1_ratio: ratio,
        ellipse_area: std::f64::consts::PI * sd1 * sd2,
        csi,
        cvi: (16.0 * sd1 * sd2).max(CVI_FLOOR).log10(),
    })
}

fn population_std(x: &[f64]) -> f64 {
    let mu = x.iter().sum::<f64>() / x.len() as f64;
    (x.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / x.len() as f64).sqrt()
}
