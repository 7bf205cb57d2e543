//! The canonical 34-feature HRV vector, baseline normalization and scaling.
//!
//! Feature dictionary (canonical column order, also the feature CSV order):
//!
//! | group | features | definition |
//! |---|---|---|
//! | time (ms / % / bpm) | `mean_rr`, `median_rr`, `min_rr`, `max_rr`, `range_rr` | summary statistics of the RR series |
//! | | `sdnn` | population standard deviation of RR |
//! | | `rmssd` | root-mean-square of successive RR differences |
//! | | `sdsd` | population standard deviation of successive differences |
//! | | `cvnn`, `cvsd` | `sdnn / mean_rr`, `rmssd / mean_rr` |
//! | | `pnn20`, `pnn50` | % of successive differences with magnitude > 20/50 ms |
//! | | `mean_hr`, `std_hr`, `min_hr`, `max_hr` | statistics of `60000 / RR` |
//! | geometric | `hti` | interval count / tallest bin of a 7.8125 ms histogram |
//! | | `tinn` | base width (ms) of the best triangular fit to that histogram |
//! | frequency (ms^2 / Hz) | `vlf_power`, `lf_power`, `hf_power` | band power of the 4 Hz-resampled RR tachogram over 0.0033-0.04, 0.04-0.15, 0.15-0.40 Hz (Welch, Hann, 50% overlap, 64 s segments) |
//! | | `total_power` | `vlf + lf + hf` |
//! | | `lf_norm`, `hf_norm` | `100 * LF / (LF + HF)` and complement (0 when LF+HF = 0) |
//! | | `lf_hf_ratio` | `LF / HF` (0 when HF = 0) |
//! | | `vlf_peak_hz`, `lf_peak_hz`, `hf_peak_hz` | frequency of the largest PSD bin inside each band |
//! | Poincare (ms) | `sd1`, `sd2` | population std of `(RRn - RRn+1)/sqrt(2)` and `(RRn + RRn+1)/sqrt(2)` |
//! | | `sd2_sd1_ratio`, `csi` | `sd2 / sd1` (0 when sd1 = 0) |
//! | | `ellipse_area` | `pi * sd1 * sd2` |
//! | | `cvi` | `log10(16 * sd1 * sd2)`, argument floored at 1e-10 |

mod frequency;
mod poincare;
mod scaler;
mod time_domain;

pub use frequency::{frequency_domain_features, FrequencyFeatures, MIN_SPECTRAL_SPAN_S};
pub use poincare::{poincare_features, PoincareFeatures};
pub use scaler::{apply_minmax, fit_minmax, ScalerParams};
pub use time_domain::{time_domain_features, GeometricFeatures, TimeDomainFeatures};

use crate::error::{Error, Result};
use crate::qrs::{compute_rr_intervals, detect_r_peaks, RrSeries};
use crate::signal_io::EcgRecording;

/// Number of canonical HRV features.
pub const FEATURE_COUNT: usize = 34;

/// Canonical feature names, in canonical order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "mean_rr",
    "median_rr",
    "min_rr",
    "max_rr",
    "range_rr",
    "sdnn",
    "rmssd",
    "sdsd",
    "cvnn",
    "cvsd",
    "pnn20",
    "pnn50",
    "mean_hr",
    "std_hr",
    "min_hr",
    "max_hr",
    "hti",
    "tinn",
    "vlf_power",
    "lf_power",
    "hf_power",
    "total_power",
    "lf_norm",
    "hf_norm",
    "lf_hf_ratio",
    "vlf_peak_hz",
    "lf_peak_hz",
    "hf_peak_hz",
    "sd1",
    "sd2",
    "sd2_sd1_ratio",
    "ellipse_area",
    "csi",
    "cvi",
];

/// The complete ordered 34-feature vector for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct HrvFeatureVector {
    values: [f64; FEATURE_COUNT],
}

impl HrvFeatureVector {
    pub fn assemble(
        time: &TimeDomainFeatures,
        geometric: &GeometricFeatures,
        freq: &FrequencyFeatures,
        poincare: &PoincareFeatures,
    ) -> HrvFeatureVector {
        let values = [
            time.mean_rr,
            time.median_rr,
            time.min_rr,
            time.max_rr,
            time.range_rr,
            time.sdnn,
            time.rmssd,
            time.sdsd,
            time.cvnn,
            time.cvsd,
            time.pnn20,
            time.pnn50,
            time.mean_hr,
            time.std_hr,
            time.min_hr,
            time.max_hr,
            geometric.hti,
            geometric.tinn,
            freq.vlf_power,
            freq.lf_power,
            freq.hf_power,
            freq.total_power,
            freq.lf_norm,
            freq.hf_norm,
            freq.lf_hf_ratio,
            freq.vlf_peak_hz,
            freq.lf_peak_hz,
            freq.hf_peak_hz,
            poincare.sd1,
            poincare.sd2,
            poincare.sd2_sd1_ratio,
            poincare.ellipse_area,
            poincare.csi,
            poincare.cvi,
        ];
        HrvFeatureVector { values }
    }

    pub fn from_values(values: [f64; FEATURE_COUNT]) -> HrvFeatureVector {
        HrvFeatureVector { values }
    }

    pub fn as_slice(&self) -> &[f64; FEATURE_COUNT] {
        &self.values
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.values.to_vec()
    }

    /// Value by canonical feature name.
    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES
            .iter()
            .position(|&n| n == name)
            .map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        FEATURE_NAMES.iter().copied().zip(self.values.iter().copied())
    }
}

/// Full per-trial extraction: detection, RR cleaning, then the three feature
/// families. Upstream failures are tagged with the stage they came from.
pub fn extract_feature_vector(rec: &EcgRecording) -> Result<HrvFeatureVector> {
    let (peaks, _) = detect_r_peaks(rec).map_err(|e| Error::stage("qrs_detect", e))?;
    let rr = compute_rr_intervals(&peaks).map_err(|e| Error::stage("rr_intervals", e))?;
    features_from_rr(&rr)
}

/// The three feature families from an already-cleaned RR series.
pub fn features_from_rr(rr: &RrSeries) -> Result<HrvFeatureVector> {
    let time = time_domain_features(rr).map_err(|e| Error::stage("time_domain", e))?;
    let geometric = time.geometric.ok_or_else(|| {
        Error::stage(
            "time_domain",
            Error::InsufficientData(format!(
                "{} intervals, need at least 10 for the geometric features",
                rr.len()
            )),
        )
    })?;
    let freq = frequency_domain_features(rr).map_err(|e| Error::stage("frequency_domain", e))?;
    let poincare = poincare_features(rr).map_err(|e| Error::stage("poincare", e))?;
    Ok(HrvFeatureVector::assemble(&time, &geometric, &freq, &poincare))
}

/// Baseline normalization: elementwise stimulus minus baseline. Subtraction
/// keeps features with zero baselines finite.
pub fn baseline_normalize(
    stimulus: &HrvFeatureVector,
    baseline: &HrvFeatureVector,
) -> HrvFeatureVector {
    let mut values = [0.0; FEATURE_COUNT];
    for (i, v) in values.iter_mut().enumerate() {
        *v = stimulus.values[i] - baseline.values[i];
    }
    HrvFeatureVector { values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_io::generate_synthetic_ecg;

    #[test]
    fn names_are_unique_and_34() {
        assert_eq!(FEATURE_NAMES.len(), 34);
        let mut sorted = FEATURE_NAMES.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 34);
    }

    #[test]
    fn extraction_recovers_mean_hr() {
        // 75 bpm for ~90 s.
        let rr = vec![800.0; 113];
        let rec = generate_synthetic_ecg(&rr, 256.0, 0.0, 5).unwrap();
        let features = extract_feature_vector(&rec).unwrap();
        let mean_hr = features.get("mean_hr").unwrap();
        assert!((mean_hr - 75.0).abs() < 0.5, "mean_hr {mean_hr}");
    }

    #[test]
    fn short_recording_fails_with_stage() {
        let rr = vec![800.0; 3];
        let rec = generate_synthetic_ecg(&rr, 256.0, 0.0, 5).unwrap();
        let err = extract_feature_vector(&rec).unwrap_err();
        match err {
            Error::Stage { stage, source } => {
                assert_eq!(stage, "qrs_detect");
                assert!(matches!(*source, Error::InsufficientSignal(_)));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn extraction_is_deterministic() {
        let rr: Vec<f64> = (0..100).map(|i| 780.0 + 25.0 * ((i % 7) as f64)).collect();
        let rec = generate_synthetic_ecg(&rr, 256.0, 0.03, 21).unwrap();
        let a = extract_feature_vector(&rec).unwrap();
        let b = extract_feature_vector(&rec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn baseline_normalize_subtracts() {
        let rr_a = RrSeries::from_intervals(vec![800.0; 120]);
        let a = features_from_rr(&rr_a).unwrap();
        let zero = baseline_normalize(&a, &a);
        assert!(zero.to_vec().iter().all(|&v| v == 0.0));

        let mut hi = a.to_vec();
        let rmssd_idx = FEATURE_NAMES.iter().position(|&n| n == "rmssd").unwrap();
        hi[rmssd_idx] = 40.0;
        let mut lo = a.to_vec();
        lo[rmssd_idx] = 30.0;
        let hi = HrvFeatureVector::from_values(hi.try_into().unwrap());
        let lo = HrvFeatureVector::from_values(lo.try_into().unwrap());
        assert_eq!(baseline_normalize(&hi, &lo).get("rmssd").unwrap(), 10.0);
    }
}
