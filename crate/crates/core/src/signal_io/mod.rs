//! Synthetic ECG generation and all on-disk dataset formats.
//!
//! Formats handled here:
//! - ECG sample CSV: header `sample_index,value_mv`, LF line endings, UTF-8.
//! - Trial manifest: a JSON array of [`TrialManifest`] records.
//! - Feature CSV: header `subject_id,trial_id,emotion,valence,arousal` followed
//!   by the 34 canonical feature columns (see [`crate::hrv::FEATURE_NAMES`]).

mod ecg_csv;
mod feature_csv;
mod synth;

pub use ecg_csv::{load_ecg_csv, write_ecg_csv, write_manifest};
pub use feature_csv::{load_feature_csv, write_feature_csv};
pub use synth::{generate_synthetic_ecg, MIN_RR_MS, MIN_SAMPLING_RATE_HZ};

use serde::{Deserialize, Serialize};

use crate::dataset::EmotionLabel;

/// Which part of a trial a recording covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Segment {
    Baseline,
    Stimulus,
}

impl Segment {
    pub fn as_str(self) -> &'static str {
        match self {
            Segment::Baseline => "baseline",
            Segment::Stimulus => "stimulus",
        }
    }
}

/// A raw sampled ECG with its trial metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct EcgRecording {
    /// Sampled voltage in millivolt.
    pub samples: Vec<f64>,
    pub sampling_rate_hz: f64,
    pub subject_id: String,
    pub trial_id: String,
    pub segment: Segment,
    /// Exact R-wave times in seconds. Populated by the synthetic generator
    /// only; strictly increasing when present.
    pub ground_truth_beats: Option<Vec<f64>>,
}

impl EcgRecording {
    /// Recording duration in seconds.
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sampling_rate_hz
    }
}

/// One manifest entry describing a recording on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialManifest {
    pub subject_id: String,
    pub trial_id: String,
    pub segment: Segment,
    pub sampling_rate_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emotion: Option<EmotionLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valence: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arousal: Option<u8>,
    /// Path of the sample CSV, relative to the manifest file.
    pub file: String,
}
