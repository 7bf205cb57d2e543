//! ECG-based emotion recognition: synthetic signal generation, R-peak
//! detection, HRV feature extraction, from-scratch tree-ensemble classifiers
//! and a leakage-safe grouped cross-validation harness.

pub mod classifiers;
pub mod corpus;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod hrv;
pub mod pipeline;
pub mod qrs;
pub mod signal_io;

pub use dataset::{EmotionLabel, LabeledDataset, NUM_CLASSES};
pub use error::{Error, Result};
