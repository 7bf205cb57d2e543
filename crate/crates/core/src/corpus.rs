//! Synthetic benchmark corpus shaped like a 23-subject, 18-trial study.
//!
//! Every trial has a baseline and a stimulus recording. Stimulus RR dynamics
//! are class-conditional along three latent axes:
//!
//! - `u` shifts mean heart rate (three levels),
//! - `v` sets the 0.10 Hz (LF) modulation depth (three levels),
//! - `w` sets the 0.25 Hz (HF) modulation depth (two levels).
//!
//! A class is a cell of the `u x v` grid realized in two modes: mode 0 plays
//! `(u, v)` with high HF, mode 1 plays `(-u, -v)` with low HF. Each class's
//! single-feature marginals therefore overlap with its mirror class and only
//! the joint structure separates the nine classes, which keeps axis-aligned
//! single-feature models honest while tree ensembles can decode the grid.
//! Subjects add a random resting heart rate to both segments; baseline
//! subtraction removes it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::EmotionLabel;
use crate::error::Result;
use crate::signal_io::{generate_synthetic_ecg, EcgRecording, Segment, TrialManifest};

/// LF modulation depth per `v` level, milliseconds.
const LF_LEVELS_MS: [f64; 3] = [15.0, 35.0, 55.0];
/// HF modulation depth per `w` level (low, high), milliseconds.
const HF_LEVELS_MS: [f64; 2] = [15.0, 45.0];
/// Neutral baseline-segment depths, milliseconds.
const BASELINE_LF_MS: f64 = 35.0;
const BASELINE_HF_MS: f64 = 30.0;
/// Mean-RR shift per `u` step, milliseconds. Depths and shifts are absolute
/// so the heart-rate axis does not rescale the spectral features, keeping
/// mirror-class marginals aligned.
const RR_STEP_MS: f64 = 70.0;

#[derive(Debug, Clone)]
pub struct CorpusConfig {
    pub subjects: usize,
    /// Trials per subject; two trials (one per mode) per class, so 18 covers
    /// the nine classes exactly.
    pub trials_per_subject: usize,
    pub sampling_rate_hz: f64,
    pub noise_std_mv: f64,
    /// Seconds of scheduled beats per recording.
    pub duration_s: f64,
    pub seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            subjects: 23,
            trials_per_subject: 18,
            sampling_rate_hz: 256.0,
            noise_std_mv: 0.02,
            duration_s: 75.0,
            seed: 42,
        }
    }
}

/// A generated trial: manifest metadata plus both recordings.
#[derive(Debug, Clone)]
pub struct CorpusTrial {
    pub subject_id: String,
    pub trial_id: String,
    pub emotion: EmotionLabel,
    pub valence: u8,
    pub arousal: u8,
    pub baseline: EcgRecording,
    pub stimulus: EcgRecording,
}

impl CorpusTrial {
    pub fn manifests(&self, file_prefix: &str) -> [TrialManifest; 2] {
        let entry = |segment: Segment, rec: &EcgRecording| TrialManifest {
            subject_id: self.subject_id.clone(),
            trial_id: self.trial_id.clone(),
            segment,
            sampling_rate_hz: rec.sampling_rate_hz,
            emotion: Some(self.emotion),
            valence: Some(self.valence),
            arousal: Some(self.arousal),
            file: format!("{file_prefix}_{}.csv", segment.as_str()),
        };
        [
            entry(Segment::Baseline, &self.baseline),
            entry(Segment::Stimulus, &self.stimulus),
        ]
    }
}

/// Static valence/arousal scores per class, 1..=5 (metadata only).
fn scores_for(label: EmotionLabel) -> (u8, u8) {
    match label {
        EmotionLabel::Calmness => (4, 1),
        EmotionLabel::Surprise => (3, 4),
        EmotionLabel::Amusement => (4, 3),
        EmotionLabel::Fear => (2, 5),
        EmotionLabel::Excitement => (5, 5),
        EmotionLabel::Disgust => (1, 3),
        EmotionLabel::Happiness => (5, 3),
        EmotionLabel::Anger => (1, 5),
        EmotionLabel::Sadness => (1, 2),
    }
}

/// Latent grid cell of a class: `u` (HR axis) and `v` (LF axis) in {-1,0,1}.
fn class_cell(class: usize) -> (i32, i32) {
    ((class % 3) as i32 - 1, (class / 3) as i32 - 1)
}

/// Deterministic whole-corpus generation.
pub fn generate_corpus(cfg: &CorpusConfig) -> Result<Vec<CorpusTrial>> {
    let mut trials = Vec::with_capacity(cfg.subjects * cfg.trials_per_subject);
    for subject in 0..cfg.subjects {
        let mut subject_rng =
            ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1 + subject as u64));
        let resting_rr_ms = subject_rng.gen_range(800.0..1030.0);

        for trial in 0..cfg.trials_per_subject {
            let class = (trial / 2) % 9;
            let mode = trial % 2;
            let label = EmotionLabel::from_index(class).unwrap();
            let (valence, arousal) = scores_for(label);

            let (u, v) = class_cell(class);
            let (u_eff, v_eff, hf_high) = if mode == 0 {
                (u, v, true)
            } else {
                (-u, -v, false)
            };

            let trial_seed = cfg
                .seed
                .wrapping_add(0x51ed_270b)
                .wrapping_add((subject as u64) << 24)
                .wrapping_add(trial as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
            let jitter: f64 = rng.gen_range(-8.0..8.0);

            let stim_rr = resting_rr_ms - u_eff as f64 * RR_STEP_MS + jitter;
            let stim_lf = LF_LEVELS_MS[(v_eff + 1) as usize] * rng.gen_range(0.92..1.08);
            let stim_hf = HF_LEVELS_MS[hf_high as usize] * rng.gen_range(0.92..1.08);

            let baseline_schedule = rr_schedule(
                resting_rr_ms + rng.gen_range(-4.0..4.0),
                BASELINE_LF_MS,
                BASELINE_HF_MS,
                cfg.duration_s,
                &mut rng,
            );
            let stimulus_schedule =
                rr_schedule(stim_rr, stim_lf, stim_hf, cfg.duration_s, &mut rng);

            let subject_id = format!("s{:02}", subject + 1);
            let trial_id = format!("t{trial:02}");
            let baseline = recording(
                &baseline_schedule,
                cfg,
                trial_seed ^ 0xba5e_11e0,
                &subject_id,
                &trial_id,
                Segment::Baseline,
            )?;
            let stimulus = recording(
                &stimulus_schedule,
                cfg,
                trial_seed ^ 0x57f1_0000,
                &subject_id,
                &trial_id,
                Segment::Stimulus,
            )?;

            trials.push(CorpusTrial {
                subject_id,
                trial_id,
                emotion: label,
                valence,
                arousal,
                baseline,
                stimulus,
            });
        }
    }
    Ok(trials)
}

fn recording(
    schedule: &[f64],
    cfg: &CorpusConfig,
    seed: u64,
    subject_id: &str,
    trial_id: &str,
    segment: Segment,
) -> Result<EcgRecording> {
    let mut rec = generate_synthetic_ecg(schedule, cfg.sampling_rate_hz, cfg.noise_std_mv, seed)?;
    rec.subject_id = subject_id.to_string();
    rec.trial_id = trial_id.to_string();
    rec.segment = segment;
    Ok(rec)
}

/// RR schedule with sinusoidal LF/HF modulation of the given absolute depths
/// (ms) plus a few milliseconds of beat-to-beat noise.
fn rr_schedule(
    base_rr_ms: f64,
    lf_depth_ms: f64,
    hf_depth_ms: f64,
    duration_s: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let phase_lf: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let phase_hf: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let noise = Normal::new(0.0, 3.0).unwrap();

    let mut schedule = Vec::with_capacity((duration_s / (base_rr_ms / 1000.0)) as usize + 2);
    let mut t = 0.0_f64;
    while t < duration_s {
        let rr = base_rr_ms
            + lf_depth_ms * (std::f64::consts::TAU * 0.10 * t + phase_lf).sin()
            + hf_depth_ms * (std::f64::consts::TAU * 0.25 * t + phase_hf).sin()
            + noise.sample(rng);
        schedule.push(rr.max(300.0));
        t += rr / 1000.0;
    }
    schedule
}
