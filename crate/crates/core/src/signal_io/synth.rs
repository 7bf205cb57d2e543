//! Synthetic ECG generation with exact ground-truth beat times.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{EcgRecording, Segment};
use crate::error::{Error, Result};

/// Shortest RR interval the generator accepts (240 bpm).
pub const MIN_RR_MS: f64 = 250.0;
/// Lowest sampling rate the generator and detector accept.
pub const MIN_SAMPLING_RATE_HZ: f64 = 100.0;

/// Silence before the first beat. Long enough that the detector's settling
/// window never swallows a scheduled beat.
const LEAD_IN_S: f64 = 2.5;
/// Silence after the last beat so its T wave fits in the recording.
const TAIL_S: f64 = 0.6;

/// One PQRST complex as a sum of five Gaussian bumps. Offsets are relative to
/// the R wave in seconds, widths are Gaussian sigmas, amplitudes in millivolt.
/// The set is scaled so the summed template is exactly 1.0 mV at the R time.
const BUMPS: [(f64, f64, f64); 5] = [
    (-0.200, 0.025, 0.15),  // P
    (-0.040, 0.010, -0.10), // Q
    (0.000, 0.012, 1.00),   // R
    (0.040, 0.010, -0.20),  // S
    (0.300, 0.060, 0.30),   // T
];

/// Template value at `dt` seconds from the R wave, before normalization.
fn template_raw(dt: f64) -> f64 {
    BUMPS
        .iter()
        .map(|&(off, sigma, amp)| amp * (-((dt - off) * (dt - off)) / (2.0 * sigma * sigma)).exp())
        .sum()
}

/// Generate a synthetic ECG that plays out the given RR schedule.
///
/// Each scheduled beat contributes one PQRST complex with the R wave snapped
/// to the sample grid, so `ground_truth_beats` are exact sample times and the
/// noiseless R samples read exactly 1.0 mV. White Gaussian noise with the
/// given standard deviation is added on top; the same seed always produces
/// bit-identical output.
pub fn generate_synthetic_ecg(
    rr_schedule_ms: &[f64],
    sampling_rate_hz: f64,
    noise_std_mv: f64,
    seed: u64,
) -> Result<EcgRecording> {
    if sampling_rate_hz < MIN_SAMPLING_RATE_HZ {
        return Err(Error::UnsupportedRate(sampling_rate_hz));
    }
    if rr_schedule_ms.is_empty() {
        return Err(Error::InvalidSchedule("empty RR schedule".into()));
    }
    if let Some(&bad) = rr_schedule_ms
        .iter()
        .find(|&&rr| !(rr.is_finite() && rr >= MIN_RR_MS))
    {
        return Err(Error::InvalidSchedule(format!(
            "RR interval {bad} ms is below the {MIN_RR_MS} ms minimum"
        )));
    }
    if !(noise_std_mv.is_finite() && noise_std_mv >= 0.0) {
        return Err(Error::InvalidSchedule(format!(
            "noise std {noise_std_mv} must be a non-negative real"
        )));
    }

    let dt = 1.0 / sampling_rate_hz;

    // Beat k sits at lead-in + sum of the first k RR intervals, snapped to the
    // sample grid so ground truth is exact.
    let mut beat_samples = Vec::with_capacity(rr_schedule_ms.len());
    let mut t = LEAD_IN_S;
    for (k, &rr) in rr_schedule_ms.iter().enumerate() {
        if k > 0 {
            t += rr / 1000.0;
        }
        beat_samples.push((t * sampling_rate_hz).round() as usize);
    }
    let n_samples = ((t + TAIL_S) * sampling_rate_hz).ceil() as usize + 1;
    let n_samples = n_samples.max(beat_samples.last().copied().unwrap_or(0) + 1);

    let scale = 1.0 / template_raw(0.0);
    let mut samples = vec![0.0f64; n_samples];

    // Each bump only influences a window of a few sigmas around itself.
    for &beat in &beat_samples {
        let beat_t = beat as f64 * dt;
        for &(off, sigma, amp) in &BUMPS {
            let lo_t = beat_t + off - 6.0 * sigma;
            let hi_t = beat_t + off + 6.0 * sigma;
            let lo = (lo_t * sampling_rate_hz).floor().max(0.0) as usize;
            let hi = ((hi_t * sampling_rate_hz).ceil() as usize).min(n_samples - 1);
            for (i, sample) in samples.iter_mut().enumerate().take(hi + 1).skip(lo) {
                let d = i as f64 * dt - beat_t - off;
                *sample += scale * amp * (-(d * d) / (2.0 * sigma * sigma)).exp();
            }
        }
    }

    if noise_std_mv > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_std_mv)
            .map_err(|e| Error::InvalidSchedule(format!("noise distribution: {e}")))?;
        for s in &mut samples {
            *s += normal.sample(&mut rng);
        }
    }

    let ground_truth = beat_samples.iter().map(|&b| b as f64 * dt).collect();
    Ok(EcgRecording {
        samples,
        sampling_rate_hz,
        subject_id: String::new(),
        trial_id: String::new(),
        segment: Segment::Stimulus,
        ground_truth_beats: Some(ground_truth),
    })
}
