//! Pan-Tompkins R-peak detection and RR-interval derivation.
//!
//! The detector runs the classic stage cascade — band-pass (5–15 Hz, built
//! from cascaded low-pass/high-pass difference equations), five-point
//! derivative, pointwise square, 150 ms moving-window integral — then applies
//! dual adaptive thresholds with a 200 ms refractory period and a search-back
//! pass at half threshold when no beat arrives within 1.66x the running RR
//! average. Each accepted fiducial is refined to the raw-signal maximum
//! within ±40 ms (after removing the cascade's known group delay).

mod filters;
mod rr;

pub use rr::{compute_rr_intervals, RrSeries, RR_MAX_MS, RR_MIN_MS};

use crate::error::{Error, Result};
use crate::signal_io::EcgRecording;

/// Detector constants. The published method fixes the structure but not the
/// numbers; these follow its standard parameterization and can be overridden.
#[derive(Debug, Clone)]
pub struct DetectorConfig {
    /// Band-pass low-pass corner control, seconds (classic 30 ms).
    pub lowpass_delay_s: f64,
    /// Band-pass high-pass corner control, seconds (classic 80 ms).
    pub highpass_delay_s: f64,
    /// Moving-window integral length, seconds.
    pub integration_window_s: f64,
    /// Minimum spacing between reported peaks, seconds.
    pub refractory_s: f64,
    /// Threshold = noise + this fraction of (signal - noise).
    pub threshold_fraction: f64,
    /// Search-back triggers past this multiple of the running RR average.
    pub searchback_rr_factor: f64,
    /// Search-back accepts peaks above this fraction of the main threshold.
    pub searchback_threshold_fraction: f64,
    /// Raw-signal refinement half-window, seconds.
    pub refine_halfwidth_s: f64,
    /// Detections earlier than this are discarded while the filters settle.
    pub settle_s: f64,
    /// Minimum recording length, seconds.
    pub min_duration_s: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            lowpass_delay_s: 0.030,
            highpass_delay_s: 0.080,
            integration_window_s: 0.150,
            refractory_s: 0.200,
            threshold_fraction: 0.25,
            searchback_rr_factor: 1.66,
            searchback_threshold_fraction: 0.5,
            refine_halfwidth_s: 0.040,
            settle_s: 2.0,
            min_duration_s: 5.0,
        }
    }
}

/// Detected R peaks with their sample indices and times.
#[derive(Debug, Clone, PartialEq)]
pub struct RPeakSeries {
    pub peak_sample_indices: Vec<usize>,
    pub peak_times_s: Vec<f64>,
    pub sampling_rate_hz: f64,
}

impl RPeakSeries {
    pub fn len(&self) -> usize {
        self.peak_sample_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peak_sample_indices.is_empty()
    }
}

/// Threshold state captured whenever the detector classifies a candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdEvent {
    pub sample: usize,
    pub signal_threshold: f64,
    pub noise_threshold: f64,
}

/// Per-stage signals and the threshold history, for debugging and dumps.
/// Every stage sequence has the same length as the input.
#[derive(Debug, Clone)]
pub struct DetectionTrace {
    pub filtered: Vec<f64>,
    pub derivative: Vec<f64>,
    pub squared: Vec<f64>,
    pub integrated: Vec<f64>,
    pub threshold_history: Vec<ThresholdEvent>,
}

/// Run the full detection cascade on a recording.
pub fn detect_r_peaks(rec: &EcgRecording) -> Result<(RPeakSeries, DetectionTrace)> {
    detect_r_peaks_with(rec, &DetectorConfig::default())
}

pub fn detect_r_peaks_with(
    rec: &EcgRecording,
    cfg: &DetectorConfig,
) -> Result<(RPeakSeries, DetectionTrace)> {
    let fs = rec.sampling_rate_hz;
    if fs < crate::signal_io::MIN_SAMPLING_RATE_HZ {
        return Err(Error::UnsupportedRate(fs));
    }
    if rec.duration_s() < cfg.min_duration_s {
        return Err(Error::InsufficientSignal(format!(
            "recording is {:.2} s, need at least {} s",
            rec.duration_s(),
            cfg.min_duration_s
        )));
    }

    let x = &rec.samples;
    let lp_delay = ((cfg.lowpass_delay_s * fs).round() as usize).max(1);
    let hp_delay = ((cfg.highpass_delay_s * fs).round() as usize).max(1);
    let mwi_len = ((cfg.integration_window_s * fs).round() as usize).max(1);

    let filtered = filters::bandpass(x, lp_delay, hp_delay);
    let derivative = filters::five_point_derivative(&filtered);
    let squared: Vec<f64> = derivative.iter().map(|v| v * v).collect();
    let integrated = filters::moving_window_integral(&squared, mwi_len);

    // Total group delay from raw R wave to integrated-signal maximum:
    // (lp_delay - 1) for the squared moving sum, hp_delay for the delayed
    // all-pass path, 2 for the derivative, half the integration window.
    let group_delay = (lp_delay - 1) + hp_delay + 2 + mwi_len / 2;

    let refractory = (cfg.refractory_s * fs).round() as usize;
    let candidates = windowed_maxima(&integrated, refractory);

    let mut state = ThresholdState::init(&integrated, fs, cfg);
    let mut history = Vec::new();
    let mut accepted: Vec<usize> = Vec::new(); // integrated-signal indices
    let mut rr_recent: Vec<f64> = Vec::new(); // last 8 accepted RR, in samples
    let mut rejected: Vec<(usize, f64)> = Vec::new(); // candidates below threshold

    for &cand in &candidates {
        let value = integrated[cand];
        if let Some(&last) = accepted.last() {
            if cand - last < refractory {
                continue;
            }
            // Search-back: when the gap since the last beat exceeds
            // 1.66x the running RR average, re-examine rejected candidates at
            // half threshold and take the strongest.
            if rr_recent.len() >= 2 {
                let rr_avg = rr_recent.iter().sum::<f64>() / rr_recent.len() as f64;
                if (cand - last) as f64 > cfg.searchback_rr_factor * rr_avg {
                    let floor = cfg.searchback_threshold_fraction * state.threshold();
                    let found = rejected
                        .iter()
                        .filter(|(i, v)| {
                            *i > last + refractory && cand - *i >= refractory && *v > floor
                        })
                        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(b.0.cmp(&a.0)))
                        .copied();
                    if let Some((idx, val)) = found {
                        push_beat(&mut accepted, &mut rr_recent, idx);
                        state.accept_searchback(val);
                        history.push(state.event(idx));
                    }
                }
            }
        }

        let last_ok = accepted
            .last()
            .map_or(true, |&last| cand - last >= refractory);
        if last_ok && value > state.threshold() {
            push_beat(&mut accepted, &mut rr_recent, cand);
            state.accept_signal(value);
        } else {
            rejected.push((cand, value));
            state.accept_noise(value);
        }
        history.push(state.event(cand));
    }

    // Map integrated-signal fiducials back to raw R waves.
    let refine = (cfg.refine_halfwidth_s * fs).round() as usize;
    let settle_end = (cfg.settle_s * fs).round() as usize;
    let mut refined: Vec<usize> = Vec::with_capacity(accepted.len());
    for &fid in &accepted {
        let center = fid.saturating_sub(group_delay);
        let lo = center.saturating_sub(refine);
        let hi = (center + refine).min(x.len() - 1);
        let mut best = lo;
        for i in lo..=hi {
            if x[i] > x[best] {
                best = i;
            }
        }
        if best >= settle_end {
            refined.push(best);
        }
    }
    refined.sort_unstable();
    refined.dedup();

    // Refinement can pull neighbouring fiducials together; enforce the
    // refractory spacing keeping the larger raw amplitude.
    let mut peaks: Vec<usize> = Vec::with_capacity(refined.len());
    for idx in refined {
        match peaks.last().copied() {
            Some(prev) if idx - prev < refractory => {
                if x[idx] > x[prev] {
                    *peaks.last_mut().unwrap() = idx;
                }
            }
            _ => peaks.push(idx),
        }
    }

    let trace = DetectionTrace {
        filtered,
        derivative,
        squared,
        integrated,
        threshold_history: history,
    };
    if peaks.is_empty() {
        return Err(Error::NoBeatsDetected);
    }
    let times = peaks.iter().map(|&i| i as f64 / fs).collect();
    Ok((
        RPeakSeries {
            peak_sample_indices: peaks,
            peak_times_s: times,
            sampling_rate_hz: fs,
        },
        trace,
    ))
}

fn push_beat(accepted: &mut Vec<usize>, rr_recent: &mut Vec<f64>, idx: usize) {
    if let Some(&last) = accepted.last() {
        rr_recent.push((idx - last) as f64);
        if rr_recent.len() > 8 {
            rr_recent.remove(0);
        }
    }
    accepted.push(idx);
}

/// Local maxima that dominate their `±window` neighbourhood. Plain local
/// maxima are too permissive here: the integrated signal grows shoulder
/// bumps ahead of each main peak, and a shoulder accepted first would push
/// the real peak into the refractory window. Ties go to the earlier sample.
fn windowed_maxima(signal: &[f64], window: usize) -> Vec<usize> {
    let n = signal.len();
    let mut out = Vec::new();
    'outer: for i in 1..n.saturating_sub(1) {
        if !(signal[i] > signal[i - 1] && signal[i] >= signal[i + 1]) {
            continue;
        }
        let lo = i.saturating_sub(window);
        let hi = (i + window).min(n - 1);
        for j in lo..=hi {
            if signal[j] > signal[i] || (signal[j] == signal[i] && j < i) {
                continue 'outer;
            }
        }
        out.push(i);
    }
    out
}

/// Running signal/noise peak estimates. Everything scales linearly with the
/// input, so detection is invariant to positive rescaling of the recording.
struct ThresholdState {
    signal_level: f64,
    noise_level: f64,
    fraction: f64,
}

impl ThresholdState {
    fn init(integrated: &[f64], fs: f64, cfg: &DetectorConfig) -> Self {
        let n = ((cfg.settle_s * fs).round() as usize).min(integrated.len()).max(1);
        let window = &integrated[..n];
        let max = window.iter().cloned().fold(0.0, f64::max);
        let mean = window.iter().sum::<f64>() / n as f64;
        ThresholdState {
            signal_level: 0.25 * max,
            noise_level: 0.5 * mean,
            fraction: cfg.threshold_fraction,
        }
    }

    fn threshold(&self) -> f64 {
        self.noise_level + self.fraction * (self.signal_level - self.noise_level)
    }

    fn accept_signal(&mut self, value: f64) {
        self.signal_level = 0.125 * value + 0.875 * self.signal_level;
    }

    fn accept_searchback(&mut self, value: f64) {
        self.signal_level = 0.25 * value + 0.75 * self.signal_level;
    }

    fn accept_noise(&mut self, value: f64) {
        self.noise_level = 0.125 * value + 0.875 * self.noise_level;
    }

    fn event(&self, sample: usize) -> ThresholdEvent {
        ThresholdEvent {
            sample,
            signal_threshold: self.threshold(),
            noise_threshold: self.noise_level,
        }
    }
}
