//! Frequency-domain HRV features from a Welch-averaged periodogram of the
//! 4 Hz-resampled RR tachogram.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::qrs::RrSeries;

/// Resampling rate for the RR tachogram.
pub const RESAMPLE_HZ: f64 = 4.0;
/// Welch segment length in seconds (or the full series if shorter).
pub const SEGMENT_S: f64 = 64.0;
/// Minimum RR span for a usable spectrum.
pub const MIN_SPECTRAL_SPAN_S: f64 = 60.0;

pub const VLF_BAND: (f64, f64) = (0.0033, 0.04);
pub const LF_BAND: (f64, f64) = (0.04, 0.15);
pub const HF_BAND: (f64, f64) = (0.15, 0.40);

/// The 10 spectral entries of the canonical vector. Powers are ms^2,
/// peaks in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyFeatures {
    pub vlf_power: f64,
    pub lf_power: f64,
    pub hf_power: f64,
    pub total_power: f64,
    pub lf_norm: f64,
    pub hf_norm: f64,
    pub lf_hf_ratio: f64,
    pub vlf_peak_hz: f64,
    pub lf_peak_hz: f64,
    pub hf_peak_hz: f64,
}

pub fn frequency_domain_features(rr: &RrSeries) -> Result<FrequencyFeatures> {
    let span = rr.span_s();
    if span < MIN_SPECTRAL_SPAN_S {
        return Err(Error::InsufficientSpan {
            span_s: span,
            required_s: MIN_SPECTRAL_SPAN_S,
        });
    }

    let resampled = resample_tachogram(rr);
    let (psd, df) = welch_psd(&resampled);

    let (vlf_power, vlf_peak_hz) = band(&psd, df, VLF_BAND);
    let (lf_power, lf_peak_hz) = band(&psd, df, LF_BAND);
    let (hf_power, hf_peak_hz) = band(&psd, df, HF_BAND);

    let lf_hf_sum = lf_power + hf_power;
    let (lf_norm, hf_norm, lf_hf_ratio) = if lf_hf_sum > 0.0 && hf_power > 0.0 {
        (
            100.0 * lf_power / lf_hf_sum,
            100.0 * hf_power / lf_hf_sum,
            lf_power / hf_power,
        )
    } else if lf_hf_sum > 0.0 {
        (100.0, 0.0, 0.0)
    } else {
        (0.0, 0.0, 0.0)
    };

    Ok(FrequencyFeatures {
        vlf_power,
        lf_power,
        hf_power,
        total_power: vlf_power + lf_power + hf_power,
        lf_norm,
        hf_norm,
        lf_hf_ratio,
        vlf_peak_hz,
        lf_peak_hz,
        hf_peak_hz,
    })
}

/// Linear interpolation of the (onset, RR) tachogram onto a uniform
/// `RESAMPLE_HZ` grid spanning the onsets.
fn resample_tachogram(rr: &RrSeries) -> Vec<f64> {
    let t0 = rr.onset_times_s[0];
    let t_end = *rr.onset_times_s.last().unwrap();
    let n = ((t_end - t0) * RESAMPLE_HZ).floor() as usize + 1;
    let mut out = Vec::with_capacity(n);
    let mut seg = 0usize;
    for k in 0..n {
        let t = t0 + k as f64 / RESAMPLE_HZ;
        while seg + 1 < rr.onset_times_s.len() - 1 && rr.onset_times_s[seg + 1] < t {
            seg += 1;
        }
        let (ta, tb) = (rr.onset_times_s[seg], rr.onset_times_s[seg + 1]);
        let (va, vb) = (rr.intervals_ms[seg], rr.intervals_ms[seg + 1]);
        let alpha = if tb > ta { (t - ta) / (tb - ta) } else { 0.0 };
        out.push(va + alpha.clamp(0.0, 1.0) * (vb - va));
    }
    out
}

/// One-sided Welch PSD: Hann window, 50% overlap, `SEGMENT_S`-second
/// segments (full length if shorter), mean removed first. Returns the PSD
/// bins and the frequency resolution.
fn welch_psd(signal: &[f64]) -> (Vec<f64>, f64) {
    let n = signal.len();
    let mean = signal.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = signal.iter().map(|v| v - mean).collect();

    let seg_len = ((SEGMENT_S * RESAMPLE_HZ) as usize).min(n);
    let hop = (seg_len / 2).max(1);
    let n_segments = if n >= seg_len { (n - seg_len) / hop + 1 } else { 1 };

    // Periodic Hann window.
    let window: Vec<f64> = (0..seg_len)
        .map(|i| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / seg_len as f64).cos()))
        .collect();
    let window_ss: f64 = window.iter().map(|w| w * w).sum();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(seg_len);

    let n_bins = seg_len / 2 + 1;
    let mut psd = vec![0.0f64; n_bins];
    for s in 0..n_segments {
        let start = s * hop;
        let mut buf: Vec<Complex<f64>> = (0..seg_len)
            .map(|i| Complex::new(x[start + i] * window[i], 0.0))
            .collect();
        fft.process(&mut buf);
        for (k, p) in psd.iter_mut().enumerate() {
            *p += buf[k].norm_sqr();
        }
    }

    let scale = 1.0 / (RESAMPLE_HZ * window_ss * n_segments as f64);
    for (k, p) in psd.iter_mut().enumerate() {
        let one_sided = if k == 0 || (seg_len % 2 == 0 && k == seg_len / 2) {
            1.0
        } else {
            2.0
        };
        *p *= scale * one_sided;
    }
    (psd, RESAMPLE_HZ / seg_len as f64)
}

/// Band power (rectangle rule over bins whose center lies in `[lo, hi)`) and
/// the frequency of the band's largest bin (ties to the lower frequency).
fn band(psd: &[f64], df: f64, (lo, hi): (f64, f64)) -> (f64, f64) {
    let mut power = 0.0;
    let mut peak_k = None::<usize>;
    for (k, &p) in psd.iter().enumerate() {
        let f = k as f64 * df;
        if f >= lo && f < hi {
            power += p * df;
            if peak_k.map_or(true, |b| p > psd[b]) {
                peak_k = Some(k);
            }
        }
    }
    (power, peak_k.map_or(0.0, |k| k as f64 * df))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// RR series whose tachogram is a sinusoid at `freq_hz`.
    fn modulated(freq_hz: f64, amp_ms: f64, beats: usize) -> RrSeries {
        let base = 800.0;
        let mut t = 0.0;
        let mut intervals = Vec::with_capacity(beats);
        let mut onsets = Vec::with_capacity(beats);
        for _ in 0..beats {
            let rr = base + amp_ms * (2.0 * std::f64::consts::PI * freq_hz * t).sin();
            onsets.push(t);
            intervals.push(rr);
            t += rr / 1000.0;
        }
        RrSeries {
            intervals_ms: intervals,
            onset_times_s: onsets,
            rejected_count: 0,
        }
    }

    #[test]
    fn lf_modulation_peaks_at_lf() {
        let rr = modulated(0.10, 50.0, 120);
        let f = frequency_domain_features(&rr).unwrap();
        assert!((f.lf_peak_hz - 0.10).abs() <= 0.01, "{}", f.lf_peak_hz);
        assert!(f.lf_hf_ratio > 2.0, "{}", f.lf_hf_ratio);
        assert!(f.lf_norm > 60.0);
        assert!((f.lf_norm + f.hf_norm - 100.0).abs() < 1e-9);
    }

    #[test]
    fn hf_modulation_peaks_at_hf() {
        let rr = modulated(0.25, 50.0, 120);
        let f = frequency_domain_features(&rr).unwrap();
        assert!((f.hf_peak_hz - 0.25).abs() <= 0.01, "{}", f.hf_peak_hz);
        assert!(f.lf_hf_ratio < 0.5, "{}", f.lf_hf_ratio);
    }

    #[test]
    fn constant_rr_has_negligible_power() {
        let flat = RrSeries::from_intervals(vec![800.0; 120]);
        let f_flat = frequency_domain_features(&flat).unwrap();
        let f_mod = frequency_domain_features(&modulated(0.10, 50.0, 120)).unwrap();
        assert!(f_flat.lf_power < 1e-6 * f_mod.lf_power);
        assert!(f_flat.hf_power < 1e-6 * f_mod.hf_power);
        assert_eq!(f_flat.lf_norm, 0.0);
        assert_eq!(f_flat.lf_hf_ratio, 0.0);
    }

    #[test]
    fn short_span_is_error() {
        let rr = RrSeries::from_intervals(vec![800.0; 30]);
        assert!(matches!(
            frequency_domain_features(&rr),
            Err(Error::InsufficientSpan { .. })
        ));
    }

    #[test]
    fn powers_are_nonnegative_and_total_consistent() {
        let rr = modulated(0.18, 35.0, 150);
        let f = frequency_domain_features(&rr).unwrap();
        assert!(f.vlf_power >= 0.0 && f.lf_power >= 0.0 && f.hf_power >= 0.0);
        assert!((f.total_power - (f.vlf_power + f.lf_power + f.hf_power)).abs() < 1e-12);
    }
}
