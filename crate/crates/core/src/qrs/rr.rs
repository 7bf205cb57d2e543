//! RR-interval derivation and artifact cleaning.

use crate::error::{Error, Result};

use super::RPeakSeries;

/// Cleaning bounds: intervals outside this range are physiologically
/// implausible and dropped.
pub const RR_MIN_MS: f64 = 300.0;
pub const RR_MAX_MS: f64 = 2000.0;

/// Intervals deviating more than this fraction from the local median go too.
const MEDIAN_DEVIATION: f64 = 0.30;
/// Width of the local median window (centered, including the interval).
const MEDIAN_WINDOW: usize = 5;

/// Cleaned inter-beat intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct RrSeries {
    /// Surviving intervals in milliseconds, each in `[RR_MIN_MS, RR_MAX_MS]`.
    pub intervals_ms: Vec<f64>,
    /// Time of each interval's opening beat, seconds; strictly increasing.
    pub onset_times_s: Vec<f64>,
    /// Number of intervals removed by the cleaning rules.
    pub rejected_count: usize,
}

impl RrSeries {
    /// Build a series directly from known-clean intervals, onsets starting at
    /// zero. Used by generators and tests that bypass detection.
    pub fn from_intervals(intervals_ms: Vec<f64>) -> RrSeries {
        let mut onset = 0.0;
        let mut onsets = Vec::with_capacity(intervals_ms.len());
        for rr in &intervals_ms {
            onsets.push(onset);
            onset += rr / 1000.0;
        }
        RrSeries {
            intervals_ms,
            onset_times_s: onsets,
            rejected_count: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.intervals_ms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals_ms.is_empty()
    }

    /// Seconds from the first onset to the close of the last interval.
    pub fn span_s(&self) -> f64 {
        match (self.onset_times_s.first(), self.onset_times_s.last()) {
            (Some(first), Some(last)) => {
                last - first + self.intervals_ms.last().unwrap() / 1000.0
            }
            _ => 0.0,
        }
    }
}

/// Successive differences of the peak times, with range and local-median
/// artifact rejection.
pub fn compute_rr_intervals(peaks: &RPeakSeries) -> Result<RrSeries> {
    if peaks.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} peaks, need at least 3 for RR intervals",
            peaks.len()
        )));
    }

    let raw: Vec<(f64, f64)> = peaks
        .peak_times_s
        .windows(2)
        .map(|w| (w[0], (w[1] - w[0]) * 1000.0))
        .collect();

    let mut intervals = Vec::with_capacity(raw.len());
    let mut onsets = Vec::with_capacity(raw.len());
    let mut rejected = 0usize;
    for (i, &(onset, rr)) in raw.iter().enumerate() {
        if !(RR_MIN_MS..=RR_MAX_MS).contains(&rr) {
            rejected += 1;
            continue;
        }
        let med = local_median(&raw, i);
        if (rr - med).abs() > MEDIAN_DEVIATION * med {
            rejected += 1;
            continue;
        }
        intervals.push(rr);
        onsets.push(onset);
    }

    if intervals.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "only {} intervals survive cleaning ({} rejected)",
            intervals.len(),
            rejected
        )));
    }
    Ok(RrSeries {
        intervals_ms: intervals,
        onset_times_s: onsets,
        rejected_count: rejected,
    })
}

/// Median of up to `MEDIAN_WINDOW` raw intervals centered on `i`.
fn local_median(raw: &[(f64, f64)], i: usize) -> f64 {
    let half = MEDIAN_WINDOW / 2;
    let lo = i.saturating_sub(half);
    let hi = (i + half + 1).min(raw.len());
    let mut window: Vec<f64> = raw[lo..hi].iter().map(|&(_, rr)| rr).collect();
    window.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = window.len();
    if n % 2 == 1 {
        window[n / 2]
    } else {
        0.5 * (window[n / 2 - 1] + window[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn peaks(times: &[f64]) -> RPeakSeries {
        RPeakSeries {
            peak_sample_indices: times.iter().map(|t| (t * 256.0).round() as usize).collect(),
            peak_times_s: times.to_vec(),
            sampling_rate_hz: 256.0,
        }
    }

    #[test]
    fn steady_peaks_give_clean_intervals() {
        let rr = compute_rr_intervals(&peaks(&[0.0, 1.0, 2.0])).unwrap();
        assert_eq!(rr.intervals_ms, vec![1000.0, 1000.0]);
        assert_eq!(rr.onset_times_s, vec![0.0, 1.0]);
        assert_eq!(rr.rejected_count, 0);
    }

    #[test]
    fn short_interval_rejected_by_range_rule() {
        // One 250 ms interval among 1000 ms neighbours.
        let times = [0.0, 1.0, 2.0, 2.25, 3.25, 4.25];
        let rr = compute_rr_intervals(&peaks(&times)).unwrap();
        assert_eq!(rr.rejected_count, 1);
        assert!(rr.intervals_ms.iter().all(|&v| v == 1000.0));
    }

    #[test]
    fn dropout_interval_rejected_by_median_rule() {
        // A missed beat turns one 1000 ms interval into ~2000 ms, inside the
        // plausible range but far off the local median.
        let mut times: Vec<f64> = (0..30).map(|i| i as f64).collect();
        times.remove(15);
        let rr = compute_rr_intervals(&peaks(&times)).unwrap();
        assert_eq!(rr.rejected_count, 1);
        assert_eq!(rr.len(), 27);
        assert!(rr.intervals_ms.iter().all(|&v| (v - 1000.0).abs() < 1e-9));
    }

    #[test]
    fn too_few_peaks_is_error() {
        assert!(matches!(
            compute_rr_intervals(&peaks(&[0.0, 1.0])),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn too_few_survivors_is_error() {
        // All intervals out of range.
        let times = [0.0, 2.5, 5.0, 7.5];
        assert!(matches!(
            compute_rr_intervals(&peaks(&times)),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn onsets_strictly_increasing() {
        let times: Vec<f64> = (0..50).map(|i| 0.8 * i as f64).collect();
        let rr = compute_rr_intervals(&peaks(&times)).unwrap();
        assert!(rr.onset_times_s.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn from_intervals_builds_onsets() {
        let rr = RrSeries::from_intervals(vec![800.0, 900.0, 1000.0]);
        for (got, want) in rr.onset_times_s.iter().zip([0.0, 0.8, 1.7]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((rr.span_s() - 2.7).abs() < 1e-12);
    }
}
