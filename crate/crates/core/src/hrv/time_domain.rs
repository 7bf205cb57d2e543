//! Time-domain and geometric HRV features.

use crate::error::{Error, Result};
use crate::qrs::RrSeries;

/// Histogram bin width for the geometric features: 1/128 s in milliseconds.
pub const HISTOGRAM_BIN_MS: f64 = 1000.0 / 128.0;

/// Geometric features need a meaningful histogram.
const MIN_GEOMETRIC_INTERVALS: usize = 10;

/// The 16 time-domain entries, plus the 2 geometric entries when the series
/// is long enough to build a histogram (>= 10 intervals).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDomainFeatures {
    pub mean_rr: f64,
    pub median_rr: f64,
    pub min_rr: f64,
    pub max_rr: f64,
    pub range_rr: f64,
    pub sdnn: f64,
    pub rmssd: f64,
    pub sdsd: f64,
    pub cvnn: f64,
    pub cvsd: f64,
    pub pnn20: f64,
    pub pnn50: f64,
    pub mean_hr: f64,
    pub std_hr: f64,
    pub min_hr: f64,
    pub max_hr: f64,
    pub geometric: Option<GeometricFeatures>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricFeatures {
    pub hti: f64,
    pub tinn: f64,
}

pub fn time_domain_features(rr: &RrSeries) -> Result<TimeDomainFeatures> {
    let x = &rr.intervals_ms;
    if x.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} intervals, need at least 2",
            x.len()
        )));
    }

    let mean_rr = mean(x);
    let median_rr = median(x);
    let min_rr = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_rr = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sdnn = population_std(x, mean_rr);

    let diffs: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let rmssd = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt();
    let sdsd = population_std(&diffs, mean(&diffs));
    let pnn = |thresh: f64| {
        100.0 * diffs.iter().filter(|d| d.abs() > thresh).count() as f64 / diffs.len() as f64
    };

    let hr: Vec<f64> = x.iter().map(|&rr| 60000.0 / rr).collect();
    let mean_hr = mean(&hr);

    let geometric = (x.len() >= MIN_GEOMETRIC_INTERVALS).then(|| geometric_features(x));

    Ok(TimeDomainFeatures {
        mean_rr,
        median_rr,
        min_rr,
        max_rr,
        range_rr: max_rr - min_rr,
        sdnn,
        rmssd,
        sdsd,
        cvnn: sdnn / mean_rr,
        cvsd: rmssd / mean_rr,
        pnn20: pnn(20.0),
        pnn50: pnn(50.0),
        mean_hr,
        std_hr: population_std(&hr, mean_hr),
        min_hr: hr.iter().cloned().fold(f64::INFINITY, f64::min),
        max_hr: hr.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        geometric,
    })
}

/// Triangular index and TINN from the 7.8125 ms histogram.
///
/// TINN picks bin positions N < X < M (X the histogram mode) minimizing the
/// squared error between the histogram and a triangle that is zero at N and
/// M and peaks at the mode; ties prefer the narrower triangle, then lower N.
/// The reported width is `(M - N) * bin_width` in milliseconds.
fn geometric_features(x: &[f64]) -> GeometricFeatures {
    let bin_of = |rr: f64| (rr / HISTOGRAM_BIN_MS).floor() as i64;
    let lo = x.iter().map(|&rr| bin_of(rr)).min().unwrap();
    let hi = x.iter().map(|&rr| bin_of(rr)).max().unwrap();
    let n_bins = (hi - lo + 1) as usize;
    let mut counts = vec![0u32; n_bins];
    for &rr in x {
        counts[(bin_of(rr) - lo) as usize] += 1;
    }

    let mode = counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .unwrap();
    let peak = counts[mode] as f64;
    let hti = x.len() as f64 / peak;

    // Pad one empty bin on each side so a zero-width edge always exists.
    let padded: Vec<f64> = std::iter::once(0.0)
        .chain(counts.iter().map(|&c| c as f64))
        .chain(std::iter::once(0.0))
        .collect();
    let mode_p = mode + 1;
    let triangle_err = |n: usize, m: usize| -> f64 {
        let mut err = 0.0;
        for (t, &d) in padded.iter().enumerate() {
            let q = if t < n || t > m {
                0.0
            } else if t <= mode_p {
                peak * (t - n) as f64 / (mode_p - n) as f64
            } else {
                peak * (m - t) as f64 / (m - mode_p) as f64
            };
            err += (d - q) * (d - q);
        }
        err
    };

    let mut best = (f64::INFINITY, usize::MAX, 0usize, 0usize); // err, width, n, m
    for n in 0..mode_p {
        for m in (mode_p + 1)..padded.len() {
            let err = triangle_err(n, m);
            let width = m - n;
            if err < best.0
                || (err == best.0 && (width < best.1 || (width == best.1 && n < best.2)))
            {
                best = (err, width, n, m);
            }
        }
    }
    GeometricFeatures {
        hti,
        tinn: (best.3 - best.2) as f64 * HISTOGRAM_BIN_MS,
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn population_std(x: &[f64], mu: f64) -> f64 {
    (x.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / x.len() as f64).sqrt()
}

fn median(x: &[f64]) -> f64 {
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(intervals: &[f64]) -> RrSeries {
        RrSeries::from_intervals(intervals.to_vec())
    }

    #[test]
    fn constant_rr_is_all_flat() {
        let f = time_domain_features(&series(&[800.0; 50])).unwrap();
        assert_eq!(f.sdnn, 0.0);
        assert_eq!(f.rmssd, 0.0);
        assert_eq!(f.pnn50, 0.0);
        assert_eq!(f.mean_hr, 75.0);
        assert_eq!(f.range_rr, 0.0);
        assert_eq!(f.std_hr, 0.0);
    }

    #[test]
    fn rmssd_and_sdsd_match_hand_values() {
        // Diffs are +50 and -50: rmssd = 50, population std about a zero
        // mean = 50. Too short for the geometric pair.
        let f = time_domain_features(&series(&[800.0, 850.0, 800.0])).unwrap();
        assert!((f.rmssd - 50.0).abs() < 1e-12);
        assert!((f.sdsd - 50.0).abs() < 1e-12);
        assert!(f.geometric.is_none());
        assert!((f.pnn20 - 100.0).abs() < 1e-12);
        assert!((f.pnn50 - 0.0).abs() < 1e-12); // strict: |50| > 50 is false
    }

    #[test]
    fn median_even_count() {
        let x: Vec<f64> = vec![
            700.0, 800.0, 900.0, 1000.0, 700.0, 800.0, 900.0, 1000.0, 750.0, 950.0,
        ];
        let f = time_domain_features(&series(&x)).unwrap();
        assert_eq!(f.median_rr, 850.0);
    }

    #[test]
    fn hti_of_single_bin_histogram() {
        let f = time_domain_features(&series(&[800.0; 32])).unwrap();
        let g = f.geometric.unwrap();
        assert_eq!(g.hti, 1.0);
        // Degenerate triangle: one bin wide on each side.
        assert!((g.tinn - 2.0 * HISTOGRAM_BIN_MS).abs() < 1e-12);
    }

    #[test]
    fn too_few_intervals_is_error() {
        assert!(matches!(
            time_domain_features(&series(&[800.0])),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn cv_features_are_ratios() {
        let x: Vec<f64> = (0..40).map(|i| 800.0 + (i % 4) as f64 * 30.0).collect();
        let f = time_domain_features(&series(&x)).unwrap();
        assert!((f.cvnn - f.sdnn / f.mean_rr).abs() < 1e-15);
        assert!((f.cvsd - f.rmssd / f.mean_rr).abs() < 1e-15);
    }
}
