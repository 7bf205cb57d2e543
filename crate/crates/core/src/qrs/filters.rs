//! Stage filters for the detection cascade, as integer-delay difference
//! equations scaled to the sampling rate.

/// Band-pass built from the classic cascaded low-pass and high-pass stages.
///
/// Low-pass: `y(n) = 2y(n-1) - y(n-2) + x(n) - 2x(n-d) + x(n-2d)`, which is a
/// squared moving sum of length `d` (DC gain d^2, removed here).
/// High-pass: all-pass delayed by `h` minus a moving average of length `2h`.
pub fn bandpass(x: &[f64], lp_delay: usize, hp_delay: usize) -> Vec<f64> {
    let lp = lowpass(x, lp_delay);
    highpass(&lp, hp_delay)
}

/// `(1 - z^-d)^2 / (1 - z^-1)^2` is two cascaded moving sums of length `d`;
/// computing it that way avoids the marginally stable recursive form.
fn lowpass(x: &[f64], d: usize) -> Vec<f64> {
    moving_window_integral(&moving_window_integral(x, d), d)
}

fn highpass(x: &[f64], h: usize) -> Vec<f64> {
    let ma = moving_window_integral(x, 2 * h);
    (0..x.len())
        .map(|i| if i >= h { x[i - h] } else { 0.0 } - ma[i])
        .collect()
}

/// Five-point derivative: `y(n) = (2x(n) + x(n-1) - x(n-3) - 2x(n-4)) / 8`.
pub fn five_point_derivative(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut y = vec![0.0; n];
    let at = |i: isize| -> f64 {
        if i < 0 {
            0.0
        } else {
            x[i as usize]
        }
    };
    for i in 0..n {
        let i = i as isize;
        y[i as usize] = (2.0 * at(i) + at(i - 1) - at(i - 3) - 2.0 * at(i - 4)) / 8.0;
    }
    y
}

/// Moving average over the trailing `len` samples.
pub fn moving_window_integral(x: &[f64], len: usize) -> Vec<f64> {
    let n = x.len();
    let mut y = vec![0.0; n];
    let mut sum = 0.0;
    for i in 0..n {
        sum += x[i];
        if i >= len {
            sum -= x[i - len];
        }
        y[i] = sum / len as f64;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stages_preserve_length() {
        let x: Vec<f64> = (0..500).map(|i| (i as f64 * 0.1).sin()).collect();
        assert_eq!(bandpass(&x, 8, 20).len(), x.len());
        assert_eq!(five_point_derivative(&x).len(), x.len());
        assert_eq!(moving_window_integral(&x, 38).len(), x.len());
    }

    #[test]
    fn bandpass_rejects_dc_and_drift() {
        // A constant plus a very slow drift should come out near zero once
        // the filter settles; a 10 Hz component inside the passband survives.
        let fs = 256.0;
        let n = 4096;
        let slow: Vec<f64> = (0..n)
            .map(|i| 5.0 + 0.5 * (2.0 * std::f64::consts::PI * 0.2 * i as f64 / fs).sin())
            .collect();
        let inband: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * 10.0 * i as f64 / fs).sin())
            .collect();
        let lp_d = (0.030_f64 * fs).round() as usize;
        let hp_d = (0.080_f64 * fs).round() as usize;
        let rms = |v: &[f64]| (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt();
        let settle = 1024;
        let slow_out = bandpass(&slow, lp_d, hp_d);
        let inband_out = bandpass(&inband, lp_d, hp_d);
        assert!(rms(&slow_out[settle..]) < 0.05 * rms(&slow[settle..]));
        assert!(rms(&inband_out[settle..]) > 0.3 * rms(&inband[settle..]));
    }

    #[test]
    fn derivative_of_ramp_is_constant() {
        let x: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let d = five_point_derivative(&x);
        // (2 + 1 + 3 + 2·4)/8... for a unit ramp the steady state is
        // (2i + (i-1) - (i-3) - 2(i-4))/8 = 10/8.
        for &v in &d[10..] {
            assert!((v - 1.25).abs() < 1e-12);
        }
    }

    #[test]
    fn mwi_of_constant_is_constant() {
        let x = vec![3.0; 200];
        let y = moving_window_integral(&x, 40);
        for &v in &y[40..] {
            assert!((v - 3.0).abs() < 1e-12);
        }
    }
}
