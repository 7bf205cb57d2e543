use emosens_core::signal_io::generate_synthetic_ecg;
use emosens_core::qrs::detect_r_peaks;

fn main() {
    let rec = generate_synthetic_ecg(&vec![1000.0; 60], 256.0, 0.0, 1).unwrap();
    println!("samples: {}, duration {:.2}s", rec.samples.len(), rec.duration_s());
    let truth = rec.ground_truth_beats.as_ref().unwrap();
    println!("truth first/last: {:.3} {:.3} n={}", truth[0], truth[truth.len()-1], truth.len());
    match detect_r_peaks(&rec) {
        Ok((peaks, trace)) => {
            println!("detected: {}", peaks.len());
            let first: Vec<usize> = peaks.peak_sample_indices.iter().take(8).cloned().collect();
            println!("first detected idx: {:?}", first);
            let truth_idx: Vec<i64> = truth.iter().take(8).map(|t| (t*256.0).round() as i64).collect();
            println!("first truth idx:    {:?}", truth_idx);
            let diffs: Vec<i64> = peaks.peak_sample_indices.iter().zip(truth.iter())
                .map(|(&d, &t)| d as i64 - (t*256.0).round() as i64).collect();
            println!("diffs: {:?}", &diffs[..diffs.len().min(20)]);
            // where is the MWI peak relative to truth beat 5?
            let t5 = (truth[5]*256.0).round() as usize;
            let window = &trace.integrated[t5.saturating_sub(10)..t5+80];
            let max_off = window.iter().enumerate().max_by(|a,b| a.1.partial_cmp(b.1).unwrap()).unwrap().0 as i64 - 10;
            println!("MWI max offset from truth beat 5: {} samples ({:.1} ms)", max_off, max_off as f64 / 256.0 * 1000.0);
        }
        Err(e) => println!("error: {e}"),
    }
}
