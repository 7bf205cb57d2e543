//! ECG sample CSV and trial-manifest JSON I/O.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::{EcgRecording, TrialManifest};
use crate::error::{Error, Result};

/// Load every recording listed in a manifest JSON file.
///
/// Referenced CSV paths are resolved relative to the manifest. Each CSV must
/// carry the header `sample_index,value_mv` with strictly increasing indices.
pub fn load_ecg_csv(manifest_path: &Path) -> Result<Vec<EcgRecording>> {
    let text = fs::read_to_string(manifest_path)
        .map_err(|e| Error::io(manifest_path, e))?;
    let entries: Vec<serde_json::Value> = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("manifest {}: {e}", manifest_path.display())))?;

    let mut manifests = Vec::with_capacity(entries.len());
    for value in entries {
        manifests.push(parse_manifest_entry(value)?);
    }

    let mut seen = HashSet::new();
    for m in &manifests {
        if !seen.insert((m.subject_id.clone(), m.trial_id.clone(), m.segment)) {
            return Err(Error::Format(format!(
                "duplicate manifest entry for ({}, {}, {})",
                m.subject_id,
                m.trial_id,
                m.segment.as_str()
            )));
        }
    }

    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    manifests
        .iter()
        .map(|m| {
            let path = base.join(&m.file);
            let samples = read_sample_csv(&path)?;
            Ok(EcgRecording {
                samples,
                sampling_rate_hz: m.sampling_rate_hz,
                subject_id: m.subject_id.clone(),
                trial_id: m.trial_id.clone(),
                segment: m.segment,
                ground_truth_beats: None,
            })
        })
        .collect()
}

/// Manifest entries are validated field by field so a bad emotion string maps
/// to a label error and an out-of-range score to a format error, rather than
/// both collapsing into one JSON parse failure.
fn parse_manifest_entry(value: serde_json::Value) -> Result<TrialManifest> {
    let emotion = match value.get("emotion") {
        None | Some(serde_json::Value::Null) => None,
        Some(serde_json::Value::String(s)) => Some(s.parse()?),
        Some(other) => {
            return Err(Error::Format(format!(
                "emotion must be a string, found {other}"
            )))
        }
    };
    let mut entry: TrialManifest = serde_json::from_value(value)
        .map_err(|e| Error::Format(format!("manifest entry: {e}")))?;
    entry.emotion = emotion;
    for (name, score) in [("valence", entry.valence), ("arousal", entry.arousal)] {
        if let Some(v) = score {
            if !(1..=5).contains(&v) {
                return Err(Error::Format(format!(
                    "{name} {v} out of range 1..=5 for trial {}",
                    entry.trial_id
                )));
            }
        }
    }
    if !(entry.sampling_rate_hz.is_finite() && entry.sampling_rate_hz > 0.0) {
        return Err(Error::Format(format!(
            "sampling_rate_hz {} must be positive",
            entry.sampling_rate_hz
        )));
    }
    Ok(entry)
}

fn read_sample_csv(path: &Path) -> Result<Vec<f64>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);

    let headers = reader
        .headers()
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    if headers.len() != 2 || &headers[0] != "sample_index" || &headers[1] != "value_mv" {
        return Err(Error::Format(format!(
            "{}: expected header sample_index,value_mv",
            path.display()
        )));
    }

    let mut samples = Vec::new();
    let mut last_index: Option<i64> = None;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let idx: i64 = record[0]
            .parse()
            .map_err(|_| Error::Format(format!("{}: bad sample_index {:?}", path.display(), &record[0])))?;
        if let Some(prev) = last_index {
            if idx <= prev {
                return Err(Error::Format(format!(
                    "{}: sample_index not strictly increasing at {idx}",
                    path.display()
                )));
            }
        }
        last_index = Some(idx);
        let value: f64 = record[1]
            .parse()
            .map_err(|_| Error::Format(format!("{}: bad value_mv {:?}", path.display(), &record[1])))?;
        samples.push(value);
    }
    Ok(samples)
}

/// Write one recording as a sample CSV (atomically: temp file then rename).
pub fn write_ecg_csv(path: &Path, rec: &EcgRecording) -> Result<()> {
    let mut buf = String::with_capacity(rec.samples.len() * 16 + 32);
    buf.push_str("sample_index,value_mv\n");
    for (i, v) in rec.samples.iter().enumerate() {
        buf.push_str(&format!("{i},{v}\n"));
    }
    atomic_write(path, buf.as_bytes())
}

/// Write a manifest JSON (atomically).
pub fn write_manifest(path: &Path, entries: &[TrialManifest]) -> Result<()> {
    let json = serde_json::to_string_pretty(entries)
        .map_err(|e| Error::Format(format!("serializing manifest: {e}")))?;
    atomic_write(path, json.as_bytes())
}

pub(crate) fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().map(|s| s.to_string_lossy()).unwrap_or_default()
    ));
    {
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_io::Segment;

    fn manifest_json(valence: u8, emotion: &str) -> String {
        format!(
            r#"[{{"subject_id":"s01","trial_id":"t01","segment":"stimulus",
                 "sampling_rate_hz":256.0,"emotion":"{emotion}",
                 "valence":{valence},"arousal":3,"file":"t01.csv"}}]"#
        )
    }

    #[test]
    fn loads_single_entry() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("t01.csv"), "sample_index,value_mv\n0,0.1\n1,0.2\n2,0.3\n")
            .unwrap();
        fs::write(dir.path().join("manifest.json"), manifest_json(4, "fear")).unwrap();

        let recs = load_ecg_csv(&dir.path().join("manifest.json")).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].samples, vec![0.1, 0.2, 0.3]);
        assert_eq!(recs[0].segment, Segment::Stimulus);
    }

    #[test]
    fn valence_out_of_range_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("t01.csv"), "sample_index,value_mv\n0,0.1\n").unwrap();
        fs::write(dir.path().join("manifest.json"), manifest_json(6, "fear")).unwrap();
        let err = load_ecg_csv(&dir.path().join("manifest.json"));
        assert!(matches!(err, Err(Error::Format(_))), "{err:?}");
    }

    #[test]
    fn unknown_emotion_is_label_error() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("manifest.json"), manifest_json(3, "boredom")).unwrap();
        let err = load_ecg_csv(&dir.path().join("manifest.json"));
        assert!(matches!(err, Err(Error::Label(s)) if s == "boredom"));
    }

    #[test]
    fn missing_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("manifest.json"), manifest_json(3, "fear")).unwrap();
        let err = load_ecg_csv(&dir.path().join("manifest.json"));
        assert!(matches!(err, Err(Error::Io { .. })));
    }

    #[test]
    fn non_monotonic_index_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("t01.csv"), "sample_index,value_mv\n0,0.1\n2,0.2\n1,0.3\n")
            .unwrap();
        fs::write(dir.path().join("manifest.json"), manifest_json(3, "fear")).unwrap();
        let err = load_ecg_csv(&dir.path().join("manifest.json"));
        assert!(matches!(err, Err(Error::Format(_))));
    }

    #[test]
    fn duplicate_entry_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let one: serde_json::Value =
            serde_json::from_str(&manifest_json(3, "fear")).map(|v: serde_json::Value| v[0].clone()).unwrap();
        let doubled = serde_json::Value::Array(vec![one.clone(), one]);
        fs::write(dir.path().join("manifest.json"), doubled.to_string()).unwrap();
        let err = load_ecg_csv(&dir.path().join("manifest.json"));
        assert!(matches!(err, Err(Error::Format(_))));
    }
}
