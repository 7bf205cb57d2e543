//! Feature-table CSV I/O.

use std::fs;
use std::path::Path;

use super::ecg_csv::atomic_write;
use crate::dataset::{LabeledDataset, RowMeta};
use crate::error::{Error, Result};
use crate::hrv::{FEATURE_COUNT, FEATURE_NAMES};

const META_COLUMNS: [&str; 5] = ["subject_id", "trial_id", "emotion", "valence", "arousal"];

/// Load a feature CSV into a [`LabeledDataset`].
///
/// The header must contain the five metadata columns and exactly the 34
/// canonical feature names, in any order. A `video_name` column is silently
/// dropped; any other unknown column is a schema error. Feature values land
/// in canonical order regardless of the file's column order, and the group
/// key is `subject_id`.
pub fn load_feature_csv(path: &Path) -> Result<LabeledDataset> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();

    let column_of = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("{}: missing column {name:?}", path.display())))
    };

    let meta_cols: Vec<usize> = META_COLUMNS
        .iter()
        .map(|n| column_of(n))
        .collect::<Result<_>>()?;
    let feature_cols: Vec<usize> = FEATURE_NAMES
        .iter()
        .map(|n| column_of(n))
        .collect::<Result<_>>()?;

    for (i, h) in headers.iter().enumerate() {
        let known = META_COLUMNS.contains(&h.as_str())
            || FEATURE_NAMES.contains(&h.as_str())
            || h == "video_name";
        if !known {
            return Err(Error::Schema(format!(
                "{}: unknown column {h:?}",
                path.display()
            )));
        }
        if headers[..i].contains(h) {
            return Err(Error::Schema(format!(
                "{}: duplicate column {h:?}",
                path.display()
            )));
        }
    }

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut groups = Vec::new();
    let mut meta = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if record.len() != headers.len() {
            return Err(Error::Parse(format!(
                "{}: row {} has {} cells, header has {}",
                path.display(),
                row_idx + 1,
                record.len(),
                headers.len()
            )));
        }
        groups.push(record[meta_cols[0]].to_string());
        let trial_id = record[meta_cols[1]].to_string();
        labels.push(record[meta_cols[2]].parse()?);
        let valence = parse_score(&record[meta_cols[3]], "valence", row_idx)?;
        let arousal = parse_score(&record[meta_cols[4]], "arousal", row_idx)?;
        meta.push(RowMeta {
            trial_id,
            valence,
            arousal,
        });

        let mut row = Vec::with_capacity(FEATURE_COUNT);
        for (&col, name) in feature_cols.iter().zip(FEATURE_NAMES.iter()) {
            let cell = &record[col];
            let value: f64 = cell.parse().map_err(|_| {
                Error::Parse(format!(
                    "{}: row {}, column {name}: non-numeric cell {cell:?}",
                    path.display(),
                    row_idx + 1
                ))
            })?;
            row.push(value);
        }
        features.push(row);
    }

    LabeledDataset::new(features, labels, groups, meta)
}

fn parse_score(cell: &str, name: &str, row_idx: usize) -> Result<Option<u8>> {
    if cell.is_empty() {
        return Ok(None);
    }
    let v: u8 = cell
        .parse()
        .map_err(|_| Error::Parse(format!("row {}: non-numeric {name} {cell:?}", row_idx + 1)))?;
    if !(1..=5).contains(&v) {
        return Err(Error::Format(format!(
            "row {}: {name} {v} out of range 1..=5",
            row_idx + 1
        )));
    }
    Ok(Some(v))
}

/// Write a feature table in canonical column order (atomically).
pub fn write_feature_csv(path: &Path, data: &LabeledDataset) -> Result<()> {
    if data.width() != 0 && data.width() != FEATURE_COUNT {
        return Err(Error::Shape(format!(
            "feature CSV requires width {FEATURE_COUNT}, dataset has {}",
            data.width()
        )));
    }
    let mut buf = String::new();
    buf.push_str(&META_COLUMNS.join(","));
    for name in FEATURE_NAMES {
        buf.push(',');
        buf.push_str(name);
    }
    buf.push('\n');
    for i in 0..data.len() {
        let m = &data.meta[i];
        buf.push_str(&format!(
            "{},{},{},{},{}",
            data.groups[i],
            m.trial_id,
            data.labels[i],
            m.valence.map(|v| v.to_string()).unwrap_or_default(),
            m.arousal.map(|v| v.to_string()).unwrap_or_default(),
        ));
        for v in &data.features[i] {
            buf.push(',');
            buf.push_str(&format_cell(*v));
        }
        buf.push('\n');
    }
    atomic_write(path, buf.as_bytes())
}

/// Shortest representation that parses back to the same f64.
fn format_cell(v: f64) -> String {
    let s = format!("{v}");
    debug_assert!(s.parse::<f64>().map(|r| r == v || (r.is_nan() && v.is_nan())).unwrap_or(false));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::EmotionLabel;

    fn tiny_csv(feature_headers: &[&str], row_tail: &str) -> String {
        format!(
            "subject_id,trial_id,emotion,valence,arousal,{}\ns01,t01,fear,3,4,{}\n",
            feature_headers.join(","),
            row_tail
        )
    }

    fn all34_row(fill: f64) -> (Vec<&'static str>, String) {
        let names: Vec<&'static str> = FEATURE_NAMES.to_vec();
        let row = (0..FEATURE_COUNT)
            .map(|i| format!("{}", fill + i as f64))
            .collect::<Vec<_>>()
            .join(",");
        (names, row)
    }

    #[test]
    fn loads_and_orders_canonically() {
        let dir = tempfile::tempdir().unwrap();
        let (mut names, _) = all34_row(0.0);
        // Shuffle two columns; values must still land canonically.
        names.swap(0, 5);
        let row = (0..FEATURE_COUNT)
            .map(|i| format!("{}", 100 + i))
            .collect::<Vec<_>>()
            .join(",");
        let path = dir.path().join("f.csv");
        fs::write(&path, tiny_csv(&names, &row)).unwrap();
        let ds = load_feature_csv(&path).unwrap();
        assert_eq!(ds.len(), 1);
        // Column 0 in the file is names[0] == FEATURE_NAMES[5].
        let idx5 = 5;
        assert_eq!(ds.features[0][idx5], 100.0);
        assert_eq!(ds.labels[0], EmotionLabel::Fear);
        assert_eq!(ds.groups[0], "s01");
    }

    #[test]
    fn video_name_column_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let (names, row) = all34_row(1.0);
        let mut header: Vec<&str> = names.clone();
        header.push("video_name");
        let path = dir.path().join("f.csv");
        fs::write(&path, tiny_csv(&header, &format!("{row},clip_07"))).unwrap();
        let ds = load_feature_csv(&path).unwrap();
        assert_eq!(ds.width(), FEATURE_COUNT);
    }

    #[test]
    fn missing_feature_column_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let (names, row) = all34_row(1.0);
        let short: Vec<&str> = names[..FEATURE_COUNT - 1].to_vec();
        let short_row = row.rsplit_once(',').unwrap().0.to_string();
        let path = dir.path().join("f.csv");
        fs::write(&path, tiny_csv(&short, &short_row)).unwrap();
        assert!(matches!(load_feature_csv(&path), Err(Error::Schema(_))));
    }

    #[test]
    fn unknown_column_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let (names, row) = all34_row(1.0);
        let mut header: Vec<&str> = names.clone();
        header.push("mystery");
        let path = dir.path().join("f.csv");
        fs::write(&path, tiny_csv(&header, &format!("{row},1.0"))).unwrap();
        assert!(matches!(load_feature_csv(&path), Err(Error::Schema(_))));
    }

    #[test]
    fn non_numeric_cell_is_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let (names, row) = all34_row(1.0);
        let bad_row = row.replacen("1,", "oops,", 1);
        let path = dir.path().join("f.csv");
        fs::write(&path, tiny_csv(&names, &bad_row)).unwrap();
        assert!(matches!(load_feature_csv(&path), Err(Error::Parse(_))));
    }
}
