//! Command-level orchestration used by the CLI and the language bindings:
//! corpus emission, feature extraction, cross-validation/tuning/curve runs
//! and the report document.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifiers::{HyperParams, ModelTag};
use crate::corpus::{generate_corpus, CorpusConfig, CorpusTrial};
use crate::dataset::{LabeledDataset, RowMeta};
use crate::error::{Error, Result};
use crate::eval::{cross_validate, grid_search, learning_curve, CurvePoint, CvReport};
use crate::hrv::{baseline_normalize, extract_feature_vector};
use crate::qrs::{compute_rr_intervals, detect_r_peaks};
use crate::signal_io::{
    load_ecg_csv, write_ecg_csv, write_feature_csv, write_manifest, EcgRecording, Segment,
};

/// Report document schema version.
pub const REPORT_SCHEMA_VERSION: &str = "1.0";

/// Write the full synthetic corpus (manifest + one CSV per recording).
pub fn cmd_synth(cfg: &CorpusConfig, out_dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let trials = generate_corpus(cfg)?;
    let mut manifests = Vec::with_capacity(trials.len() * 2);
    for trial in &trials {
        let prefix = format!("{}_{}", trial.subject_id, trial.trial_id);
        let [baseline_entry, stimulus_entry] = trial.manifests(&prefix);
        write_ecg_csv(&out_dir.join(&baseline_entry.file), &trial.baseline)?;
        write_ecg_csv(&out_dir.join(&stimulus_entry.file), &trial.stimulus)?;
        manifests.push(baseline_entry);
        manifests.push(stimulus_entry);
    }
    let manifest_path = out_dir.join("manifest.json");
    write_manifest(&manifest_path, &manifests)?;
    Ok(manifest_path)
}

/// A per-trial extraction failure recorded in the error sidecar.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractFailure {
    pub subject_id: String,
    pub trial_id: String,
    pub error: String,
}

/// Extract the baseline-normalized feature table from in-memory trials.
/// Failing trials are skipped and reported, the rest proceed.
pub fn extract_trials(trials: &[CorpusTrial]) -> (LabeledDataset, Vec<ExtractFailure>) {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for trial in trials {
        match extract_pair(&trial.stimulus, &trial.baseline) {
            Ok(features) => rows.push((
                features,
                trial.emotion,
                trial.subject_id.clone(),
                RowMeta {
                    trial_id: trial.trial_id.clone(),
                    valence: Some(trial.valence),
                    arousal: Some(trial.arousal),
                },
            )),
            Err(e) => failures.push(ExtractFailure {
                subject_id: trial.subject_id.clone(),
                trial_id: trial.trial_id.clone(),
                error: e.to_string(),
            }),
        }
    }
    let features = rows.iter().map(|(f, ..)| f.to_vec()).collect();
    let labels = rows.iter().map(|(_, l, ..)| *l).collect();
    let groups = rows.iter().map(|(_, _, g, _)| g.clone()).collect();
    let meta = rows.iter().map(|(.., m)| m.clone()).collect();
    let dataset = LabeledDataset::new(features, labels, groups, meta)
        .expect("extraction rows are aligned by construction");
    (dataset, failures)
}

fn extract_pair(
    stimulus: &EcgRecording,
    baseline: &EcgRecording,
) -> Result<crate::hrv::HrvFeatureVector> {
    let stim = extract_feature_vector(stimulus)?;
    let base = extract_feature_vector(baseline)?;
    Ok(baseline_normalize(&stim, &base))
}

/// In-memory end-to-end: generate the corpus and extract its feature table.
pub fn synthetic_benchmark(cfg: &CorpusConfig) -> Result<(LabeledDataset, Vec<ExtractFailure>)> {
    let trials = generate_corpus(cfg)?;
    Ok(extract_trials(&trials))
}

/// Summary returned by [`cmd_extract`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractSummary {
    pub rows_written: usize,
    pub failures: usize,
    pub sidecar: Option<PathBuf>,
}

/// Extract features for every stimulus trial in a manifest, normalizing
/// against the matching baseline segment, and write the feature CSV.
/// Per-trial failures go to a `<out>.errors.json` sidecar; the run continues.
pub fn cmd_extract(
    manifest_path: &Path,
    out_csv: &Path,
    dump_trace_dir: Option<&Path>,
) -> Result<ExtractSummary> {
    let recordings = load_ecg_csv(manifest_path)?;

    let mut baselines: BTreeMap<(String, String), &EcgRecording> = BTreeMap::new();
    let mut stimuli: BTreeMap<(String, String), &EcgRecording> = BTreeMap::new();
    for rec in &recordings {
        let key = (rec.subject_id.clone(), rec.trial_id.clone());
        match rec.segment {
            Segment::Baseline => baselines.insert(key, rec),
            Segment::Stimulus => stimuli.insert(key, rec),
        };
    }

    let manifest_entries = manifest_emotions(manifest_path)?;

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut groups = Vec::new();
    let mut meta = Vec::new();
    let mut failures = Vec::new();
    for ((subject_id, trial_id), stimulus) in &stimuli {
        let key = (subject_id.clone(), trial_id.clone());
        let result = (|| -> Result<_> {
            let baseline = baselines.get(&key).ok_or_else(|| {
                Error::Format(format!("no baseline segment for ({subject_id}, {trial_id})"))
            })?;
            let entry = manifest_entries.get(&key).ok_or_else(|| {
                Error::Format(format!("no manifest entry for ({subject_id}, {trial_id})"))
            })?;
            let emotion = entry.0.ok_or_else(|| {
                Error::Format(format!("stimulus ({subject_id}, {trial_id}) lacks an emotion"))
            })?;
            if let Some(dir) = dump_trace_dir {
                dump_trace(stimulus, dir)?;
            }
            let vector = extract_pair(stimulus, baseline)?;
            Ok((vector, emotion, entry.1, entry.2))
        })();
        match result {
            Ok((vector, emotion, valence, arousal)) => {
                features.push(vector.to_vec());
                labels.push(emotion);
                groups.push(subject_id.clone());
                meta.push(RowMeta {
                    trial_id: trial_id.clone(),
                    valence,
                    arousal,
                });
            }
            Err(e) => failures.push(ExtractFailure {
                subject_id: subject_id.clone(),
                trial_id: trial_id.clone(),
                error: e.to_string(),
            }),
        }
    }

    let dataset = LabeledDataset::new(features, labels, groups, meta)?;
    write_feature_csv(out_csv, &dataset)?;

    let sidecar = if failures.is_empty() {
        None
    } else {
        let path = out_csv.with_extension("errors.json");
        let json = serde_json::to_string_pretty(&failures)
            .map_err(|e| Error::Format(format!("serializing sidecar: {e}")))?;
        fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
        Some(path)
    };
    Ok(ExtractSummary {
        rows_written: dataset.len(),
        failures: failures.len(),
        sidecar,
    })
}

/// (emotion, valence, arousal) per (subject, trial) from the stimulus
/// manifest entries.
type EmotionEntry = (Option<crate::dataset::EmotionLabel>, Option<u8>, Option<u8>);

fn manifest_emotions(
    manifest_path: &Path,
) -> Result<BTreeMap<(String, String), EmotionEntry>> {
    let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let entries: Vec<crate::signal_io::TrialManifest> = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("manifest {}: {e}", manifest_path.display())))?;
    Ok(entries
        .into_iter()
        .filter(|e| e.segment == Segment::Stimulus)
        .map(|e| {
            (
                (e.subject_id, e.trial_id),
                (e.emotion, e.valence, e.arousal),
            )
        })
        .collect())
}

/// Dump the per-stage detection trace (one column per stage) next to the
/// feature extraction, for debugging.
fn dump_trace(rec: &EcgRecording, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (_, trace) = detect_r_peaks(rec)?;
    let mut buf = String::from("sample_index,filtered,derivative,squared,integrated\n");
    for i in 0..trace.filtered.len() {
        buf.push_str(&format!(
            "{i},{},{},{},{}\n",
            trace.filtered[i], trace.derivative[i], trace.squared[i], trace.integrated[i]
        ));
    }
    let path = dir.join(format!(
        "{}_{}_{}_trace.csv",
        rec.subject_id,
        rec.trial_id,
        rec.segment.as_str()
    ));
    fs::write(&path, buf).map_err(|e| Error::io(&path, e))
}

/// One row of the report's model-by-metrics table (weighted averages).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableRow {
    pub model: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub runtime_s: f64,
}

impl TableRow {
    fn from_report(report: &CvReport) -> TableRow {
        TableRow {
            model: report.model_tag.to_string(),
            accuracy: report.summary["accuracy"].mean,
            precision: report.summary["precision_weighted"].mean,
            recall: report.summary["recall_weighted"].mean,
            f_score: report.summary["f1_weighted"].mean,
            runtime_s: report.summary["runtime_s"].mean,
        }
    }
}

/// The report document emitted by cv/tune/curve runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: String,
    pub command: String,
    pub k: usize,
    pub seed: u64,
    pub table: Vec<TableRow>,
    pub reports: Vec<CvReport>,
}

impl ReportDocument {
    fn new(command: &str, k: usize, seed: u64, reports: Vec<CvReport>) -> ReportDocument {
        ReportDocument {
            schema_version: REPORT_SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            k,
            seed,
            table: reports.iter().map(TableRow::from_report).collect(),
            reports,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Format(format!("serializing report: {e}")))
    }

    /// Fixed-width text rendering of the metrics table.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<10} {:>9} {:>10} {:>8} {:>8} {:>10}\n",
            "model", "accuracy", "precision", "recall", "f_score", "runtime_s"
        ));
        for row in &self.table {
            out.push_str(&format!(
                "{:<10} {:>9.4} {:>10.4} {:>8.4} {:>8.4} {:>10.4}\n",
                row.model, row.accuracy, row.precision, row.recall, row.f_score, row.runtime_s
            ));
        }
        out
    }
}

/// Cross-validate each requested model on a loaded feature table.
pub fn cmd_cv(
    data: &LabeledDataset,
    models: &[ModelTag],
    hp_overrides: &BTreeMap<ModelTag, HyperParams>,
    k: usize,
    seed: u64,
) -> Result<ReportDocument> {
    let default_hp = HyperParams::new();
    let reports: Vec<CvReport> = models
        .iter()
        .map(|&tag| {
            let hp = hp_overrides.get(&tag).unwrap_or(&default_hp);
            let hp = hp.clone().with("seed", seed as f64);
            cross_validate(data, tag, &hp, k)
        })
        .collect::<Result<_>>()?;
    Ok(ReportDocument::new("cv", k, seed, reports))
}

/// Grid-search each requested model; the winning configuration's report is
/// emitted per model.
pub fn cmd_tune(
    data: &LabeledDataset,
    models: &[ModelTag],
    grid: &[HyperParams],
    k: usize,
    seed: u64,
) -> Result<ReportDocument> {
    let reports: Vec<CvReport> = models
        .iter()
        .map(|&tag| {
            let seeded: Vec<HyperParams> = grid
                .iter()
                .map(|hp| hp.clone().with("seed", seed as f64))
                .collect();
            let (_, report) = grid_search(data, tag, &seeded, k)?;
            Ok(report)
        })
        .collect::<Result<_>>()?;
    Ok(ReportDocument::new("tune", k, seed, reports))
}

/// Learning curves for each requested model; curve points ride along in each
/// model's report.
pub fn cmd_curve(
    data: &LabeledDataset,
    models: &[ModelTag],
    hp_overrides: &BTreeMap<ModelTag, HyperParams>,
    fractions: &[f64],
    k: usize,
    seed: u64,
) -> Result<ReportDocument> {
    let default_hp = HyperParams::new();
    let reports: Vec<CvReport> = models
        .iter()
        .map(|&tag| {
            let hp = hp_overrides.get(&tag).unwrap_or(&default_hp);
            let hp = hp.clone().with("seed", seed as f64);
            let mut report = cross_validate(data, tag, &hp, k)?;
            report.curve_points = Some(learning_curve(data, tag, &hp, fractions, k, seed)?);
            Ok(report)
        })
        .collect::<Result<_>>()?;
    Ok(ReportDocument::new("curve", k, seed, reports))
}

/// Curve CSV (`fraction,train_acc,val_acc`); skipped fractions emit empty
/// accuracy cells.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("fraction,train_acc,val_acc\n");
    for p in points {
        match p {
            CurvePoint::Point {
                fraction,
                train_accuracy,
                val_accuracy,
            } => out.push_str(&format!("{fraction},{train_accuracy},{val_accuracy}\n")),
            CurvePoint::Skipped { fraction } => out.push_str(&format!("{fraction},,\n")),
        }
    }
    out
}

/// Validate that RR-interval derivation works end to end on a recording;
/// used by the CLI for quick input checks.
pub fn sanity_check_recording(rec: &EcgRecording) -> Result<usize> {
    let (peaks, _) = detect_r_peaks(rec)?;
    let rr = compute_rr_intervals(&peaks)?;
    Ok(rr.len())
}
