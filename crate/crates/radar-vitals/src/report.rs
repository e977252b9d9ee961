//! Evaluation and ablation outputs: JSON summaries and CSV tables.

use std::fs;
use std::path::Path;

use radar_vitals_core::metrics::{bland_altman_points, evaluate, mae_mape, EvalReport, Prediction, ReportConfig};
use radar_vitals_core::train::AblationRow;
use serde::{Deserialize, Serialize};

use crate::manifest::FeatureRecord;
use crate::{Error, Result};

/// Everything `evaluate` writes to `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationOutput {
    pub split: String,
    pub report: EvalReport,
    /// Examples left out of the MAPE for having zero truth.
    pub zero_truth: usize,
    pub detected_segments: usize,
    pub offered_segments: usize,
}

/// One scored example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub file: String,
    pub subject: u32,
    pub truth_hr: f64,
    pub pred_hr: f64,
}

pub fn predictions(records: &[FeatureRecord], pred: &[f64]) -> Vec<Prediction> {
    records
        .iter()
        .zip(pred)
        .map(|(r, &p)| Prediction {
            pred: p,
            truth: r.label_hr,
            subject: r.subject,
            distance: r.distance,
            tags: r.tags.clone(),
        })
        .collect()
}

pub fn build_report(
    split: &str,
    results: &[Prediction],
    detected: usize,
    offered: usize,
    cfg: &ReportConfig,
) -> Result<EvaluationOutput> {
    let pred: Vec<f64> = results.iter().map(|r| r.pred).collect();
    let truth: Vec<f64> = results.iter().map(|r| r.truth).collect();
    let zero_truth = mae_mape(&pred, &truth)?.zero_truth;
    Ok(EvaluationOutput {
        split: split.to_string(),
        report: evaluate(results, detected, offered, cfg)?,
        zero_truth,
        detected_segments: detected,
        offered_segments: offered,
    })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

/// `report.json`, `predictions.csv`, `subgroups.csv` and `bland_altman.csv`.
pub fn write_evaluation(out: &Path, output: &EvaluationOutput, rows: &[PredictionRow]) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    crate::json::write(&out.join("report.json"), output)?;

    let mut w = csv_writer(&out.join("predictions.csv"))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;

    let mut w = csv_writer(&out.join("subgroups.csv"))?;
    w.write_record(["key", "group", "count", "share", "mae", "ci_low", "ci_high"])?;
    for s in &output.report.subgroups {
        let (lo, hi) = s.mae_ci.map_or((String::new(), String::new()), |[l, h]| (l.to_string(), h.to_string()));
        w.write_record([
            s.key.clone(),
            s.group.clone(),
            s.count.to_string(),
            s.share.to_string(),
            s.mae.to_string(),
            lo,
            hi,
        ])?;
    }
    w.flush()?;

    let pred: Vec<f64> = rows.iter().map(|r| r.pred_hr).collect();
    let truth: Vec<f64> = rows.iter().map(|r| r.truth_hr).collect();
    let mut w = csv_writer(&out.join("bland_altman.csv"))?;
    w.write_record(["mean", "difference"])?;
    for (m, d) in bland_altman_points(&pred, &truth) {
        w.write_record([m.to_string(), d.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `file,pred_hr` table of externally produced predictions.
pub fn read_predictions(path: &Path) -> Result<Vec<(String, f64)>> {
    #[derive(Deserialize)]
    struct Row {
        file: String,
        pred_hr: f64,
    }
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    csv::Reader::from_reader(file)
        .deserialize::<Row>()
        .map(|r| r.map(|r| (r.file, r.pred_hr)).map_err(Error::from))
        .collect()
}

/// `ablation.json` and `ablation.csv`.
pub fn write_ablation(out: &Path, rows: &[AblationRow]) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    crate::json::write(&out.join("ablation.json"), &rows)?;
    let mut w = csv_writer(&out.join("ablation.csv"))?;
    w.write_record(["cell", "train_fraction", "mae", "ci_low", "ci_high", "test_count", "absent"])?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
    for r in rows {
        w.write_record([
            r.name.clone(),
            r.train_fraction.to_string(),
            opt(r.mae),
            opt(r.mae_ci.map(|c| c[0])),
            opt(r.mae_ci.map(|c| c[1])),
            r.test_count.to_string(),
            r.absent.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
