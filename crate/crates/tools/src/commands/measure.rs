use std::collections::HashMap;
use std::path::{Path, PathBuf};

use ptosis_core::clinical::MeasureConfig;
use ptosis_core::CalibrationModel;
use rayon::prelude::*;
use serde_json::json;

use super::{load_image, measure_in_image, rect_array, thread_pool};
use crate::cli::MeasureArgs;
use crate::error::{ToolError, ToolResult};
use crate::fsio;
use crate::landmarks::LandmarkFile;
use crate::report::{tool_id, DiagnosisReport, EyeReport, InputRecord, Provenance};
use crate::tables::{self, FeatureRow};

pub const LANDMARK_SUFFIX: &str = ".landmarks.json";

pub fn run(args: &MeasureArgs) -> ToolResult<()> {
    let cfg = MeasureConfig {
        calibration: CalibrationModel::new(args.iris_mm)
            .map_err(|e| ToolError::schema("--iris-mm", e))?,
        ..MeasureConfig::default()
    };
    if let Some(dir) = &args.suite {
        let rows = measure_suite(dir, &cfg, args.margin, args.jobs)?;
        return fsio::emit(args.out.as_deref(), &tables::write_features(&rows));
    }
    let lm_path = args.landmarks.as_deref().expect("clap requires --landmarks without --suite");
    let report = measure_report(lm_path, args.image.as_deref(), &cfg, args.margin)?;
    eprint!("{}", report.summary());
    fsio::emit(args.out.as_deref(), report.to_json().as_bytes())
}

pub fn measure_report(
    lm_path: &Path,
    image: Option<&Path>,
    cfg: &MeasureConfig,
    margin: f64,
) -> ToolResult<DiagnosisReport> {
    let lm_bytes = fsio::read_bytes(lm_path)?;
    let doc = LandmarkFile::parse(
        std::str::from_utf8(&lm_bytes)
            .map_err(|_| ToolError::input(format!("{}: not valid UTF-8", lm_path.display())))?,
        &lm_path.display().to_string(),
    )?;
    let img_path = image.map_or_else(|| doc.image_path(lm_path), Path::to_path_buf);
    let (img, img_bytes) = load_image(&img_path)?;
    let mut eyes = Vec::with_capacity(doc.eyes.len());
    for entry in &doc.eyes {
        let lm = entry.to_landmarks();
        let (m, rect) = measure_in_image(&img, &lm, cfg, margin)?;
        eyes.push(EyeReport::from_measurements(lm.side, &m, rect_array(rect)));
    }
    let mut parameters = serde_json::Map::new();
    parameters.insert("iris_mm".into(), json!(cfg.calibration.assumed_iris_diameter_mm));
    parameters.insert("margin".into(), json!(margin));
    Ok(DiagnosisReport::new(
        eyes,
        Provenance {
            tool: tool_id(),
            inputs: vec![
                InputRecord::new("image", &img_path, &img_bytes),
                InputRecord::new("landmarks", lm_path, &lm_bytes),
            ],
            model: None,
            parameters,
        },
    ))
}

/// Landmark files of a suite directory in name order.
pub fn suite_items(dir: &Path) -> ToolResult<Vec<(String, PathBuf)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| ToolError::io(dir, e))?;
    let mut items = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| ToolError::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(id) = name.strip_suffix(LANDMARK_SUFFIX) {
            items.push((id.to_owned(), entry.path()));
        }
    }
    items.sort();
    if items.is_empty() {
        return Err(ToolError::input(format!("{}: no *{LANDMARK_SUFFIX} files", dir.display())));
    }
    Ok(items)
}

/// One feature row per eye; labels come from `truth.csv` when present.
pub fn measure_suite(dir: &Path, cfg: &MeasureConfig, margin: f64, jobs: usize) -> ToolResult<Vec<FeatureRow>> {
    let items = suite_items(dir)?;
    let truth_path = dir.join("truth.csv");
    let labels: HashMap<String, ptosis_core::Label> = if truth_path.exists() {
        tables::load_truth(&truth_path)?
            .into_iter()
            .map(|t| (t.id, t.label))
            .collect()
    } else {
        HashMap::new()
    };
    let pool = thread_pool(jobs)?;
    let per_item: Vec<ToolResult<Vec<FeatureRow>>> = pool.install(|| {
        items
            .par_iter()
            .map(|(id, path)| {
                let report = measure_report(path, None, cfg, margin)?;
                let multi = report.eyes.len() > 1;
                Ok(report
                    .eyes
                    .iter()
                    .map(|e| {
                        let row_id = if multi {
                            format!("{id}-{}", e.side.as_str())
                        } else {
                            id.clone()
                        };
                        FeatureRow {
                            label: labels.get(&row_id).copied(),
                            id: Some(row_id),
                            p_deep: None,
                            mrd1_mm: e.mrd1_mm,
                            iris_ratio_pct: e.iris_ratio_pct,
                        }
                    })
                    .collect())
            })
            .collect()
    });
    let mut rows = Vec::new();
    for r in per_item {
        rows.extend(r?);
    }
    Ok(rows)
}
