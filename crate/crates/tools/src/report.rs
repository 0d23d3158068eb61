//! The per-image diagnosis report.
//!
//! Every key is always present; values that do not apply are `null`. The
//! face label is set only when both eyes carry a prediction, and then always
//! equals [`aggregate_face`] of the two.

use std::fmt::Write as _;
use std::path::Path;

use ptosis_core::classify::{aggregate_face, DecisionPath, FaceLabel};
use ptosis_core::{ClinicalMeasurements, Label, Side};
use serde::{Deserialize, Serialize};

use crate::error::{ToolError, ToolResult};
use crate::fsio;

pub const REPORT_FORMAT: &str = "ptosis-report";
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosisReport {
    pub format: String,
    pub version: u32,
    pub eyes: Vec<EyeReport>,
    pub face: Option<FaceLabel>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EyeReport {
    pub side: Side,
    pub prediction: Option<Label>,
    pub p_deep: Option<f64>,
    pub decision_path: Option<DecisionPath>,
    pub score: Option<f64>,
    pub mrd1_px: f64,
    pub mrd1_mm: f64,
    pub iris_ratio_pct: f64,
    pub clr_found: bool,
    pub clr: [f64; 2],
    pub mm_per_px: f64,
    /// `[x0, y0, x1, y1]` of the eye crop in image pixels, half-open.
    pub crop: [usize; 4],
}

impl EyeReport {
    pub fn from_measurements(side: Side, m: &ClinicalMeasurements, crop: [usize; 4]) -> Self {
        Self {
            side,
            prediction: None,
            p_deep: None,
            decision_path: None,
            score: None,
            mrd1_px: m.mrd1_px,
            mrd1_mm: m.mrd1_mm,
            iris_ratio_pct: m.iris_ratio_pct,
            clr_found: m.clr_found,
            clr: [m.clr.x, m.clr.y],
            mm_per_px: m.mm_per_px,
            crop,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    /// `name version` of the producing tool.
    pub tool: String,
    pub inputs: Vec<InputRecord>,
    pub model: Option<ModelRecord>,
    pub parameters: serde_json::Map<String, serde_json::Value>,
}

/// File names only, so reports do not depend on where inputs live.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub role: String,
    pub file: String,
    pub sha256: String,
}

impl InputRecord {
    pub fn new(role: &str, path: &Path, bytes: &[u8]) -> Self {
        Self {
            role: role.into(),
            file: path
                .file_name()
                .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned()),
            sha256: fsio::sha256_hex(bytes),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub kind: String,
    pub method: String,
    pub format_version: u32,
    pub sha256: String,
}

pub fn tool_id() -> String {
    format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

/// Face label from per-eye predictions; `None` unless both eyes are predicted.
pub fn face_label(eyes: &[EyeReport]) -> Option<FaceLabel> {
    let pick = |side| eyes.iter().find(|e| e.side == side).and_then(|e| e.prediction);
    Some(aggregate_face(pick(Side::Left)?, pick(Side::Right)?))
}

impl DiagnosisReport {
    pub fn new(mut eyes: Vec<EyeReport>, provenance: Provenance) -> Self {
        eyes.sort_by_key(|e| e.side);
        let face = face_label(&eyes);
        Self {
            format: REPORT_FORMAT.into(),
            version: REPORT_VERSION,
            eyes,
            face,
            provenance,
        }
    }

    pub fn parse(text: &str, origin: &str) -> ToolResult<Self> {
        let r: DiagnosisReport = serde_json::from_str(text)
            .map_err(|e| ToolError::input(format!("{origin}:{}:{}: {e}", e.line(), e.column())))?;
        if r.format != REPORT_FORMAT || r.version != REPORT_VERSION {
            return Err(ToolError::input(format!(
                "{origin}: expected {REPORT_FORMAT} version {REPORT_VERSION}, found {} version {}",
                r.format, r.version
            )));
        }
        if r.face != face_label(&r.eyes) {
            return Err(ToolError::input(format!(
                "{origin}: face label disagrees with the per-eye predictions"
            )));
        }
        Ok(r)
    }

    pub fn load(path: &Path) -> ToolResult<(Self, Vec<u8>)> {
        let bytes = fsio::read_bytes(path)?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| ToolError::input(format!("{}: not valid UTF-8", path.display())))?;
        Ok((Self::parse(text, &path.display().to_string())?, bytes))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// Short human-readable digest.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for e in &self.eyes {
            let _ = write!(
                out,
                "{:<5} MRD1 {:>6.2} mm ({:.1} px)  iris ratio {:>5.1}%  reflex {}",
                e.side.as_str(),
                e.mrd1_mm,
                e.mrd1_px,
                e.iris_ratio_pct,
                if e.clr_found { "found" } else { "not found" }
            );
            if let Some(label) = e.prediction {
                let path = match e.decision_path {
                    Some(DecisionPath::Deep) => "deep",
                    Some(DecisionPath::Deferred) => "deferred",
                    Some(DecisionPath::ClinicalOnly) | None => "clinical-only",
                };
                let _ = write!(
                    out,
                    "  -> {} via {path}",
                    if label.is_ptosis() { "ptosis" } else { "no ptosis" }
                );
            }
            out.push('\n');
        }
        if let Some(face) = self.face {
            let _ = writeln!(out, "face: {}", face.as_str());
        }
        out
    }
}
