//! Versioned landmark documents.
//!
//! ```json
//! { "version": 1, "image": "face.pgm",
//!   "eyes": [ { "side": "left", "contour": [[x, y], ...16], "iris": [[x, y], ...5] } ] }
//! ```
//!
//! Coordinates are in full-image pixels. A relative `image` path is resolved
//! against the directory holding the landmark file.

use std::path::{Path, PathBuf};

use ptosis_core::clinical::{CONTOUR_POINTS, IRIS_POINTS};
use ptosis_core::{EyeLandmarks, Point2, Side};
use serde::{Deserialize, Serialize};

use crate::error::{ToolError, ToolResult};

pub const LANDMARK_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandmarkFile {
    pub version: u32,
    pub image: String,
    pub eyes: Vec<EyeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EyeEntry {
    pub side: Side,
    pub contour: [[f64; 2]; CONTOUR_POINTS],
    pub iris: [[f64; 2]; IRIS_POINTS],
}

impl EyeEntry {
    pub fn from_landmarks(lm: &EyeLandmarks) -> Self {
        Self {
            side: lm.side,
            contour: lm.contour.map(|p| [p.x, p.y]),
            iris: lm.iris.map(|p| [p.x, p.y]),
        }
    }

    pub fn to_landmarks(&self) -> EyeLandmarks {
        let pt = |[x, y]: [f64; 2]| Point2::new(x, y);
        EyeLandmarks {
            side: self.side,
            contour: self.contour.map(pt),
            iris: self.iris.map(pt),
        }
    }
}

impl LandmarkFile {
    /// Parses and validates; errors carry `origin:line:column`.
    pub fn parse(text: &str, origin: &str) -> ToolResult<Self> {
        let doc: LandmarkFile = serde_json::from_str(text).map_err(|e| {
            ToolError::input(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
        })?;
        doc.validate(origin)?;
        Ok(doc)
    }

    pub fn load(path: &Path) -> ToolResult<Self> {
        let text = crate::fsio::read_text(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn validate(&self, origin: &str) -> ToolResult<()> {
        if self.version != LANDMARK_VERSION {
            return Err(ToolError::input(format!(
                "{origin}: unsupported landmark version {} (expected {LANDMARK_VERSION})",
                self.version
            )));
        }
        if self.eyes.is_empty() {
            return Err(ToolError::input(format!("{origin}: no eyes listed")));
        }
        for side in [Side::Left, Side::Right] {
            if self.eyes.iter().filter(|e| e.side == side).count() > 1 {
                return Err(ToolError::input(format!(
                    "{origin}: more than one {} eye",
                    side.as_str()
                )));
            }
        }
        for eye in &self.eyes {
            eye.to_landmarks()
                .validate()
                .map_err(|e| ToolError::schema(&format!("{origin}: {} eye", eye.side.as_str()), e))?;
        }
        Ok(())
    }

    /// Image path, relative paths taken from `landmark_path`'s directory.
    pub fn image_path(&self, landmark_path: &Path) -> PathBuf {
        let p = Path::new(&self.image);
        if p.is_absolute() {
            return p.to_path_buf();
        }
        landmark_path.parent().unwrap_or(Path::new("")).join(p)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("landmark documents serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc() -> LandmarkFile {
        let lm = EyeLandmarks {
            side: Side::Right,
            contour: std::array::from_fn(|i| Point2::new(10.0 + i as f64, 20.0)),
            iris: std::array::from_fn(|i| Point2::new(15.0, 15.0 + i as f64)),
        };
        LandmarkFile {
            version: 1,
            image: "a.pgm".into(),
            eyes: vec![EyeEntry::from_landmarks(&lm)],
        }
    }

    #[test]
    fn round_trip() {
        let d = doc();
        assert_eq!(LandmarkFile::parse(&d.to_json(), "x").unwrap(), d);
        assert_eq!(EyeEntry::from_landmarks(&d.eyes[0].to_landmarks()), d.eyes[0]);
    }

    #[test]
    fn missing_iris_point_is_line_anchored() {
        let mut v: serde_json::Value = serde_json::from_str(&doc().to_json()).unwrap();
        v["eyes"][0]["iris"].as_array_mut().unwrap().pop();
        let text = serde_json::to_string_pretty(&v).unwrap();
        let err = LandmarkFile::parse(&text, "f.json").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let msg = err.to_string();
        assert!(msg.starts_with("f.json:"), "{msg}");
        let line: usize = msg.split(':').nth(1).unwrap().parse().unwrap();
        assert!(line > 1);
    }

    #[test]
    fn duplicate_sides_and_versions_are_rejected() {
        let mut d = doc();
        d.eyes.push(d.eyes[0].clone());
        assert!(LandmarkFile::parse(&d.to_json(), "x").is_err());
        let mut d = doc();
        d.version = 2;
        assert!(LandmarkFile::parse(&d.to_json(), "x").is_err());
        let text = doc().to_json().replace("\"version\": 1,", "");
        assert!(LandmarkFile::parse(&text, "x").is_err());
    }

    #[test]
    fn image_path_is_relative_to_the_landmark_file() {
        let d = doc();
        assert_eq!(d.image_path(Path::new("dir/x.json")), Path::new("dir/a.pgm"));
        assert_eq!(d.image_path(Path::new("x.json")), Path::new("a.pgm"));
    }
}
