//! Clinically inspired measurements: corneal light reflex (CLR), MRD1,
//! iris ratio and the iris-diameter calibration.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    circle_from_iris_landmarks, circle_polygon_intersection_area, point_to_chain_distance, Circle,
    DistanceMode, Point2, Polygon,
};
use crate::image::GrayImage;

/// Population-average horizontal iris diameter in millimetres.
pub const DEFAULT_IRIS_DIAMETER_MM: f64 = 11.7;

/// Number of eyelid contour landmarks.
pub const CONTOUR_POINTS: usize = 16;
/// Number of iris landmarks.
pub const IRIS_POINTS: usize = 5;
/// Contour indices `0..=UPPER_LID_END` form the upper-lid chain.
pub const UPPER_LID_END: usize = 8;
/// Contour indices used as the six-point outline for cropping: both canthi,
/// two upper-lid and two lower-lid points.
pub const OUTLINE_INDICES: [usize; 6] = [0, 3, 5, 8, 11, 13];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

impl core::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            other => Err(Error::param(format!("unknown eye side {other:?}"))),
        }
    }
}

/// Sixteen eyelid points and five iris points for one eye.
///
/// Contour: 0 temporal canthus, 1..=7 upper lid temporal to nasal, 8 nasal
/// canthus, 9..=15 lower lid nasal to temporal. Iris: 0 centre, 1 temporal
/// rim, 2 superior rim, 3 nasal rim, 4 inferior rim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EyeLandmarks {
    pub side: Side,
    pub contour: [Point2; CONTOUR_POINTS],
    pub iris: [Point2; IRIS_POINTS],
}

impl EyeLandmarks {
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.contour.iter().chain(&self.iris).find(|p| !p.is_finite()) {
            return Err(Error::param(format!("non-finite landmark {p:?}")));
        }
        Ok(())
    }

    /// Checks finiteness and that every point lies within a `width x height` image.
    pub fn validate_within(&self, width: usize, height: usize) -> Result<()> {
        self.validate()?;
        let (w, h) = (width as f64, height as f64);
        if let Some(p) = self
            .contour
            .iter()
            .chain(&self.iris)
            .find(|p| p.x < 0.0 || p.y < 0.0 || p.x > w || p.y > h)
        {
            return Err(Error::param(format!(
                "landmark ({}, {}) outside the {width}x{height} image",
                p.x, p.y
            )));
        }
        Ok(())
    }

    pub fn upper_lid(&self) -> &[Point2] {
        &self.contour[..=UPPER_LID_END]
    }

    pub fn contour_polygon(&self) -> Result<Polygon> {
        Polygon::new(self.contour.to_vec())
    }

    pub fn iris_circle(&self) -> Result<Circle> {
        circle_from_iris_landmarks(&self.iris)
    }

    pub fn outline(&self) -> [Point2; 6] {
        OUTLINE_INDICES.map(|i| self.contour[i])
    }

    /// Applies `f` to every landmark.
    pub fn map(&self, f: impl Fn(Point2) -> Point2) -> Self {
        Self {
            side: self.side,
            contour: self.contour.map(&f),
            iris: self.iris.map(&f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationModel {
    pub assumed_iris_diameter_mm: f64,
}

impl Default for CalibrationModel {
    fn default() -> Self {
        Self {
            assumed_iris_diameter_mm: DEFAULT_IRIS_DIAMETER_MM,
        }
    }
}

impl CalibrationModel {
    pub fn new(assumed_iris_diameter_mm: f64) -> Result<Self> {
        if !(assumed_iris_diameter_mm > 0.0 && assumed_iris_diameter_mm.is_finite()) {
            return Err(Error::param(format!(
                "iris diameter must be positive, got {assumed_iris_diameter_mm}"
            )));
        }
        Ok(Self {
            assumed_iris_diameter_mm,
        })
    }
}

/// Brightness rule for the corneal light reflex search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClrParams {
    /// Pixels at or above this intensity always qualify.
    pub absolute_floor: u8,
    /// Pixels within this many levels of the iris maximum qualify.
    pub relative_margin: u8,
}

impl Default for ClrParams {
    fn default() -> Self {
        Self {
            absolute_floor: 240,
            relative_margin: 5,
        }
    }
}

/// Sign handling for MRD1 when the lid covers the reflex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mrd1Mode {
    #[default]
    Signed,
    ClampToZero,
}

/// Configuration for [`measure_eye_with`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MeasureConfig {
    pub calibration: CalibrationModel,
    pub clr: ClrParams,
    pub distance: DistanceMode,
    pub mrd1_mode: Mrd1Mode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClrDetection {
    pub point: Point2,
    pub found: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClinicalMeasurements {
    pub mrd1_px: f64,
    pub mrd1_mm: f64,
    pub iris_ratio_pct: f64,
    pub clr: Point2,
    pub clr_found: bool,
    pub mm_per_px: f64,
}

/// Locates the corneal light reflex inside the iris disc.
///
/// Candidate pixels reach `max(absolute_floor, iris_max - relative_margin)`.
/// They are grouped into 8-connected components and the component whose
/// centroid lies nearest the iris centre wins. Without candidates the iris
/// centre is returned with `found == false`.
pub fn detect_clr(img: &GrayImage, iris: &Circle, params: &ClrParams) -> Result<ClrDetection> {
    let (w, h) = (img.width(), img.height());
    let c = iris.center;
    let r = iris.radius;
    let col0 = libm::floor(c.x - r).max(0.0);
    let row0 = libm::floor(c.y - r).max(0.0);
    let col1 = libm::ceil(c.x + r).min(w as f64);
    let row1 = libm::ceil(c.y + r).min(h as f64);
    if !(col0 < col1 && row0 < row1) {
        return Err(Error::param(format!(
            "iris circle at ({}, {}) r={} lies outside the {w}x{h} image",
            c.x, c.y, r
        )));
    }
    let (col0, row0, col1, row1) = (col0 as usize, row0 as usize, col1 as usize, row1 as usize);
    let bw = col1 - col0;
    let bh = row1 - row0;

    let mut inside = alloc::vec![false; bw * bh];
    let mut iris_max: Option<u8> = None;
    for row in row0..row1 {
        for col in col0..col1 {
            let p = Point2::new(col as f64 + 0.5, row as f64 + 0.5);
            if iris.contains(p) {
                inside[(row - row0) * bw + (col - col0)] = true;
                let v = img.get(col, row);
                iris_max = Some(iris_max.map_or(v, |m| m.max(v)));
            }
        }
    }
    let Some(iris_max) = iris_max else {
        return Err(Error::param("iris disc covers no pixel centre of the image"));
    };
    let threshold = params
        .absolute_floor
        .max(iris_max.saturating_sub(params.relative_margin));

    let bright = |i: usize| inside[i] && img.get(col0 + i % bw, row0 + i / bw) >= threshold;
    let mut seen = alloc::vec![false; bw * bh];
    let mut best: Option<(f64, Point2)> = None;
    let mut stack = Vec::new();
    for start in 0..bw * bh {
        if seen[start] || !bright(start) {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        while let Some(i) = stack.pop() {
            let (lc, lr) = ((i % bw) as isize, (i / bw) as isize);
            sx += (col0 + lc as usize) as f64 + 0.5;
            sy += (row0 + lr as usize) as f64 + 0.5;
            n += 1;
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (nc, nr) = (lc + dc, lr + dr);
                    if nc < 0 || nr < 0 || nc >= bw as isize || nr >= bh as isize {
                        continue;
                    }
                    let j = nr as usize * bw + nc as usize;
                    if !seen[j] && bright(j) {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        let centroid = Point2::new(sx / n as f64, sy / n as f64);
        let d = centroid.distance(c);
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, centroid));
        }
    }
    Ok(match best {
        Some((_, point)) => ClrDetection { point, found: true },
        None => ClrDetection {
            point: c,
            found: false,
        },
    })
}

/// Signed distance from the reflex to the upper-lid chain: positive when the
/// reflex sits below the lid, negative when the nearest lid point lies below it.
pub fn measure_mrd1(landmarks: &EyeLandmarks, clr: Point2) -> Result<f64> {
    measure_mrd1_with(landmarks, clr, DistanceMode::Segment, Mrd1Mode::Signed)
}

pub fn measure_mrd1_with(
    landmarks: &EyeLandmarks,
    clr: Point2,
    distance: DistanceMode,
    mode: Mrd1Mode,
) -> Result<f64> {
    let (d, nearest) = point_to_chain_distance(clr, landmarks.upper_lid(), distance)?;
    let signed = if nearest.y > clr.y { -d } else { d };
    Ok(match mode {
        Mrd1Mode::Signed => signed,
        Mrd1Mode::ClampToZero => signed.max(0.0),
    })
}

/// Percentage of the iris disc inside the 16-point eyelid contour.
pub fn measure_iris_ratio(landmarks: &EyeLandmarks) -> Result<f64> {
    let circle = landmarks.iris_circle()?;
    let poly = landmarks
        .contour_polygon()
        .map_err(|e| e.at_stage("iris-ratio"))?;
    let area = circle_polygon_intersection_area(&circle, &poly).map_err(|e| e.at_stage("iris-ratio"))?;
    Ok((100.0 * area / (PI * circle.radius * circle.radius)).clamp(0.0, 100.0))
}

/// Converts MRD1 to millimetres using the iris diameter as a ruler.
/// Returns `(mrd1_mm, mm_per_px)`.
pub fn px_to_mm(mrd1_px: f64, iris: &Circle, cal: &CalibrationModel) -> Result<(f64, f64)> {
    if !(iris.radius > 0.0) {
        return Err(Error::param("iris radius must be positive for calibration"));
    }
    let mm_per_px = cal.assumed_iris_diameter_mm / (2.0 * iris.radius);
    Ok((mrd1_px * mm_per_px, mm_per_px))
}

/// Full per-eye measurement with the default configuration.
pub fn measure_eye(
    img: &GrayImage,
    landmarks: &EyeLandmarks,
    cal: &CalibrationModel,
) -> Result<ClinicalMeasurements> {
    measure_eye_with(
        img,
        landmarks,
        &MeasureConfig {
            calibration: *cal,
            ..MeasureConfig::default()
        },
    )
}

/// Iris circle, CLR, MRD1, iris ratio, calibration. When the reflex is not
/// found, MRD1 is measured from the iris centre.
pub fn measure_eye_with(
    img: &GrayImage,
    landmarks: &EyeLandmarks,
    cfg: &MeasureConfig,
) -> Result<ClinicalMeasurements> {
    landmarks.validate().map_err(|e| e.at_stage("landmarks"))?;
    let iris = landmarks.iris_circle().map_err(|e| e.at_stage("iris-circle"))?;
    let clr = detect_clr(img, &iris, &cfg.clr).map_err(|e| e.at_stage("clr"))?;
    let mrd1_px = measure_mrd1_with(landmarks, clr.point, cfg.distance, cfg.mrd1_mode)
        .map_err(|e| e.at_stage("mrd1"))?;
    let iris_ratio_pct = measure_iris_ratio(landmarks).map_err(|e| e.at_stage("iris-ratio"))?;
    let (mrd1_mm, mm_per_px) =
        px_to_mm(mrd1_px, &iris, &cfg.calibration).map_err(|e| e.at_stage("calibration"))?;
    Ok(ClinicalMeasurements {
        mrd1_px,
        mrd1_mm,
        iris_ratio_pct,
        clr: clr.point,
        clr_found: clr.found,
        mm_per_px,
    })
}
