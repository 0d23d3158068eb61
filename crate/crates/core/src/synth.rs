//! Synthetic eye renderer with analytic ground truth.
//!
//! Lids are parabolas `y(x) = apex_y + curvature * (x - lid_center_x)^2`
//! (image coordinates, `y` down). The upper lid has positive curvature, the
//! lower lid negative, and the canthi are where the two curves meet. The
//! visible aperture is the set of points strictly between the curves.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::classify::Label;
use crate::clinical::{EyeLandmarks, Side, CONTOUR_POINTS, DEFAULT_IRIS_DIAMETER_MM};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::image::GrayImage;

/// Synthetic eyes with ground-truth MRD1 below this are labelled ptosis.
pub const PTOSIS_MRD1_MM: f64 = 2.0;
/// Radius of the painted reflex dot.
pub const CLR_DOT_RADIUS: f64 = 2.0;
/// Samples along the upper-lid curve for ground-truth MRD1.
pub const LID_SAMPLES: usize = 10_000;
/// Angular slices for the iris-ratio quadrature.
const QUADRATURE_SLICES: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parabola {
    pub apex_y: f64,
    pub curvature: f64,
}

impl Parabola {
    pub fn y_at(&self, center_x: f64, x: f64) -> f64 {
        let dx = x - center_x;
        self.apex_y + self.curvature * dx * dx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intensities {
    pub skin: u8,
    pub sclera: u8,
    pub iris: u8,
    pub pupil: u8,
    pub clr: u8,
}

impl Default for Intensities {
    fn default() -> Self {
        Self {
            skin: 160,
            sclera: 215,
            iris: 90,
            pupil: 25,
            clr: 255,
        }
    }
}

/// Full description of one synthetic eye.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EyeSceneSpec {
    pub width: usize,
    pub height: usize,
    pub side: Side,
    pub iris_center: Point2,
    pub iris_radius: f64,
    pub pupil_radius: f64,
    pub lid_center_x: f64,
    pub upper_lid: Parabola,
    pub lower_lid: Parabola,
    /// Reflex position relative to the iris centre.
    pub clr_offset: Point2,
    pub intensities: Intensities,
    pub noise_sigma: f64,
    /// Standard deviation of Gaussian jitter added to the emitted contour
    /// landmarks, imitating detector error. Zero emits exact curve samples.
    #[serde(default)]
    pub landmark_jitter_px: f64,
    /// Secondary specular highlight, relative to the iris centre. Painted
    /// like the reflex when visible; not part of the ground truth.
    #[serde(default)]
    pub glint_offset: Option<Point2>,
    pub seed: u64,
}

/// How the ground-truth iris ratio was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioMethod {
    /// Closed-form circular segment (flat lid, other lid clear).
    Analytic,
    /// Numerical integration over the disc.
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Signed MRD1 from the reference point: the reflex when visible, the
    /// iris centre when the lid covers it.
    pub mrd1_px: f64,
    pub mrd1_mm: f64,
    /// Signed distance from the reflex position itself, visible or not.
    pub clr_mrd1_px: f64,
    pub clr_mrd1_mm: f64,
    pub iris_ratio_pct: f64,
    pub ratio_method: RatioMethod,
    pub clr: Point2,
    pub clr_visible: bool,
    pub mm_per_px: f64,
    pub landmarks: EyeLandmarks,
    pub ptosis_label: Label,
}

impl EyeSceneSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::Scene(msg));
        if self.width == 0 || self.height == 0 {
            return bad(format!("image size {}x{} is empty", self.width, self.height));
        }
        if !(self.iris_radius > 0.0 && self.pupil_radius > 0.0) {
            return bad(format!(
                "radii must be positive (iris {}, pupil {})",
                self.iris_radius, self.pupil_radius
            ));
        }
        if self.pupil_radius >= self.iris_radius {
            return bad(format!(
                "pupil radius {} must be smaller than iris radius {}",
                self.pupil_radius, self.iris_radius
            ));
        }
        if self.upper_lid.apex_y >= self.lower_lid.apex_y {
            return bad("upper-lid apex must lie above the lower-lid apex".into());
        }
        if self.upper_lid.curvature <= self.lower_lid.curvature {
            return bad("lid curves never meet: upper curvature must exceed lower".into());
        }
        if self.clr_offset.norm() >= self.iris_radius {
            return bad(format!(
                "reflex offset {} exceeds the iris radius {}",
                self.clr_offset.norm(),
                self.iris_radius
            ));
        }
        if let Some(g) = self.glint_offset {
            if g.norm() >= self.iris_radius || g.distance(self.clr_offset) <= 2.0 * CLR_DOT_RADIUS {
                return bad("glint must lie inside the iris and apart from the reflex".into());
            }
        }
        if !(self.noise_sigma >= 0.0 && self.landmark_jitter_px >= 0.0) {
            return bad("noise and jitter must be non-negative".into());
        }
        let (t, n) = self.canthi();
        let (w, h) = (self.width as f64, self.height as f64);
        let c = self.iris_center;
        let r = self.iris_radius;
        for p in [t, n, c - Point2::new(r, r), c + Point2::new(r, r)] {
            if !(p.x >= 0.0 && p.y >= 0.0 && p.x <= w && p.y <= h) {
                return bad(format!("point ({}, {}) falls outside the image", p.x, p.y));
            }
        }
        Ok(())
    }

    pub fn upper_y(&self, x: f64) -> f64 {
        self.upper_lid.y_at(self.lid_center_x, x)
    }

    pub fn lower_y(&self, x: f64) -> f64 {
        self.lower_lid.y_at(self.lid_center_x, x)
    }

    pub fn in_aperture(&self, p: Point2) -> bool {
        p.y > self.upper_y(p.x) && p.y < self.lower_y(p.x)
    }

    /// Half the horizontal distance between the canthi.
    pub fn half_width(&self) -> f64 {
        libm::sqrt(
            (self.lower_lid.apex_y - self.upper_lid.apex_y)
                / (self.upper_lid.curvature - self.lower_lid.curvature),
        )
    }

    /// `(temporal, nasal)` canthus. The temporal corner of a left eye lies
    /// toward larger `x` in the image, of a right eye toward smaller `x`.
    pub fn canthi(&self) -> (Point2, Point2) {
        let d = self.half_width() * self.temporal_sign();
        let t = Point2::new(self.lid_center_x + d, 0.0);
        let n = Point2::new(self.lid_center_x - d, 0.0);
        (
            Point2::new(t.x, self.upper_y(t.x)),
            Point2::new(n.x, self.upper_y(n.x)),
        )
    }

    fn temporal_sign(&self) -> f64 {
        match self.side {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }

    pub fn clr(&self) -> Point2 {
        self.iris_center + self.clr_offset
    }

    pub fn clr_visible(&self) -> bool {
        self.in_aperture(self.clr())
    }

    pub fn mm_per_px(&self) -> f64 {
        DEFAULT_IRIS_DIAMETER_MM / (2.0 * self.iris_radius)
    }

    /// Exact landmarks: nine upper-lid samples (canthi included), seven
    /// lower-lid samples, and the four rim points plus centre of the iris.
    pub fn exact_landmarks(&self) -> EyeLandmarks {
        let (t, n) = self.canthi();
        let mut contour = [Point2::default(); CONTOUR_POINTS];
        for (k, slot) in contour.iter_mut().take(9).enumerate() {
            let x = t.x + (n.x - t.x) * k as f64 / 8.0;
            *slot = Point2::new(x, self.upper_y(x));
        }
        for k in 1..8 {
            let x = n.x + (t.x - n.x) * k as f64 / 8.0;
            contour[8 + k] = Point2::new(x, self.lower_y(x));
        }
        let c = self.iris_center;
        let r = self.iris_radius;
        let s = self.temporal_sign();
        EyeLandmarks {
            side: self.side,
            contour,
            iris: [
                c,
                c + Point2::new(s * r, 0.0),
                c + Point2::new(0.0, -r),
                c - Point2::new(s * r, 0.0),
                c + Point2::new(0.0, r),
            ],
        }
    }

    /// Signed distance from `p` to the upper-lid curve between the canthi,
    /// by dense sampling. Negative when the nearest curve point lies below `p`.
    pub fn signed_lid_distance(&self, p: Point2) -> f64 {
        let (t, n) = self.canthi();
        let mut best = (f64::INFINITY, p);
        for i in 0..=LID_SAMPLES {
            let x = t.x + (n.x - t.x) * i as f64 / LID_SAMPLES as f64;
            let q = Point2::new(x, self.upper_y(x));
            let d = p.distance(q);
            if d < best.0 {
                best = (d, q);
            }
        }
        if best.1.y > p.y {
            -best.0
        } else {
            best.0
        }
    }

    /// Fraction of the iris disc inside the aperture, by quadrature over
    /// `x = cx + r sin(theta)`.
    pub fn visible_iris_fraction_quadrature(&self) -> f64 {
        let c = self.iris_center;
        let r = self.iris_radius;
        let dtheta = PI / QUADRATURE_SLICES as f64;
        let mut area = 0.0;
        for i in 0..QUADRATURE_SLICES {
            let theta = -PI / 2.0 + (i as f64 + 0.5) * dtheta;
            let (s, co) = libm::sincos(theta);
            let x = c.x + r * s;
            let h = r * co;
            let top = (c.y - h).max(self.upper_y(x));
            let bottom = (c.y + h).min(self.lower_y(x));
            area += (bottom - top).max(0.0) * r * co * dtheta;
        }
        (area / (PI * r * r)).clamp(0.0, 1.0)
    }

    /// Closed-form fraction when the upper lid is flat and the lower lid
    /// stays clear of the disc.
    pub fn visible_iris_fraction_analytic(&self) -> Option<f64> {
        if self.upper_lid.curvature != 0.0 {
            return None;
        }
        let c = self.iris_center;
        let r = self.iris_radius;
        let hw = self.half_width();
        if c.x - r < self.lid_center_x - hw || c.x + r > self.lid_center_x + hw {
            return None;
        }
        // lower lid clear of the disc: check the chord bottoms against the curve
        let clear = (0..=256).all(|i| {
            let x = c.x - r + 2.0 * r * i as f64 / 256.0;
            let dx = x - c.x;
            self.lower_y(x) >= c.y + libm::sqrt((r * r - dx * dx).max(0.0))
        });
        if !clear {
            return None;
        }
        let d = c.y - self.upper_lid.apex_y;
        Some(1.0 - segment_area(r, d) / (PI * r * r))
    }

    /// Monte Carlo estimate of the visible fraction with its standard error.
    pub fn visible_iris_fraction_monte_carlo(&self, samples: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = self.iris_center;
        let r = self.iris_radius;
        let mut hits = 0usize;
        let mut drawn = 0usize;
        while drawn < samples {
            let u: f64 = rng.random_range(-1.0..1.0);
            let v: f64 = rng.random_range(-1.0..1.0);
            if u * u + v * v > 1.0 {
                continue;
            }
            drawn += 1;
            if self.in_aperture(c + Point2::new(u * r, v * r)) {
                hits += 1;
            }
        }
        let p = hits as f64 / samples as f64;
        (p, libm::sqrt(p * (1.0 - p) / samples as f64))
    }
}

/// Area of the cap of a radius-`r` disc cut off by a chord at signed distance
/// `d` from the centre, on the side away from the centre.
pub fn segment_area(r: f64, d: f64) -> f64 {
    if d >= r {
        0.0
    } else if d <= -r {
        PI * r * r
    } else {
        r * r * libm::acos(d / r) - d * libm::sqrt(r * r - d * d)
    }
}

/// Paints the scene and derives its ground truth.
pub fn render_eye(spec: &EyeSceneSpec) -> Result<(GrayImage, GroundTruth)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let clr = spec.clr();
    let clr_visible = spec.clr_visible();
    let ink = spec.intensities;
    let c = spec.iris_center;
    let glint = spec.glint_offset.map(|g| c + g).filter(|&g| spec.in_aperture(g));
    let mut img = GrayImage::from_fn(spec.width, spec.height, |col, row| {
        let p = Point2::new(col as f64 + 0.5, row as f64 + 0.5);
        if clr_visible && p.distance(clr) <= CLR_DOT_RADIUS {
            return ink.clr;
        }
        if glint.is_some_and(|g| p.distance(g) <= CLR_DOT_RADIUS) {
            return ink.clr;
        }
        if !spec.in_aperture(p) {
            return ink.skin;
        }
        let d = p.distance(c);
        if d <= spec.pupil_radius {
            ink.pupil
        } else if d <= spec.iris_radius {
            ink.iris
        } else {
            ink.sclera
        }
    });
    if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma)
            .map_err(|e| Error::Scene(format!("noise model: {e}")))?;
        for row in 0..spec.height {
            for col in 0..spec.width {
                let v = img.get(col, row) as f64 + normal.sample(&mut rng);
                img.set(col, row, libm::round(v).clamp(0.0, 255.0) as u8);
            }
        }
    }

    let mut landmarks = spec.exact_landmarks();
    if spec.landmark_jitter_px > 0.0 {
        let jitter = Normal::new(0.0, spec.landmark_jitter_px)
            .map_err(|e| Error::Scene(format!("jitter model: {e}")))?;
        let (w, h) = (spec.width as f64, spec.height as f64);
        for p in landmarks.contour.iter_mut() {
            p.x = (p.x + jitter.sample(&mut rng)).clamp(0.0, w);
            p.y = (p.y + jitter.sample(&mut rng)).clamp(0.0, h);
        }
    }

    let mm_per_px = spec.mm_per_px();
    let reference = if clr_visible { clr } else { c };
    let mrd1_px = spec.signed_lid_distance(reference);
    let clr_mrd1_px = if clr_visible {
        mrd1_px
    } else {
        spec.signed_lid_distance(clr)
    };
    let (fraction, ratio_method) = match spec.visible_iris_fraction_analytic() {
        Some(f) => (f, RatioMethod::Analytic),
        None => (spec.visible_iris_fraction_quadrature(), RatioMethod::Quadrature),
    };
    let clr_mrd1_mm = clr_mrd1_px * mm_per_px;
    let truth = GroundTruth {
        mrd1_px,
        mrd1_mm: mrd1_px * mm_per_px,
        clr_mrd1_px,
        clr_mrd1_mm,
        iris_ratio_pct: 100.0 * fraction,
        ratio_method,
        clr,
        clr_visible,
        mm_per_px,
        landmarks,
        ptosis_label: Label::from_bool(clr_mrd1_mm < PTOSIS_MRD1_MM),
    };
    Ok((img, truth))
}

/// Anatomy-level description, turned into an [`EyeSceneSpec`] by
/// [`EyeSceneSpec::from_params`]. Lengths marked `_frac` are multiples of the
/// iris radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneParams {
    pub side: Side,
    pub iris_radius: f64,
    pub pupil_frac: f64,
    /// Height of the upper-lid apex above the iris centre in millimetres
    /// (default calibration); negative once the lid passes the centre.
    pub lid_height_mm: f64,
    pub half_width_frac: f64,
    /// Canthi sit this far below the iris centre.
    pub canthus_drop_frac: f64,
    /// Lower-lid apex sits this far below the iris centre.
    pub lower_depth_frac: f64,
    /// Lid centre minus iris centre, horizontally.
    pub lid_shift_frac: f64,
    pub clr_offset: Point2,
    /// Sub-pixel placement of the iris centre, each component in [0, 1).
    pub subpixel: Point2,
    pub intensities: Intensities,
    pub noise_sigma: f64,
    pub landmark_jitter_px: f64,
    pub glint_offset: Option<Point2>,
    pub seed: u64,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            side: Side::Left,
            iris_radius: 60.0,
            pupil_frac: 0.4,
            lid_height_mm: 4.0,
            half_width_frac: 2.2,
            canthus_drop_frac: 0.4,
            lower_depth_frac: 1.1,
            lid_shift_frac: 0.0,
            clr_offset: Point2::new(0.0, 0.0),
            subpixel: Point2::new(0.0, 0.0),
            intensities: Intensities::default(),
            noise_sigma: 0.0,
            landmark_jitter_px: 0.0,
            glint_offset: None,
            seed: 0,
        }
    }
}

impl EyeSceneSpec {
    pub fn from_params(p: &SceneParams) -> Result<Self> {
        let r = p.iris_radius;
        if !(r > 0.0) {
            return Err(Error::Scene(format!("iris radius {r} must be positive")));
        }
        let mm_per_px = DEFAULT_IRIS_DIAMETER_MM / (2.0 * r);
        let lid_up_px = p.lid_height_mm / mm_per_px;
        let hw = p.half_width_frac * r;
        let shift = p.lid_shift_frac * r;
        let margin = 0.6 * r;
        let cx = margin + hw + libm::fabs(shift) + p.subpixel.x - shift;
        let cy = margin + lid_up_px.max(r) + p.subpixel.y;
        let lid_cx = cx + shift;
        let apex_up = cy - lid_up_px;
        let canthus_y = cy + p.canthus_drop_frac * r;
        let apex_low = cy + p.lower_depth_frac * r;
        if apex_up >= canthus_y {
            return Err(Error::Scene(format!(
                "upper-lid apex at {apex_up} would sit below the canthi at {canthus_y}"
            )));
        }
        if apex_low <= canthus_y {
            return Err(Error::Scene("lower-lid apex must sit below the canthi".into()));
        }
        let width = libm::ceil(2.0 * (hw + libm::fabs(shift) + margin) + 1.0) as usize;
        let height = libm::ceil(cy + p.lower_depth_frac.max(1.0) * r + margin + 1.0) as usize;
        let spec = Self {
            width,
            height,
            side: p.side,
            iris_center: Point2::new(cx, cy),
            iris_radius: r,
            pupil_radius: p.pupil_frac * r,
            lid_center_x: lid_cx,
            upper_lid: Parabola {
                apex_y: apex_up,
                curvature: (canthus_y - apex_up) / (hw * hw),
            },
            lower_lid: Parabola {
                apex_y: apex_low,
                curvature: (canthus_y - apex_low) / (hw * hw),
            },
            clr_offset: p.clr_offset,
            intensities: p.intensities,
            noise_sigma: p.noise_sigma,
            landmark_jitter_px: p.landmark_jitter_px,
            glint_offset: p.glint_offset,
            seed: p.seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Parameter ranges for [`generate_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub n: usize,
    pub seed: u64,
    /// Upper-lid apex height above the iris centre, millimetres.
    pub lid_height_mm: (f64, f64),
    pub iris_radius_px: (f64, f64),
    pub noise_sigma: (f64, f64),
    /// Maximum reflex offset as a fraction of the iris radius.
    pub clr_offset_frac: f64,
    pub landmark_jitter_px: f64,
    /// Probability that an eye carries a secondary glint in the lower iris.
    #[serde(default)]
    pub glint_rate: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            n: 200,
            seed: 0,
            lid_height_mm: (-1.5, 6.0),
            iris_radius_px: (40.0, 80.0),
            noise_sigma: (0.0, 8.0),
            clr_offset_frac: 0.15,
            landmark_jitter_px: 0.0,
            glint_rate: 0.0,
        }
    }
}

/// splitmix64 finaliser over `seed + index * golden gamma`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Parameters of suite item `index`; depends only on `(config, index)`.
pub fn suite_params(config: &SuiteConfig, index: usize) -> SceneParams {
    let item_seed = derive_seed(config.seed, index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(item_seed);
    let iris_radius = uniform(&mut rng, config.iris_radius_px);
    let lid_height_mm = uniform(&mut rng, config.lid_height_mm);
    let half_width_frac = uniform(&mut rng, (2.0, 2.4));
    let canthus_drop_frac = uniform(&mut rng, (0.35, 0.5));
    let lower_depth_frac = uniform(&mut rng, (0.85, 1.3));
    let lid_shift_frac = uniform(&mut rng, (-0.15, 0.15));
    let angle = uniform(&mut rng, (0.0, 2.0 * PI));
    let radius = config.clr_offset_frac * iris_radius * libm::sqrt(uniform(&mut rng, (0.0, 1.0)));
    let clr_offset = Point2::new(radius * libm::cos(angle), radius * libm::sin(angle));
    let subpixel = Point2::new(uniform(&mut rng, (0.0, 1.0)), uniform(&mut rng, (0.0, 1.0)));
    let side = if rng.random_bool(0.5) {
        Side::Left
    } else {
        Side::Right
    };
    let mut byte = |lo: u8, hi: u8| rng.random_range(lo..=hi);
    let intensities = Intensities {
        skin: byte(140, 180),
        sclera: byte(195, 225),
        iris: byte(60, 120),
        pupil: byte(15, 40),
        clr: byte(250, 255),
    };
    let noise_sigma = uniform(&mut rng, config.noise_sigma);
    let seed = rng.random();
    // drawn last so suites without glints are unaffected by the option
    let glint_offset = (config.glint_rate > 0.0 && rng.random_bool(config.glint_rate.min(1.0))).then(|| {
        let angle = uniform(&mut rng, (PI / 6.0, 5.0 * PI / 6.0));
        let dist = uniform(&mut rng, (0.55, 0.8)) * iris_radius;
        Point2::new(dist * libm::cos(angle), dist * libm::sin(angle))
    });
    SceneParams {
        side,
        iris_radius,
        pupil_frac: 0.4,
        lid_height_mm,
        half_width_frac,
        canthus_drop_frac,
        lower_depth_frac,
        lid_shift_frac,
        clr_offset,
        subpixel,
        intensities,
        noise_sigma,
        landmark_jitter_px: config.landmark_jitter_px,
        glint_offset,
        seed,
    }
}

/// Scene of suite item `index`.
pub fn suite_spec(config: &SuiteConfig, index: usize) -> Result<EyeSceneSpec> {
    EyeSceneSpec::from_params(&suite_params(config, index))
}

/// Renders `config.n` eyes; identical configs give identical suites.
pub fn generate_suite(config: &SuiteConfig) -> Result<Vec<(GrayImage, GroundTruth)>> {
    if config.n == 0 {
        return Err(Error::param("suite size must be positive"));
    }
    (0..config.n)
        .map(|i| render_eye(&suite_spec(config, i)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open_eye() -> EyeSceneSpec {
        EyeSceneSpec::from_params(&SceneParams {
            lid_height_mm: 6.5,
            lower_depth_frac: 1.4,
            ..SceneParams::default()
        })
        .unwrap()
    }

    #[test]
    fn wide_open_eye_shows_the_whole_iris_and_reflex() {
        let spec = open_eye();
        let (img, truth) = render_eye(&spec).unwrap();
        assert!((truth.iris_ratio_pct - 100.0).abs() < 1e-6);
        assert!(truth.clr_visible);
        let clr = truth.clr;
        assert_eq!(img.get(clr.x as usize, clr.y as usize), spec.intensities.clr);
        assert_eq!(truth.ptosis_label, Label::NotPtosis);
    }

    #[test]
    fn flat_lid_through_centre_halves_the_iris() {
        let mut spec = open_eye();
        spec.upper_lid = Parabola {
            apex_y: spec.iris_center.y,
            curvature: 0.0,
        };
        // keep the canthi where the flat lid meets the lower curve
        let hw = 2.2 * spec.iris_radius;
        spec.lower_lid.curvature = (spec.iris_center.y - spec.lower_lid.apex_y) / (hw * hw);
        let (_, truth) = render_eye(&spec).unwrap();
        assert_eq!(truth.ratio_method, RatioMethod::Analytic);
        assert!((truth.iris_ratio_pct - 50.0).abs() < 1e-9);
        let (mc, se) = spec.visible_iris_fraction_monte_carlo(200_000, 3);
        assert!((100.0 * mc - 50.0).abs() < 0.2);
        assert!((mc - 0.5).abs() < 4.0 * se);
        assert!((spec.visible_iris_fraction_quadrature() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn covered_reflex_is_not_painted() {
        let spec = EyeSceneSpec::from_params(&SceneParams {
            lid_height_mm: -1.0,
            clr_offset: Point2::new(0.0, -5.0),
            ..SceneParams::default()
        })
        .unwrap();
        let (img, truth) = render_eye(&spec).unwrap();
        assert!(!truth.clr_visible);
        assert!(truth.clr_mrd1_px < 0.0);
        assert!(truth.mrd1_px < 0.0);
        assert!(img.data().iter().all(|&v| v != spec.intensities.clr));
        assert_eq!(truth.ptosis_label, Label::Ptosis);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = open_eye();
        spec.pupil_radius = spec.iris_radius;
        assert!(matches!(render_eye(&spec), Err(Error::Scene(_))));
        let mut spec = open_eye();
        spec.clr_offset = Point2::new(spec.iris_radius, 0.0);
        assert!(render_eye(&spec).is_err());
        let mut spec = open_eye();
        spec.upper_lid.apex_y = spec.lower_lid.apex_y + 1.0;
        assert!(render_eye(&spec).is_err());
        assert!(EyeSceneSpec::from_params(&SceneParams {
            lid_height_mm: -5.0,
            ..SceneParams::default()
        })
        .is_err());
    }

    #[test]
    fn landmark_layout_follows_the_index_convention() {
        for side in [Side::Left, Side::Right] {
            let spec = EyeSceneSpec::from_params(&SceneParams {
                side,
                ..SceneParams::default()
            })
            .unwrap();
            let lm = spec.exact_landmarks();
            let (t, n) = spec.canthi();
            assert_eq!(lm.contour[0], t);
            assert_eq!(lm.contour[8], n);
            let temporal_is_right = side == Side::Left;
            assert_eq!(lm.contour[0].x > lm.contour[8].x, temporal_is_right);
            assert_eq!(lm.iris[1].x > lm.iris[3].x, temporal_is_right);
            // upper lid above lower lid at matching x
            for k in 1..8 {
                assert!(lm.contour[k].y < spec.lower_y(lm.contour[k].x));
            }
            assert!(lm.contour_polygon().is_ok());
        }
    }

    #[test]
    fn suites_are_deterministic() {
        let cfg = SuiteConfig {
            n: 6,
            seed: 11,
            iris_radius_px: (20.0, 30.0),
            ..SuiteConfig::default()
        };
        assert_eq!(generate_suite(&cfg).unwrap(), generate_suite(&cfg).unwrap());
        assert!(generate_suite(&SuiteConfig { n: 0, ..cfg }).is_err());
    }

    #[test]
    fn droop_sweep_lowers_mrd1_strictly() {
        let mut last = f64::INFINITY;
        for step in 0..30 {
            let h = 6.0 - 0.25 * step as f64;
            let spec = EyeSceneSpec::from_params(&SceneParams {
                lid_height_mm: h,
                clr_offset: Point2::new(3.0, -4.0),
                ..SceneParams::default()
            })
            .unwrap();
            let (_, truth) = render_eye(&spec).unwrap();
            assert!(truth.clr_mrd1_mm < last, "step {step}: {} !< {last}", truth.clr_mrd1_mm);
            last = truth.clr_mrd1_mm;
        }
    }

    #[test]
    fn seeds_are_spread() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }
}
