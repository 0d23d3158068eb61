//! 8-bit grayscale rasters, eye-region cropping and mirroring.
//!
//! Pixel `(col, row)` covers the unit square `[col, col+1) x [row, row+1)`,
//! so its centre sits at `(col + 0.5, row + 0.5)` in continuous coordinates.
//! Landmarks and geometric primitives use the continuous frame.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;

/// Default crop padding, as a fraction of the larger landmark box side.
pub const DEFAULT_CROP_MARGIN: f64 = 0.5;

/// Row-major single-channel 8-bit image.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::param(format!(
                "pixel buffer holds {} values, expected {}",
                data.len(),
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Image filled with one intensity.
    ///
    /// # Panics
    /// If either dimension is zero.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Builds an image by evaluating `f(col, row)` for every pixel.
    ///
    /// # Panics
    /// If either dimension is zero.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(col, row));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> u8 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, col: usize, row: usize, value: u8) {
        self.data[row * self.width + col] = value;
    }

    /// Applies a per-intensity lookup table.
    pub fn map_lut(&self, lut: &[u8; 256]) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| lut[v as usize]).collect(),
        }
    }

    /// Copies the pixels of `rect`, which must lie inside the image.
    pub fn sub_image(&self, rect: CropRect) -> Result<Self> {
        if rect.is_empty() || rect.x1 > self.width || rect.y1 > self.height {
            return Err(Error::InvalidRegion(format!(
                "rectangle {rect:?} does not fit a {}x{} image",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(rect.width() * rect.height());
        for row in rect.y0..rect.y1 {
            let start = row * self.width;
            data.extend_from_slice(&self.data[start + rect.x0..start + rect.x1]);
        }
        Self::new(rect.width(), rect.height(), data)
    }

    /// Nearest-neighbour upscaling by an integer factor. Under the pixel-square
    /// convention a continuous point `p` maps to `p * factor`.
    pub fn upscale_nearest(&self, factor: usize) -> Self {
        assert!(factor > 0, "scale factor must be positive");
        Self::from_fn(self.width * factor, self.height * factor, |c, r| {
            self.get(c / factor, r / factor)
        })
    }
}

/// Half-open pixel rectangle `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CropRect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl CropRect {
    pub fn width(&self) -> usize {
        self.x1.saturating_sub(self.x0)
    }

    pub fn height(&self) -> usize {
        self.y1.saturating_sub(self.y0)
    }

    pub fn is_empty(&self) -> bool {
        self.width() == 0 || self.height() == 0
    }

    /// Offset to subtract from full-image coordinates to get crop coordinates.
    pub fn offset(&self) -> Point2 {
        Point2::new(self.x0 as f64, self.y0 as f64)
    }
}

/// An eye crop together with the rectangle it was cut from.
#[derive(Debug, Clone, PartialEq)]
pub struct EyeCrop {
    pub image: GrayImage,
    pub rect: CropRect,
}

impl EyeCrop {
    /// Translates a full-image point into crop coordinates.
    pub fn to_crop(&self, p: Point2) -> Point2 {
        p - self.rect.offset()
    }

    /// Translates a crop point back into full-image coordinates.
    pub fn to_image(&self, p: Point2) -> Point2 {
        p + self.rect.offset()
    }
}

/// Rectangle covering the bounding box of `points` grown by
/// `margin * max(box width, box height)` on every side, clamped to an image
/// of the given size.
pub fn crop_rect(width: usize, height: usize, points: &[Point2], margin: f64) -> Result<CropRect> {
    if points.is_empty() {
        return Err(Error::param("crop needs at least one landmark"));
    }
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(Error::param(format!("crop margin must be >= 0, got {margin}")));
    }
    let (w, h) = (width as f64, height as f64);
    for p in points {
        if !(p.is_finite() && p.x >= 0.0 && p.y >= 0.0 && p.x <= w && p.y <= h) {
            return Err(Error::InvalidRegion(format!(
                "landmark ({}, {}) lies outside the {width}x{height} image",
                p.x, p.y
            )));
        }
    }
    let mut min = points[0];
    let mut max = points[0];
    for p in &points[1..] {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    }
    let grow = margin * (max.x - min.x).max(max.y - min.y);
    let x0 = libm::floor(min.x - grow).max(0.0);
    let y0 = libm::floor(min.y - grow).max(0.0);
    let x1 = libm::ceil(max.x + grow).min(w);
    let y1 = libm::ceil(max.y + grow).min(h);
    let rect = CropRect {
        x0: x0 as usize,
        y0: y0 as usize,
        x1: x1 as usize,
        y1: y1 as usize,
    };
    if rect.is_empty() {
        return Err(Error::InvalidRegion(format!(
            "crop rectangle {rect:?} is empty"
        )));
    }
    Ok(rect)
}

/// Cuts the eye region spanned by the six outline landmarks.
pub fn crop_eye_region(img: &GrayImage, six_points: &[Point2; 6], margin: f64) -> Result<EyeCrop> {
    let rect = crop_rect(img.width(), img.height(), six_points, margin)?;
    Ok(EyeCrop {
        image: img.sub_image(rect)?,
        rect,
    })
}

/// Left-right flip: column `j` moves to column `width - 1 - j`.
pub fn mirror_horizontal(img: &GrayImage) -> GrayImage {
    let mut data = Vec::with_capacity(img.data.len());
    for row in img.data.chunks_exact(img.width) {
        data.extend(row.iter().rev());
    }
    GrayImage {
        width: img.width,
        height: img.height,
        data,
    }
}

/// Mirrors a continuous point across the vertical axis of an image of `width`.
pub fn mirror_point(p: Point2, width: usize) -> Point2 {
    Point2::new(width as f64 - p.x, p.y)
}
