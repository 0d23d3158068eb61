//! Filter bank feeding the deep model: gamma, histogram equalization, Canny,
//! Harris, difference of Gaussians, and the seven-channel stack.
//!
//! Every convolution pads by replicating the border pixel.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Number of planes in a [`FeatureStack`].
pub const FEATURE_CHANNELS: usize = 7;

/// Channel names in stack order.
pub const CHANNEL_NAMES: [&str; FEATURE_CHANNELS] =
    ["grayscale", "gamma_1.5", "gamma_0.667", "histeq", "canny", "harris", "dog"];

/// Filter parameters for [`build_feature_stack`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    pub gamma_high: f64,
    pub gamma_low: f64,
    pub canny_sigma: f64,
    pub canny_lo: f64,
    pub canny_hi: f64,
    pub harris_k: f64,
    pub harris_sigma: f64,
    pub dog_sigma1: f64,
    pub dog_sigma2: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            gamma_high: 1.5,
            gamma_low: 1.0 / 1.5,
            canny_sigma: 1.0,
            canny_lo: 50.0,
            canny_hi: 100.0,
            harris_k: 0.04,
            harris_sigma: 1.0,
            dog_sigma1: 1.0,
            dog_sigma2: 2.0,
        }
    }
}

/// Floating-point working plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn from_image(img: &GrayImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            data: img.data().iter().map(|&v| v as f64).collect(),
        }
    }

    fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    #[inline]
    pub fn at(&self, col: usize, row: usize) -> f64 {
        self.data[row * self.width + col]
    }

    /// Replicate-padded read.
    #[inline]
    fn at_clamped(&self, col: isize, row: isize) -> f64 {
        let c = col.clamp(0, self.width as isize - 1) as usize;
        let r = row.clamp(0, self.height as isize - 1) as usize;
        self.data[r * self.width + c]
    }

    fn to_image(&self, f: impl Fn(f64) -> f64) -> GrayImage {
        let data = self
            .data
            .iter()
            .map(|&v| libm::round(f(v)).clamp(0.0, 255.0) as u8)
            .collect();
        GrayImage::new(self.width, self.height, data).expect("plane dimensions are valid")
    }
}

/// `out = round(255 * (in / 255)^gamma)`.
pub fn gamma_correct(img: &GrayImage, gamma: f64) -> Result<GrayImage> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::param(format!("gamma must be positive, got {gamma}")));
    }
    let mut lut = [0u8; 256];
    for (v, slot) in lut.iter_mut().enumerate() {
        *slot = libm::round(255.0 * libm::pow(v as f64 / 255.0, gamma)) as u8;
    }
    Ok(img.map_lut(&lut))
}

/// Classic CDF remap. A constant image is returned unchanged.
pub fn hist_equalize(img: &GrayImage) -> GrayImage {
    let mut hist = [0usize; 256];
    for &v in img.data() {
        hist[v as usize] += 1;
    }
    let n = img.data().len();
    let mut cdf = [0usize; 256];
    let mut acc = 0;
    for (i, &h) in hist.iter().enumerate() {
        acc += h;
        cdf[i] = acc;
    }
    let cdf_min = cdf.iter().copied().find(|&c| c > 0).unwrap_or(0);
    if n == cdf_min {
        return img.clone();
    }
    let denom = (n - cdf_min) as f64;
    let mut lut = [0u8; 256];
    for (v, slot) in lut.iter_mut().enumerate() {
        let num = cdf[v].saturating_sub(cdf_min) as f64;
        *slot = libm::round(num / denom * 255.0) as u8;
    }
    img.map_lut(&lut)
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = libm::ceil(3.0 * sigma).max(1.0) as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| libm::exp(-((i * i) as f64) / (2.0 * sigma * sigma)))
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Separable Gaussian blur with replicate padding. `sigma <= 0` copies.
pub fn gaussian_blur(plane: &Plane, sigma: f64) -> Plane {
    if !(sigma > 0.0) {
        return plane.clone();
    }
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as isize;
    let (w, h) = (plane.width, plane.height);
    let mut tmp = Plane::zeros(w, h);
    for row in 0..h {
        for col in 0..w {
            let mut s = 0.0;
            for (i, kv) in k.iter().enumerate() {
                s += kv * plane.at_clamped(col as isize + i as isize - r, row as isize);
            }
            tmp.data[row * w + col] = s;
        }
    }
    let mut out = Plane::zeros(w, h);
    for row in 0..h {
        for col in 0..w {
            let mut s = 0.0;
            for (i, kv) in k.iter().enumerate() {
                s += kv * tmp.at_clamped(col as isize, row as isize + i as isize - r);
            }
            out.data[row * w + col] = s;
        }
    }
    out
}

/// Sobel derivatives `(gx, gy)`, unnormalised.
pub fn sobel(plane: &Plane) -> (Plane, Plane) {
    let (w, h) = (plane.width, plane.height);
    let mut gx = Plane::zeros(w, h);
    let mut gy = Plane::zeros(w, h);
    for row in 0..h as isize {
        for col in 0..w as isize {
            let p = |dc: isize, dr: isize| plane.at_clamped(col + dc, row + dr);
            let x = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let y = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            let i = row as usize * w + col as usize;
            gx.data[i] = x;
            gy.data[i] = y;
        }
    }
    (gx, gy)
}

/// Canny edge map with values in {0, 255}. Thresholds apply to the L2 Sobel
/// magnitude of the blurred image.
pub fn canny_edges(img: &GrayImage, sigma: f64, lo: f64, hi: f64) -> Result<GrayImage> {
    if !(lo >= 0.0 && lo <= hi) {
        return Err(Error::param(format!(
            "canny thresholds need 0 <= lo <= hi, got lo={lo} hi={hi}"
        )));
    }
    let blurred = gaussian_blur(&Plane::from_image(img), sigma);
    let (gx, gy) = sobel(&blurred);
    let (w, h) = (img.width(), img.height());
    let mag: Vec<f64> = gx
        .data
        .iter()
        .zip(&gy.data)
        .map(|(x, y)| libm::sqrt(x * x + y * y))
        .collect();
    let mag_at = |c: isize, r: isize| -> f64 {
        if c < 0 || r < 0 || c >= w as isize || r >= h as isize {
            0.0
        } else {
            mag[r as usize * w + c as usize]
        }
    };

    // non-maximum suppression along the quantised gradient direction
    let mut thin = vec![0.0; w * h];
    for row in 0..h {
        for col in 0..w {
            let i = row * w + col;
            let m = mag[i];
            if m <= 0.0 {
                continue;
            }
            let angle = libm::atan2(gy.data[i], gx.data[i]).to_degrees();
            let a = if angle < 0.0 { angle + 180.0 } else { angle };
            let (dc, dr) = if !(22.5..157.5).contains(&a) {
                (1, 0)
            } else if a < 67.5 {
                (1, 1)
            } else if a < 112.5 {
                (0, 1)
            } else {
                (-1, 1)
            };
            let (c, r) = (col as isize, row as isize);
            let ahead = mag_at(c + dc, r + dr);
            let behind = mag_at(c - dc, r - dr);
            if m > ahead && m >= behind {
                thin[i] = m;
            }
        }
    }

    // double threshold + hysteresis over 8-neighbourhoods
    let mut out = vec![0u8; w * h];
    let mut queue = VecDeque::new();
    for (i, &m) in thin.iter().enumerate() {
        if m > 0.0 && m >= hi {
            out[i] = 255;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (col, row) = ((i % w) as isize, (i / w) as isize);
        for dr in -1..=1 {
            for dc in -1..=1 {
                let (c, r) = (col + dc, row + dr);
                if c < 0 || r < 0 || c >= w as isize || r >= h as isize {
                    continue;
                }
                let j = r as usize * w + c as usize;
                if out[j] == 0 && thin[j] > 0.0 && thin[j] >= lo {
                    out[j] = 255;
                    queue.push_back(j);
                }
            }
        }
    }
    GrayImage::new(w, h, out)
}

/// Raw Harris response `det(M) - k trace(M)^2` on the Gaussian-weighted
/// structure tensor of Sobel derivatives (image scaled to [0, 1]).
pub fn harris_response_raw(img: &GrayImage, k: f64, sigma: f64) -> Plane {
    let mut plane = Plane::from_image(img);
    plane.data.iter_mut().for_each(|v| *v /= 255.0);
    let (gx, gy) = sobel(&plane);
    let (w, h) = (img.width(), img.height());
    let mut xx = Plane::zeros(w, h);
    let mut yy = Plane::zeros(w, h);
    let mut xy = Plane::zeros(w, h);
    for i in 0..w * h {
        xx.data[i] = gx.data[i] * gx.data[i];
        yy.data[i] = gy.data[i] * gy.data[i];
        xy.data[i] = gx.data[i] * gy.data[i];
    }
    let (xx, yy, xy) = (
        gaussian_blur(&xx, sigma),
        gaussian_blur(&yy, sigma),
        gaussian_blur(&xy, sigma),
    );
    let mut out = Plane::zeros(w, h);
    for i in 0..w * h {
        let det = xx.data[i] * yy.data[i] - xy.data[i] * xy.data[i];
        let tr = xx.data[i] + yy.data[i];
        out.data[i] = det - k * tr * tr;
    }
    out
}

/// Harris response min-max rescaled to [0, 255]; a flat response maps to 0.
pub fn harris_response(img: &GrayImage, k: f64, sigma: f64) -> GrayImage {
    let raw = harris_response_raw(img, k, sigma);
    let (lo, hi) = raw
        .data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    if !(span > 1e-12 * hi.abs().max(lo.abs()).max(1e-300)) {
        return GrayImage::filled(img.width(), img.height(), 0);
    }
    raw.to_image(|v| (v - lo) / span * 255.0)
}

/// `blur(sigma1) - blur(sigma2) + 128`, rounded and clamped.
pub fn difference_of_gaussians(img: &GrayImage, sigma1: f64, sigma2: f64) -> Result<GrayImage> {
    if !(sigma1 > 0.0 && sigma1 < sigma2 && sigma2.is_finite()) {
        return Err(Error::param(format!(
            "DoG needs 0 < sigma1 < sigma2, got {sigma1} and {sigma2}"
        )));
    }
    Ok(difference_of_gaussians_raw(img, sigma1, sigma2).to_image(|v| v + 128.0))
}

/// Signed band-pass response before the 128 offset.
pub fn difference_of_gaussians_raw(img: &GrayImage, sigma1: f64, sigma2: f64) -> Plane {
    let plane = Plane::from_image(img);
    let a = gaussian_blur(&plane, sigma1);
    let b = gaussian_blur(&plane, sigma2);
    Plane {
        width: plane.width,
        height: plane.height,
        data: a.data.iter().zip(&b.data).map(|(x, y)| x - y).collect(),
    }
}

/// Seven equally sized planes in [`CHANNEL_NAMES`] order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureStack {
    width: usize,
    height: usize,
    channels: Vec<GrayImage>,
}

impl FeatureStack {
    pub fn new(channels: Vec<GrayImage>) -> Result<Self> {
        if channels.len() != FEATURE_CHANNELS {
            return Err(Error::param(format!(
                "feature stack needs {FEATURE_CHANNELS} channels, got {}",
                channels.len()
            )));
        }
        let (w, h) = (channels[0].width(), channels[0].height());
        if channels.iter().any(|c| c.width() != w || c.height() != h) {
            return Err(Error::param("feature stack channels differ in size"));
        }
        Ok(Self {
            width: w,
            height: h,
            channels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> &[GrayImage] {
        &self.channels
    }

    pub fn channel(&self, i: usize) -> &GrayImage {
        &self.channels[i]
    }
}

/// Stacks grayscale, gamma(1.5), gamma(1/1.5), histeq, Canny, Harris and DoG.
pub fn build_feature_stack(img: &GrayImage) -> Result<FeatureStack> {
    build_feature_stack_with(img, &FilterParams::default())
}

pub fn build_feature_stack_with(img: &GrayImage, p: &FilterParams) -> Result<FeatureStack> {
    FeatureStack::new(vec![
        img.clone(),
        gamma_correct(img, p.gamma_high)?,
        gamma_correct(img, p.gamma_low)?,
        hist_equalize(img),
        canny_edges(img, p.canny_sigma, p.canny_lo, p.canny_hi)?,
        harris_response(img, p.harris_k, p.harris_sigma),
        difference_of_gaussians(img, p.dog_sigma1, p.dog_sigma2)?,
    ])
}
