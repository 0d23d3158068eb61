//! Subcommand implementations.

pub mod classify;
pub mod eval;
pub mod features;
pub mod fit;
pub mod measure;
pub mod synth;

use std::path::Path;

use ptosis_core::clinical::{measure_eye_with, ClinicalMeasurements, MeasureConfig};
use ptosis_core::image::{crop_eye_region, CropRect};
use ptosis_core::{EyeLandmarks, GrayImage};

use crate::cli::{Cli, Command};
use crate::error::{ToolError, ToolResult};
use crate::{fsio, pgm};

pub fn run(cli: Cli) -> ToolResult<()> {
    match cli.command {
        Command::Measure(a) => measure::run(&a),
        Command::Classify(a) => classify::run(&a),
        Command::Fit(a) => fit::run(&a),
        Command::Synth(a) => synth::run(&a),
        Command::Eval(a) => eval::run(&a),
        Command::Features(a) => features::run(&a),
    }
}

pub(crate) fn thread_pool(jobs: usize) -> ToolResult<rayon::ThreadPool> {
    if jobs == 0 {
        return Err(ToolError::input("--jobs must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| ToolError::Compute(format!("worker pool: {e}")))
}

/// Decoded image plus its raw bytes for hashing.
pub(crate) fn load_image(path: &Path) -> ToolResult<(GrayImage, Vec<u8>)> {
    let bytes = fsio::read_bytes(path)?;
    let img = pgm::decode(&bytes).map_err(|e| ToolError::input(format!("{}: {e}", path.display())))?;
    Ok((img, bytes))
}

/// Crops the eye, measures it in crop coordinates and maps the reflex back.
pub(crate) fn measure_in_image(
    img: &GrayImage,
    lm: &EyeLandmarks,
    cfg: &MeasureConfig,
    margin: f64,
) -> ToolResult<(ClinicalMeasurements, CropRect)> {
    let context = format!("{} eye", lm.side.as_str());
    lm.validate_within(img.width(), img.height())
        .map_err(|e| ToolError::schema(&context, e))?;
    let crop = crop_eye_region(img, &lm.outline(), margin).map_err(|e| match e {
        ptosis_core::Error::Parameter(_) => ToolError::schema(&context, e),
        other => ToolError::Compute(format!("{context}: measurement failed at crop: {other}")),
    })?;
    let local = lm.map(|p| crop.to_crop(p));
    let mut m = measure_eye_with(&crop.image, &local, cfg).map_err(|e| ToolError::Compute(format!("{context}: {e}")))?;
    m.clr = crop.to_image(m.clr);
    Ok((m, crop.rect))
}

pub(crate) fn rect_array(r: CropRect) -> [usize; 4] {
    [r.x0, r.y0, r.x1, r.y1]
}
