use std::path::Path;

use ptosis_core::synth::{render_eye, suite_spec, GroundTruth, SuiteConfig};
use ptosis_core::GrayImage;
use rayon::prelude::*;

use super::thread_pool;
use crate::cli::SynthArgs;
use crate::error::{ToolError, ToolResult};
use crate::fsio;
use crate::landmarks::{EyeEntry, LandmarkFile, LANDMARK_VERSION};
use crate::pgm;
use crate::tables::{self, TruthRow};

pub fn suite_config(args: &SynthArgs) -> ToolResult<SuiteConfig> {
    let bad = |m: &str| Err(ToolError::input(m.to_owned()));
    if args.n == 0 {
        return bad("--n must be at least 1");
    }
    if !(args.lid_min_mm <= args.lid_max_mm) {
        return bad("--lid-min-mm must not exceed --lid-max-mm");
    }
    if !(args.radius_min > 0.0 && args.radius_min <= args.radius_max) {
        return bad("iris radius range must be positive and ordered");
    }
    if !(args.noise_max >= 0.0 && args.jitter_px >= 0.0) {
        return bad("--noise-max and --jitter-px must be non-negative");
    }
    if !(0.0..1.0).contains(&args.clr_offset_frac) {
        return bad("--clr-offset-frac must lie in [0, 1)");
    }
    if !(0.0..=1.0).contains(&args.glint_rate) {
        return bad("--glint-rate must lie in [0, 1]");
    }
    Ok(SuiteConfig {
        n: args.n,
        seed: args.seed,
        lid_height_mm: (args.lid_min_mm, args.lid_max_mm),
        iris_radius_px: (args.radius_min, args.radius_max),
        noise_sigma: (0.0, args.noise_max),
        clr_offset_frac: args.clr_offset_frac,
        landmark_jitter_px: args.jitter_px,
        glint_rate: args.glint_rate,
    })
}

pub fn item_id(index: usize) -> String {
    format!("{index:04}")
}

pub fn render_item(config: &SuiteConfig, index: usize) -> ToolResult<(GrayImage, GroundTruth)> {
    let spec = suite_spec(config, index)
        .map_err(|e| ToolError::input(format!("item {}: parameter ranges give an invalid scene: {e}", item_id(index))))?;
    render_eye(&spec).map_err(|e| ToolError::Compute(format!("item {}: {e}", item_id(index))))
}

pub fn write_suite(config: &SuiteConfig, out: &Path, jobs: usize) -> ToolResult<Vec<TruthRow>> {
    fsio::create_dir_all(out)?;
    let pool = thread_pool(jobs)?;
    let results: Vec<ToolResult<TruthRow>> = pool.install(|| {
        (0..config.n)
            .into_par_iter()
            .map(|i| {
                let (img, truth) = render_item(config, i)?;
                let id = item_id(i);
                let image_name = format!("{id}.pgm");
                fsio::write_atomic(&out.join(&image_name), &pgm::encode(&img))?;
                let doc = LandmarkFile {
                    version: LANDMARK_VERSION,
                    image: image_name,
                    eyes: vec![EyeEntry::from_landmarks(&truth.landmarks)],
                };
                fsio::write_atomic(&out.join(format!("{id}.landmarks.json")), doc.to_json().as_bytes())?;
                Ok(TruthRow {
                    id,
                    mrd1_px: truth.mrd1_px,
                    mrd1_mm: truth.mrd1_mm,
                    iris_ratio_pct: truth.iris_ratio_pct,
                    label: truth.ptosis_label,
                })
            })
            .collect()
    });
    let rows = results.into_iter().collect::<ToolResult<Vec<_>>>()?;
    fsio::write_atomic(&out.join("truth.csv"), &tables::write_truth(&rows))?;
    let mut meta = serde_json::to_string_pretty(config).expect("suite config serializes");
    meta.push('\n');
    fsio::write_atomic(&out.join("suite.json"), meta.as_bytes())?;
    Ok(rows)
}

pub fn run(args: &SynthArgs) -> ToolResult<()> {
    let config = suite_config(args)?;
    let rows = write_suite(&config, &args.out, args.jobs)?;
    let ptosis = rows.iter().filter(|r| r.label.is_ptosis()).count();
    eprintln!(
        "wrote {} eyes to {} ({ptosis} ptosis, {} not)",
        rows.len(),
        args.out.display(),
        rows.len() - ptosis
    );
    Ok(())
}
