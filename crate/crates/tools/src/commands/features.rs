use ptosis_core::filters::{build_feature_stack, CHANNEL_NAMES};
use ptosis_core::image::{crop_eye_region, mirror_horizontal};
use ptosis_core::Side;

use super::load_image;
use crate::cli::{FeaturesArgs, StackFormat};
use crate::error::{ToolError, ToolResult};
use crate::landmarks::LandmarkFile;
use crate::{fsio, pgm, stack_file};

/// Writes one stack per eye; right eyes are mirrored so every stack shows a
/// left-eye orientation.
pub fn run(args: &FeaturesArgs) -> ToolResult<()> {
    let doc = LandmarkFile::load(&args.landmarks)?;
    let img_path = args.image.clone().unwrap_or_else(|| doc.image_path(&args.landmarks));
    let (img, _) = load_image(&img_path)?;
    fsio::create_dir_all(&args.out)?;
    for entry in &doc.eyes {
        let lm = entry.to_landmarks();
        let context = format!("{} eye", lm.side.as_str());
        lm.validate_within(img.width(), img.height())
            .map_err(|e| ToolError::schema(&context, e))?;
        let crop = crop_eye_region(&img, &lm.outline(), args.margin)
            .map_err(|e| ToolError::from_core(&context, e))?;
        let oriented = match lm.side {
            Side::Left => crop.image,
            Side::Right => mirror_horizontal(&crop.image),
        };
        let stack = build_feature_stack(&oriented).map_err(|e| ToolError::from_core(&context, e))?;
        let side = lm.side.as_str();
        match args.format {
            StackFormat::Raw => {
                fsio::write_atomic(&args.out.join(format!("{side}.fstack")), &stack_file::encode(&stack))?;
            }
            StackFormat::Pgm => {
                for (i, (ch, name)) in stack.channels().iter().zip(CHANNEL_NAMES).enumerate() {
                    let file = args.out.join(format!("{side}.{i}-{name}.pgm"));
                    fsio::write_atomic(&file, &pgm::encode(ch))?;
                }
            }
        }
        eprintln!("{side}: {}x{} crop, 7 channels", stack.width(), stack.height());
    }
    Ok(())
}
