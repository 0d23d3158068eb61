//! Binary container for a seven-channel feature stack.
//!
//! Layout, all integers little-endian `u32`:
//! `"PTFS"`, version, width, height, channel count, then each channel's
//! `width * height` bytes in row-major order, channels in stack order.

use ptosis_core::filters::{FeatureStack, FEATURE_CHANNELS};
use ptosis_core::GrayImage;

pub const MAGIC: &[u8; 4] = b"PTFS";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StackHeader {
    pub version: u32,
    pub width: u32,
    pub height: u32,
    pub channels: u32,
}

pub fn encode(stack: &FeatureStack) -> Vec<u8> {
    let (w, h) = (stack.width(), stack.height());
    let mut out = Vec::with_capacity(HEADER_LEN + FEATURE_CHANNELS * w * h);
    out.extend_from_slice(MAGIC);
    for v in [VERSION, w as u32, h as u32, stack.channels().len() as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for ch in stack.channels() {
        out.extend_from_slice(ch.data());
    }
    out
}

pub fn decode_header(bytes: &[u8]) -> Result<StackHeader, String> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err("not a feature-stack file".into());
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().expect("4 bytes"));
    Ok(StackHeader {
        version: word(0),
        width: word(1),
        height: word(2),
        channels: word(3),
    })
}

pub fn decode(bytes: &[u8]) -> Result<(StackHeader, Vec<GrayImage>), String> {
    let h = decode_header(bytes)?;
    let plane = h.width as usize * h.height as usize;
    let body = &bytes[HEADER_LEN..];
    if body.len() != plane * h.channels as usize {
        return Err(format!(
            "expected {} bytes of channel data, found {}",
            plane * h.channels as usize,
            body.len()
        ));
    }
    let channels = body
        .chunks(plane.max(1))
        .take(h.channels as usize)
        .map(|c| GrayImage::new(h.width as usize, h.height as usize, c.to_vec()).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    Ok((h, channels))
}
