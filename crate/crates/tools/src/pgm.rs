//! Netpbm graymap (PGM) reading and writing.
//!
//! Reads binary `P5` and plain `P2` files with a maxval up to 255; samples
//! below a maxval of 255 are rescaled to the full 8-bit range. Always writes
//! `P5` with maxval 255.

use ptosis_core::GrayImage;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PgmError {
    #[error("not a PGM file (magic {0:?})")]
    BadMagic(String),
    #[error("malformed header: {0}")]
    Header(String),
    #[error("maxval {0} unsupported (1..=255 only)")]
    Maxval(u32),
    #[error("pixel data truncated: expected {expected} samples, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("sample {value} exceeds maxval {maxval}")]
    Sample { value: u32, maxval: u32 },
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32, PgmError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PgmError::Header(format!("expected {what}")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<GrayImage, PgmError> {
    let magic = bytes.get(..2).unwrap_or(bytes);
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        other => return Err(PgmError::BadMagic(String::from_utf8_lossy(other).into_owned())),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PgmError::Header(format!("empty image {width}x{height}")));
    }
    if !(1..=255).contains(&maxval) {
        return Err(PgmError::Maxval(maxval));
    }
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| PgmError::Header("image too large".into()))?;
    let raw: Vec<u32> = if binary {
        // exactly one whitespace byte separates the header from the raster
        match bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => return Err(PgmError::Header("missing separator before raster".into())),
        }
        let data = &bytes[cur.pos..];
        if data.len() < expected {
            return Err(PgmError::Truncated {
                expected,
                found: data.len(),
            });
        }
        data[..expected].iter().map(|&b| b as u32).collect()
    } else {
        let mut out = Vec::with_capacity(expected);
        for found in 0..expected {
            cur.skip_space_and_comments();
            if cur.pos >= bytes.len() {
                return Err(PgmError::Truncated { expected, found });
            }
            out.push(cur.number("sample")?);
        }
        out
    };
    let mut data = Vec::with_capacity(expected);
    for value in raw {
        if value > maxval {
            return Err(PgmError::Sample { value, maxval });
        }
        data.push(if maxval == 255 {
            value as u8
        } else {
            ((value * 255 + maxval / 2) / maxval) as u8
        });
    }
    GrayImage::new(width, height, data).map_err(|e| PgmError::Header(e.to_string()))
}

pub fn encode(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let img = GrayImage::from_fn(5, 3, |c, r| (c * 40 + r * 7) as u8);
        assert_eq!(decode(&encode(&img)).unwrap(), img);
    }

    #[test]
    fn plain_with_comments_and_small_maxval() {
        let text = b"P2\n# a comment\n3 1 # trailing\n15\n0 15 7\n";
        let img = decode(text).unwrap();
        assert_eq!(img.data(), &[0, 255, 119]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(decode(b"P6\n1 1\n255\n\0\0\0"), Err(PgmError::BadMagic(_))));
        assert!(matches!(decode(b"P5\n2 2\n255\n\0\0"), Err(PgmError::Truncated { .. })));
        assert!(matches!(decode(b"P5\n2 2\n65535\n"), Err(PgmError::Maxval(65535))));
        assert!(matches!(decode(b"P2\n1 1\n10\n11\n"), Err(PgmError::Sample { .. })));
        assert!(matches!(decode(b"P5\n0 2\n255\n"), Err(PgmError::Header(_))));
        assert!(decode(b"").is_err());
    }

    #[test]
    fn raster_may_start_with_whitespace_bytes() {
        let mut bytes = b"P5\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(b"\n ");
        assert_eq!(decode(&bytes).unwrap().data(), &[10, 32]);
    }
}
