//! Netpbm gray (PGM) and color (PPM) decoding, PGM encoding.
//!
//! Color images are reduced to luma `0.299 R + 0.587 G + 0.114 B`. Samples are
//! rescaled to `[0, 255]` when maxval is below 255.

use super::{GrayImage, ImageError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PnmEncoding {
    /// ASCII samples (P2).
    Plain,
    /// One byte per sample (P5).
    Binary,
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

    fn next_uint(&mut self) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return match self.bytes.get(self.pos) {
                None => Err(ImageError::TruncatedData),
                Some(&b) => Err(ImageError::BadHeader(format!(
                    "unexpected byte {:?} at offset {}",
                    b as char, self.pos
                ))),
            };
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| ImageError::BadHeader("integer out of range".into()))
    }
}

pub fn decode_pnm(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(ImageError::BadMagic);
    }
    let (channels, binary) = match bytes[1] {
        b'2' => (1, false),
        b'5' => (1, true),
        b'3' => (3, false),
        b'6' => (3, true),
        _ => return Err(ImageError::BadMagic),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.next_uint()? as usize;
    let height = cur.next_uint()? as usize;
    let maxval = cur.next_uint()?;
    if maxval == 0 || maxval > 255 {
        return Err(ImageError::MaxvalUnsupported(maxval));
    }
    if width == 0 || height == 0 {
        return Err(ImageError::BadDimensions { width, height });
    }

    let count = width * height * channels;
    let samples: Vec<u32> = if binary {
        // exactly one whitespace byte separates the header from the raster
        match bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            Some(_) => return Err(ImageError::BadHeader("missing raster separator".into())),
            None => return Err(ImageError::TruncatedData),
        }
        let raster = bytes
            .get(cur.pos..cur.pos + count)
            .ok_or(ImageError::TruncatedData)?;
        raster.iter().map(|&b| b as u32).collect()
    } else {
        (0..count).map(|_| cur.next_uint()).collect::<Result<_>>()?
    };
    if let Some(&s) = samples.iter().find(|&&s| s > maxval) {
        return Err(ImageError::BadHeader(format!("sample {s} exceeds maxval {maxval}")));
    }

    let scale = 255.0 / maxval as f64;
    let pixels = if channels == 1 {
        samples
            .iter()
            .map(|&s| if maxval == 255 { s as f64 } else { s as f64 * scale })
            .collect()
    } else {
        samples
            .chunks_exact(3)
            .map(|rgb| {
                // integer weights keep white at exactly maxval
                let luma = (299 * rgb[0] + 587 * rgb[1] + 114 * rgb[2]) as f64 / 1000.0;
                if maxval == 255 {
                    luma
                } else {
                    luma * scale
                }
            })
            .collect()
    };
    GrayImage::new(width, height, pixels)
}

/// Writes an 8-bit PGM with samples rounded to the nearest integer.
pub fn encode_pgm(img: &GrayImage, encoding: PnmEncoding) -> Vec<u8> {
    let samples = img.pixels().iter().map(|&p| p.round().clamp(0.0, 255.0) as u8);
    match encoding {
        PnmEncoding::Plain => {
            let mut out = format!("P2\n{} {}\n255\n", img.width(), img.height());
            let rows: Vec<u8> = samples.collect();
            for row in rows.chunks(img.width()) {
                let line: Vec<String> = row.iter().map(u8::to_string).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            out.into_bytes()
        }
        PnmEncoding::Binary => {
            let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
            out.extend(samples);
            out
        }
    }
}
