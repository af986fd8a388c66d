//! Grayscale images and the two corpus input formats: binary PGM (P5) and
//! raw planar YUV 4:2:0 (luma plane only).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// A single grayscale plane, 8- or 10-bit samples stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    bit_depth: u8,
    samples: Vec<u16>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, bit_depth: u8, samples: Vec<u16>) -> Result<Self> {
        if bit_depth != 8 && bit_depth != 10 {
            return Err(Error::InvalidBitDepth(bit_depth));
        }
        if samples.len() != width * height {
            return Err(Error::SizeMismatch {
                path: String::from("<memory>"),
                expected: width * height,
                actual: samples.len(),
            });
        }
        let max = (1u16 << bit_depth) - 1;
        if let Some(&bad) = samples.iter().find(|&&s| s > max) {
            return Err(Error::SampleOutOfRange {
                value: bad,
                bit_depth,
            });
        }
        Ok(GrayImage {
            width,
            height,
            bit_depth,
            samples,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    #[inline]
    pub fn samples(&self) -> &[u16] {
        &self.samples
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.samples[y * self.width + x]
    }
}

fn parse_err(path: &Path, offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        offset,
        message: message.into(),
    }
}

struct Tokenizer<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokenizer<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn next_uint(&mut self, path: &Path, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(parse_err(path, start, format!("expected {what}")));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        text.parse()
            .map_err(|_| parse_err(path, start, format!("{what} out of range")))
    }
}

/// Loads a binary PGM (P5) file. Maxval 255 gives 8-bit samples; maxval 1023
/// gives 10-bit samples stored big-endian, two bytes each, per the PGM spec.
pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(parse_err(path, 0, "missing P5 magic"));
    }
    let mut tok = Tokenizer {
        bytes: &bytes,
        pos: 2,
    };
    let width = tok.next_uint(path, "width")?;
    let height = tok.next_uint(path, "height")?;
    let maxval_off = {
        tok.skip_space_and_comments();
        tok.pos
    };
    let maxval = tok.next_uint(path, "maxval")?;
    let bit_depth = match maxval {
        255 => 8,
        1023 => 10,
        _ => {
            return Err(parse_err(
                path,
                maxval_off,
                format!("unsupported maxval {maxval} (expected 255 or 1023)"),
            ))
        }
    };
    // Exactly one whitespace byte separates the header from the payload.
    if tok.pos >= bytes.len() || !bytes[tok.pos].is_ascii_whitespace() {
        return Err(parse_err(path, tok.pos, "expected whitespace before payload"));
    }
    let data_start = tok.pos + 1;

    let count = width * height;
    let bytes_per_sample = if bit_depth > 8 { 2 } else { 1 };
    let expected_end = data_start + count * bytes_per_sample;
    if bytes.len() < expected_end {
        return Err(parse_err(
            path,
            bytes.len(),
            format!(
                "truncated payload: expected {} bytes at offset {}, file ends early",
                count * bytes_per_sample,
                data_start
            ),
        ));
    }
    let data = &bytes[data_start..expected_end];
    let samples: Vec<u16> = if bytes_per_sample == 2 {
        data.chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    } else {
        data.iter().map(|&b| b as u16).collect()
    };
    let max = (1u16 << bit_depth) - 1;
    if let Some(i) = samples.iter().position(|&s| s > max) {
        return Err(parse_err(
            path,
            data_start + i * bytes_per_sample,
            format!("sample exceeds maxval {maxval}"),
        ));
    }
    GrayImage::new(width, height, bit_depth, samples)
}

/// Writes a binary PGM (P5) file.
pub fn save_pgm(image: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, pgm_bytes(image))?;
    Ok(())
}

/// Serializes an image as binary PGM bytes.
pub fn pgm_bytes(image: &GrayImage) -> Vec<u8> {
    let maxval: u32 = (1u32 << image.bit_depth()) - 1;
    let mut out = format!("P5\n{} {}\n{}\n", image.width(), image.height(), maxval).into_bytes();
    if image.bit_depth() > 8 {
        for &s in image.samples() {
            out.extend_from_slice(&s.to_be_bytes());
        }
    } else {
        out.extend(image.samples().iter().map(|&s| s as u8));
    }
    out
}

/// Reads the luma plane of one frame from raw planar YUV 4:2:0. 10-bit files
/// use two bytes per sample, little-endian.
pub fn load_yuv(
    path: impl AsRef<Path>,
    width: usize,
    height: usize,
    bit_depth: u8,
    frame_index: usize,
) -> Result<GrayImage> {
    let path = path.as_ref();
    if bit_depth != 8 && bit_depth != 10 {
        return Err(Error::InvalidBitDepth(bit_depth));
    }
    let bytes_per_sample = if bit_depth > 8 { 2 } else { 1 };
    // Luma plus two quarter-size chroma planes.
    let frame_size = width * height * 3 / 2 * bytes_per_sample;
    let bytes = fs::read(path)?;
    let expected = (frame_index + 1) * frame_size;
    if bytes.len() < expected {
        return Err(Error::SizeMismatch {
            path: path.display().to_string(),
            expected,
            actual: bytes.len(),
        });
    }
    let luma_start = frame_index * frame_size;
    let luma_len = width * height * bytes_per_sample;
    let data = &bytes[luma_start..luma_start + luma_len];
    let samples: Vec<u16> = if bytes_per_sample == 2 {
        data.chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]))
            .collect()
    } else {
        data.iter().map(|&b| b as u16).collect()
    };
    GrayImage::new(width, height, bit_depth, samples)
}
