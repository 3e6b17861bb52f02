//! Netpbm graymap codec: P5 (binary) and P3 (ASCII) input, P5 output.
//!
//! The writer is canonical: `P5 <w> <h> 255\n` followed by the raw pixels.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl PgmImage {
    pub const MAXVAL: u32 = 255;

    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::MalformedHeader("dimensions must be positive".into()));
        }
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| Error::MalformedHeader("dimensions overflow".into()))?;
        if pixels.len() != expected {
            return Err(Error::TruncatedPixelData {
                expected,
                found: pixels.len(),
            });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn bit_length(&self) -> usize {
        self.pixels.len() * 8
    }

    pub(crate) fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }
}

struct Header<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
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

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self
            .data
            .get(self.pos)
            .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
        {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.data[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        let tok = self
            .token()
            .ok_or_else(|| Error::MalformedHeader(format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .filter(|s| s.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedHeader(format!("invalid {what}: {:?}", String::from_utf8_lossy(tok))))
    }
}

/// Parses a P5 or P3 graymap with maxval 255.
pub fn pgm_read(bytes: &[u8]) -> Result<PgmImage> {
    let mut header = Header { data: bytes, pos: 0 };
    let binary = match header.token() {
        Some(b"P5") => true,
        Some(b"P3") => false,
        Some(other) => {
            return Err(Error::MalformedHeader(format!(
                "unsupported magic {:?}",
                String::from_utf8_lossy(other)
            )))
        }
        None => return Err(Error::MalformedHeader("empty input".into())),
    };
    let width = header.number("width")? as usize;
    let height = header.number("height")? as usize;
    let maxval = header.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader("dimensions must be positive".into()));
    }
    if maxval != PgmImage::MAXVAL {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| Error::MalformedHeader("dimensions overflow".into()))?;

    let pixels = if binary {
        // exactly one whitespace byte separates the header from the raster
        match bytes.get(header.pos) {
            Some(b) if b.is_ascii_whitespace() => {}
            _ => return Err(Error::MalformedHeader("missing whitespace after maxval".into())),
        }
        let raster = &bytes[header.pos + 1..];
        if raster.len() < expected {
            return Err(Error::TruncatedPixelData {
                expected,
                found: raster.len(),
            });
        }
        raster[..expected].to_vec()
    } else {
        let mut pixels = Vec::with_capacity(expected);
        while pixels.len() < expected {
            let Some(tok) = header.token() else { break };
            let value = std::str::from_utf8(tok)
                .ok()
                .filter(|s| s.bytes().all(|b| b.is_ascii_digit()))
                .and_then(|s| s.parse::<u32>().ok())
                .ok_or_else(|| Error::InvalidPixelData(format!("bad sample {:?}", String::from_utf8_lossy(tok))))?;
            if value > maxval {
                return Err(Error::InvalidPixelData(format!("sample {value} exceeds maxval")));
            }
            pixels.push(value as u8);
        }
        if pixels.len() < expected {
            return Err(Error::TruncatedPixelData {
                expected,
                found: pixels.len(),
            });
        }
        pixels
    };
    PgmImage::new(width, height, pixels)
}

/// Canonical P5 encoding.
pub fn pgm_write(img: &PgmImage) -> Vec<u8> {
    let mut out = format!("P5 {} {} {}\n", img.width, img.height, PgmImage::MAXVAL).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}
