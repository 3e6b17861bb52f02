//! Media decomposition and the graymap container the scheme writes into.

mod pgm;
mod significance;

pub use pgm::{pgm_read, pgm_write, PgmImage};
pub use significance::{
    decompose, lsc_positions, significance_pgm, Decomposition, PgmSignificance, SignificanceFunction,
    DEFAULT_LSC_THRESHOLD, DEFAULT_MSC_THRESHOLD,
};

use crate::bits::BitVector;
use crate::error::{Error, Result};

fn image_lsc_positions(img: &PgmImage, threshold: u8) -> Vec<usize> {
    lsc_positions(img.bit_length(), &PgmSignificance, f64::from(threshold))
}

fn read_bit(pixels: &[u8], k: usize) -> bool {
    (pixels[k / 8] >> (7 - k % 8)) & 1 == 1
}

/// Number of LSCs of `img` at threshold `m`.
pub fn lsc_count(img: &PgmImage, threshold: u8) -> usize {
    image_lsc_positions(img, threshold).len()
}

/// LSC bits in increasing position order; bit 0 of a pixel is its MSB.
/// Returns `None` when the threshold selects no bits.
pub fn extract_lsc(img: &PgmImage, threshold: u8) -> Option<BitVector> {
    let bits: Vec<bool> = image_lsc_positions(img, threshold)
        .into_iter()
        .map(|k| read_bit(img.pixels(), k))
        .collect();
    BitVector::new(bits).ok()
}

/// Writes `y` into the LSC positions, leaving every other bit untouched.
pub fn replace_lsc(img: &PgmImage, threshold: u8, y: &BitVector) -> Result<PgmImage> {
    let positions = image_lsc_positions(img, threshold);
    if positions.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: positions.len(),
            found: y.len(),
        });
    }
    let mut out = img.clone();
    let pixels = out.pixels_mut();
    for (k, bit) in positions.into_iter().zip(y.iter()) {
        let mask = 1u8 << (7 - k % 8);
        if bit {
            pixels[k / 8] |= mask;
        } else {
            pixels[k / 8] &= !mask;
        }
    }
    Ok(out)
}
