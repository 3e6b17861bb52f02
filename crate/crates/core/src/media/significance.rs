//! Significance weights and the MSC / LSC / passive split of a medium's bits.

use crate::error::{Error, Result};

/// Importance weight of bit position `k` of a medium.
pub trait SignificanceFunction {
    fn weight(&self, k: usize) -> f64;
}

impl<F: Fn(usize) -> f64> SignificanceFunction for F {
    fn weight(&self, k: usize) -> f64 {
        self(k)
    }
}

/// Weight of bit `k` of an 8-bit grayscale raster: `8 - (k mod 8)`, so the
/// most significant bit of each pixel weighs 8 and the least significant 1.
pub fn significance_pgm(k: usize) -> u8 {
    8 - (k % 8) as u8
}

/// [`significance_pgm`] as a [`SignificanceFunction`].
#[derive(Debug, Clone, Copy, Default)]
pub struct PgmSignificance;

impl SignificanceFunction for PgmSignificance {
    fn weight(&self, k: usize) -> f64 {
        f64::from(significance_pgm(k))
    }
}

/// Default LSC threshold: one bit per pixel.
pub const DEFAULT_LSC_THRESHOLD: u8 = 1;
/// Default MSC threshold.
pub const DEFAULT_MSC_THRESHOLD: u8 = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub msc: Vec<usize>,
    pub lsc: Vec<usize>,
    pub passive: Vec<usize>,
    pub source_length: usize,
}

/// Splits positions `0..bit_length` into most significant (`u >= high`),
/// least significant (`u <= low`) and passive coefficients.
pub fn decompose<U: SignificanceFunction + ?Sized>(
    bit_length: usize,
    u: &U,
    low: f64,
    high: f64,
) -> Result<Decomposition> {
    if low.is_nan() || high.is_nan() || low >= high {
        return Err(Error::InvalidThresholds { low, high });
    }
    let mut out = Decomposition {
        msc: Vec::new(),
        lsc: Vec::new(),
        passive: Vec::new(),
        source_length: bit_length,
    };
    for k in 0..bit_length {
        let w = u.weight(k);
        if w >= high {
            out.msc.push(k);
        } else if w <= low {
            out.lsc.push(k);
        } else {
            out.passive.push(k);
        }
    }
    Ok(out)
}

/// LSC positions only; no upper threshold is needed.
pub fn lsc_positions<U: SignificanceFunction + ?Sized>(bit_length: usize, u: &U, low: f64) -> Vec<usize> {
    (0..bit_length).filter(|&k| u.weight(k) <= low).collect()
}
