//! Fixed-length boolean vectors.

use std::fmt;
use std::ops::Index;

use crate::error::{Error, Result};

/// A non-empty vector of bits whose length never changes after construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    bits: Vec<bool>,
}

impl BitVector {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::EmptyVector);
        }
        Ok(Self { bits })
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(vec![false; len])
    }

    /// Builds a vector from 0/1 values; any nonzero entry counts as 1.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        Self::new(bits.iter().map(|&b| b != 0).collect())
    }

    /// Bit `i` of the vector is bit `i` of `value` (least significant first).
    pub fn from_word(len: usize, value: u64) -> Result<Self> {
        if len > 64 {
            return Err(Error::InvalidParameter(format!(
                "word encoding holds at most 64 bits, got {len}"
            )));
        }
        Self::new((0..len).map(|i| (value >> i) & 1 == 1).collect())
    }

    /// Inverse of [`BitVector::from_word`]. Panics above 64 bits.
    pub fn to_word(&self) -> u64 {
        assert!(self.len() <= 64, "word encoding holds at most 64 bits");
        self.bits
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | (u64::from(b) << i))
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn get(&self, index: usize) -> Result<bool> {
        self.bits.get(index).copied().ok_or(Error::IndexOutOfRange {
            index,
            length: self.len(),
        })
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    pub fn with_bit(&self, index: usize, value: bool) -> Result<Self> {
        self.get(index)?;
        let mut bits = self.bits.clone();
        bits[index] = value;
        Ok(Self { bits })
    }

    pub fn with_flipped(&self, index: usize) -> Result<Self> {
        let current = self.get(index)?;
        self.with_bit(index, !current)
    }

    pub(crate) fn set(&mut self, index: usize, value: bool) {
        self.bits[index] = value;
    }

    pub(crate) fn flip(&mut self, index: usize) {
        self.bits[index] = !self.bits[index];
    }

    /// Number of positions where the two vectors differ.
    pub fn hamming(&self, other: &Self) -> Result<usize> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count())
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn into_vec(self) -> Vec<bool> {
        self.bits
    }
}

impl Index<usize> for BitVector {
    type Output = bool;

    fn index(&self, index: usize) -> &bool {
        &self.bits[index]
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Packs bytes into bits, most significant bit of each byte first.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|&byte| (0..8).map(move |k| (byte >> (7 - k)) & 1 == 1))
        .collect()
}

/// Inverse of [`bytes_to_bits`]; a trailing partial byte is padded with zeros.
pub fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (k, &b)| acc | (u8::from(b) << (7 - k)))
        })
        .collect()
}
