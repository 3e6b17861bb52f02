//! Steganography by chaotic iterations with a mixed message.
//!
//! A message is written into the least significant coefficients of a cover
//! by a keyed chaotic iteration: at each step one cover cell receives one
//! message bit, and one message bit is negated. Extraction is blind, needing
//! only the key and a small sidecar. The [`topology`] module models the
//! scheme as a dynamical system and constructs the witnesses of its chaotic
//! behavior; [`harness`] checks the uniformity of stego vectors.

pub mod bits;
pub mod cli;
pub mod error;
pub mod harness;
pub mod iteration;
pub mod keygen;
pub mod media;
pub mod scheme;
pub mod strategy;
pub mod topology;

pub use bits::BitVector;
pub use error::{Error, Result};
pub use keygen::{Key, PlcmParameter, SeedMode, UnitFraction};
pub use scheme::{embed, extract, ScismmInput};
pub use strategy::Strategy;
