use std::collections::BTreeSet;

use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("bit vectors must hold at least one bit")]
    EmptyVector,

    #[error("index {index} out of range for length {length}")]
    IndexOutOfRange { index: usize, length: usize },

    #[error("strategy provides {available} terms but {required} are needed")]
    InsufficientStrategy { required: usize, available: usize },

    #[error("strategy term {term} is outside the alphabet of size {alphabet}")]
    TermOutOfAlphabet { term: usize, alphabet: usize },

    #[error("alphabet sizes differ: {left} vs {right}")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("phase-space points have incompatible shapes")]
    ShapeMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate seed: {0}")]
    DegenerateSeed(String),

    #[error("invalid key: {0}")]
    InvalidKey(String),

    #[error("thresholds must satisfy m < M (got m = {low}, M = {high})")]
    InvalidThresholds { low: f64, high: f64 },

    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),

    #[error("truncated pixel data: expected {expected} pixels, found {found}")]
    TruncatedPixelData { expected: usize, found: usize },

    #[error("invalid pixel data: {0}")]
    InvalidPixelData(String),

    #[error("unsupported maxval {0} (only 255 is supported)")]
    UnsupportedMaxval(u32),

    #[error("message bits {missing:?} cannot be recovered")]
    UndecodableMessage { missing: BTreeSet<usize> },

    #[error("construction failed: {0}")]
    ConstructionFailed(String),

    #[error("target has no preimage under the step map: {0}")]
    Unreachable(String),

    #[error("no divergence found within {max_steps} steps")]
    ProbeExhausted { max_steps: usize },

    #[error("enumeration of {required} outcomes exceeds the budget of {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("{samples} samples is below the minimum of {minimum}")]
    InsufficientSamples { samples: usize, minimum: usize },

    #[error("malformed sidecar: {0}")]
    MalformedSidecar(String),
}

pub type Result<T> = std::result::Result<T, Error>;
