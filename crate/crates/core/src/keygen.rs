//! Keyed strategy generation from the piecewise linear chaotic map (PLCM).
//!
//! All arithmetic is 64-bit fixed point so that a key reproduces the same
//! strategies bit for bit on every platform; blind extraction depends on it.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::strategy::Strategy;

const HALF: u64 = 1 << 63;

/// Seed constants for the three blind-mode streams (place, choice, mixing):
/// the fractional parts of sqrt(2), sqrt(3) and sqrt(5).
pub const BLIND_PLACE_CONSTANT: UnitFraction = UnitFraction(0x6a09_e667_f3bc_c908);
pub const BLIND_CHOICE_CONSTANT: UnitFraction = UnitFraction(0xbb67_ae85_84ca_a73b);
pub const BLIND_MIXING_CONSTANT: UnitFraction = UnitFraction(0x3c6e_f372_fe94_f82b);

/// A value `numerator / 2^64` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnitFraction(pub u64);

impl UnitFraction {
    pub const ZERO: Self = Self(0);

    pub fn numerator(self) -> u64 {
        self.0
    }

    /// Nearest representable value at or below `x`. Fails outside `[0, 1)`.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::InvalidParameter(format!("{x} is not in [0, 1)")));
        }
        Ok(Self((x * 18_446_744_073_709_551_616.0) as u64))
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 18_446_744_073_709_551_616.0
    }

    /// First 64 bits of `bits` read as a binary fraction, zero padded.
    pub fn from_bits_msb_first(bits: &[bool]) -> Self {
        Self(
            bits.iter()
                .take(64)
                .enumerate()
                .fold(0, |acc, (k, &b)| acc | (u64::from(b) << (63 - k))),
        )
    }
}

impl fmt::Display for UnitFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

fn parse_hex_word(s: &str) -> Result<u64> {
    if s.len() != 16 || !s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)) {
        return Err(Error::InvalidKey(format!(
            "expected 16 lowercase hex digits, got {s:?}"
        )));
    }
    u64::from_str_radix(s, 16).map_err(|e| Error::InvalidKey(e.to_string()))
}

impl FromStr for UnitFraction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_hex_word(s).map(Self)
    }
}

/// PLCM control parameter, strictly inside `(0, 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PlcmParameter(UnitFraction);

impl PlcmParameter {
    pub fn new(p: UnitFraction) -> Result<Self> {
        if p.0 == 0 || p.0 >= HALF {
            return Err(Error::InvalidParameter(format!(
                "PLCM parameter {p} must lie strictly between 0 and 1/2"
            )));
        }
        Ok(Self(p))
    }

    pub fn from_f64(p: f64) -> Result<Self> {
        Self::new(UnitFraction::from_f64(p)?)
    }

    pub fn value(self) -> UnitFraction {
        self.0
    }
}

/// Result of one PLCM evaluation. The map can reach exactly 1, which has no
/// fixed-point representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlcmOutput {
    Value(UnitFraction),
    One,
}

impl PlcmOutput {
    /// Stored value; 1 wraps to 0.
    pub fn stored(self) -> UnitFraction {
        match self {
            Self::Value(v) => v,
            Self::One => UnitFraction::ZERO,
        }
    }

    pub fn is_wraparound(self) -> bool {
        self == Self::One
    }
}

/// Piecewise linear chaotic map: `x/p` on `[0, p)`, `(x-p)/(1/2-p)` on
/// `[p, 1/2]`, and `F(1-x)` above 1/2. Divisions truncate toward zero.
pub fn plcm(x: UnitFraction, p: PlcmParameter) -> PlcmOutput {
    let p = p.0 .0;
    let x = if x.0 > HALF { x.0.wrapping_neg() } else { x.0 };
    let q = if x < p {
        (u128::from(x) << 64) / u128::from(p)
    } else {
        (u128::from(x - p) << 64) / u128::from(HALF - p)
    };
    match u64::try_from(q) {
        Ok(v) => PlcmOutput::Value(UnitFraction(v)),
        Err(_) => PlcmOutput::One,
    }
}

/// `K XOR M` on the fixed-point words. A zero result is degenerate.
pub fn key_schedule(key: UnitFraction, mask: UnitFraction) -> Result<UnitFraction> {
    let seed = UnitFraction(key.0 ^ mask.0);
    if seed.0 == 0 {
        return Err(Error::DegenerateSeed("key schedule produced the zero seed".into()));
    }
    Ok(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CiisConfig {
    pub seed: UnitFraction,
    pub p: PlcmParameter,
    pub alphabet: usize,
    pub length: usize,
}

/// Maps an orbit value to a cell index: `min(floor(alphabet * K), alphabet - 1)`.
fn term_of(alphabet: usize, k: UnitFraction) -> usize {
    let t = ((alphabet as u128 * u128::from(k.0)) >> 64) as usize;
    t.min(alphabet - 1)
}

/// Iterates the PLCM from the seed and quantizes each orbit value.
///
/// Fails with `DegenerateSeed` if any of the orbit values used is zero,
/// including a wrapped-around 1.
pub fn ciis_strategy(cfg: &CiisConfig) -> Result<Strategy> {
    if cfg.alphabet == 0 {
        return Err(Error::InvalidParameter("alphabet must be at least 1".into()));
    }
    let mut terms = Vec::with_capacity(cfg.length);
    let mut k = cfg.seed;
    for n in 0..cfg.length {
        if k.0 == 0 {
            return Err(Error::DegenerateSeed(format!("orbit reached zero at step {n}")));
        }
        terms.push(term_of(cfg.alphabet, k));
        if n + 1 < cfg.length {
            match plcm(k, cfg.p) {
                PlcmOutput::Value(v) => k = v,
                PlcmOutput::One => return Err(Error::DegenerateSeed(format!("orbit reached 1 at step {}", n + 1))),
            }
        }
    }
    if cfg.length == 0 && k.0 == 0 {
        return Err(Error::DegenerateSeed("zero seed".into()));
    }
    Strategy::new(cfg.alphabet, terms)
}

/// An embedding key: orbit seed and PLCM parameter. Serialized as
/// `kkkkkkkkkkkkkkkk:pppppppppppppppp` (lowercase hex numerators).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Key {
    pub seed: UnitFraction,
    pub p: PlcmParameter,
}

impl FromStr for Key {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (k, p) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidKey("expected KEY:P".into()))?;
        let seed = k.parse()?;
        let p = PlcmParameter::new(p.parse()?).map_err(|e| Error::InvalidKey(e.to_string()))?;
        Ok(Self { seed, p })
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.seed, self.p.0)
    }
}

/// How the three stream seeds are derived from the key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedMode {
    /// `K XOR c_i` for the three published constants; extraction needs only the key.
    Blind,
    /// Place stream seeded with `K XOR M`, `M` being the first 64 message bits;
    /// the choice and mixing streams XOR that seed with the choice and mixing
    /// constants. Extraction needs `M`.
    PaperFaithful { message: UnitFraction },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyTriple {
    pub place: Strategy,
    pub choice: Strategy,
    pub mixing: Strategy,
}

/// The three stream seeds for `mode`.
pub fn stream_seeds(key: UnitFraction, mode: SeedMode) -> Result<[UnitFraction; 3]> {
    if key.0 == 0 {
        return Err(Error::DegenerateSeed("key is zero".into()));
    }
    match mode {
        SeedMode::Blind => Ok([
            key_schedule(key, BLIND_PLACE_CONSTANT)?,
            key_schedule(key, BLIND_CHOICE_CONSTANT)?,
            key_schedule(key, BLIND_MIXING_CONSTANT)?,
        ]),
        SeedMode::PaperFaithful { message } => {
            let base = key_schedule(key, message)?;
            Ok([
                base,
                key_schedule(base, BLIND_CHOICE_CONSTANT)?,
                key_schedule(base, BLIND_MIXING_CONSTANT)?,
            ])
        }
    }
}

/// Place strategy over `cells`, choice and mixing strategies over
/// `message_bits`, each `steps` terms long and sharing the key's parameter.
pub fn derive_strategy_triple(
    key: &Key,
    cells: usize,
    message_bits: usize,
    steps: usize,
    mode: SeedMode,
) -> Result<StrategyTriple> {
    if cells == 0 || message_bits == 0 {
        return Err(Error::InvalidParameter("N and P must be at least 1".into()));
    }
    let [place, choice, mixing] = stream_seeds(key.seed, mode)?;
    let stream = |seed, alphabet| {
        ciis_strategy(&CiisConfig {
            seed,
            p: key.p,
            alphabet,
            length: steps,
        })
    };
    Ok(StrategyTriple {
        place: stream(place, cells)?,
        choice: stream(choice, message_bits)?,
        mixing: stream(mixing, message_bits)?,
    })
}
