//! Phase spaces of the chaotic iterations and of the embedding scheme, their
//! metrics, and executable versions of the chaos constructions.
//!
//! Strategy distances are truncated to a fixed number of terms; the omitted
//! tail contributes less than `10^-D`.

mod construction;
mod sensitivity;

pub use construction::{construct_periodic_point, construct_transit_point, k0_of_epsilon};
pub use sensitivity::sensitivity_probe;

use rand::Rng;

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::iteration::{ci_step, Negation};
use crate::strategy::Strategy;

/// Number of strategy terms summed by the distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TruncationDepth(usize);

impl TruncationDepth {
    pub fn new(depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidParameter("truncation depth must be at least 1".into()));
        }
        Ok(Self(depth))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl Default for TruncationDepth {
    fn default() -> Self {
        Self(64)
    }
}

/// A point `(S, E)` of the chaotic-iteration phase space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointX1 {
    pub strategy: Strategy,
    pub state: BitVector,
}

impl PointX1 {
    pub fn new(strategy: Strategy, state: BitVector) -> Result<Self> {
        if strategy.alphabet() != state.len() {
            return Err(Error::ShapeMismatch);
        }
        Ok(Self { strategy, state })
    }
}

/// A point `(Sp, x, Sc, m, Sm)` of the scheme's phase space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointX2 {
    pub place: Strategy,
    pub x: BitVector,
    pub choice: Strategy,
    pub m: BitVector,
    pub mixing: Strategy,
}

impl PointX2 {
    pub fn new(place: Strategy, x: BitVector, choice: Strategy, m: BitVector, mixing: Strategy) -> Result<Self> {
        if place.alphabet() != x.len() || choice.alphabet() != m.len() || mixing.alphabet() != m.len() {
            return Err(Error::ShapeMismatch);
        }
        Ok(Self {
            place,
            x,
            choice,
            m,
            mixing,
        })
    }

    pub fn cells(&self) -> usize {
        self.x.len()
    }

    pub fn message_bits(&self) -> usize {
        self.m.len()
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.cells() == other.cells() && self.message_bits() == other.message_bits()
    }

    /// Equal states and all three strategies equal on their first `depth` terms.
    pub fn agrees_to_depth(&self, other: &Self, depth: usize) -> bool {
        self.x == other.x
            && self.m == other.m
            && self.place.agrees_to_depth(&other.place, depth)
            && self.choice.agrees_to_depth(&other.choice, depth)
            && self.mixing.agrees_to_depth(&other.mixing, depth)
    }
}

/// Hamming distance between two states.
pub fn dist_state(a: &BitVector, b: &BitVector) -> Result<usize> {
    a.hamming(b)
}

/// `(9/N) * sum_{k < D} |S^k - T^k| * 10^-(k+1)`, always in `[0, 1)`.
pub fn dist_strategy(s: &Strategy, t: &Strategy, depth: TruncationDepth) -> Result<f64> {
    if s.alphabet() != t.alphabet() {
        return Err(Error::AlphabetMismatch {
            left: s.alphabet(),
            right: t.alphabet(),
        });
    }
    let d = depth.get();
    s.require(d)?;
    t.require(d)?;
    // Horner from the deepest term keeps tiny contributions from vanishing
    let mut acc = 0.0f64;
    for k in (0..d).rev() {
        let (a, b) = (s.at(k)?, t.at(k)?);
        acc = (acc + a.abs_diff(b) as f64) / 10.0;
    }
    Ok(acc * 9.0 / s.alphabet() as f64)
}

pub fn d1(a: &PointX1, b: &PointX1, depth: TruncationDepth) -> Result<f64> {
    if a.state.len() != b.state.len() {
        return Err(Error::ShapeMismatch);
    }
    Ok(dist_state(&a.state, &b.state)? as f64 + dist_strategy(&a.strategy, &b.strategy, depth)?)
}

pub fn d2(a: &PointX2, b: &PointX2, depth: TruncationDepth) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::ShapeMismatch);
    }
    let states = dist_state(&a.x, &b.x)? + dist_state(&a.m, &b.m)?;
    let strategies = dist_strategy(&a.place, &b.place, depth)?
        + dist_strategy(&a.choice, &b.choice, depth)?
        + dist_strategy(&a.mixing, &b.mixing, depth)?;
    Ok(states as f64 + strategies)
}

/// `G_f0(S, E) = (shift(S), F_f0(S^0, E))`.
pub fn g_step(a: &PointX1) -> Result<PointX1> {
    let cell = a.strategy.at(0)?;
    Ok(PointX1 {
        state: ci_step(&a.state, &Negation::new(a.state.len()), cell)?,
        strategy: a.strategy.shift()?,
    })
}

/// One step of the scheme's dynamical system: cell `Sp^0` takes `m[Sc^0]`,
/// then bit `Sm^0` of the message is negated, and every strategy shifts.
pub fn scismm_step(p: &PointX2) -> Result<PointX2> {
    let place = p.place.at(0)?;
    let choice = p.choice.at(0)?;
    let mix = p.mixing.at(0)?;
    let mut x = p.x.clone();
    x.set(place, p.m[choice]);
    let mut m = p.m.clone();
    m.flip(mix);
    Ok(PointX2 {
        place: p.place.shift()?,
        x,
        choice: p.choice.shift()?,
        m,
        mixing: p.mixing.shift()?,
    })
}

pub fn scismm_iterate(p: &PointX2, steps: usize) -> Result<PointX2> {
    (0..steps).try_fold(p.clone(), |q, _| scismm_step(&q))
}

fn random_strategy<R: Rng + ?Sized>(rng: &mut R, alphabet: usize, prefix_len: usize) -> Strategy {
    let prefix = (0..prefix_len).map(|_| rng.random_range(0..alphabet)).collect();
    let cycle_len = rng.random_range(1..=8);
    let cycle = (0..cycle_len).map(|_| rng.random_range(0..alphabet)).collect();
    Strategy::eventually_periodic(alphabet, prefix, cycle).expect("terms drawn inside the alphabet")
}

fn random_bits<R: Rng + ?Sized>(rng: &mut R, len: usize) -> BitVector {
    BitVector::new((0..len).map(|_| rng.random_bool(0.5)).collect()).expect("len >= 1")
}

/// A uniformly drawn point whose strategies are infinite: `prefix_len`
/// uniform terms followed by a uniform cycle of length 1 to 8.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R, cells: usize, bits: usize, prefix_len: usize) -> PointX2 {
    assert!(cells >= 1 && bits >= 1);
    PointX2 {
        place: random_strategy(rng, cells, prefix_len),
        x: random_bits(rng, cells),
        choice: random_strategy(rng, bits, prefix_len),
        m: random_bits(rng, bits),
        mixing: random_strategy(rng, bits, prefix_len),
    }
}
