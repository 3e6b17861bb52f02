//! Chaotic iterations: at each step a single cell, picked by the strategy,
//! takes the corresponding component of a global boolean map.

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::strategy::Strategy;

/// A map `B^N -> B^N`.
pub trait BooleanMap {
    fn arity(&self) -> usize;

    fn apply(&self, x: &BitVector) -> BitVector;

    /// Component `cell` of `apply(x)`. Override when it is cheaper than the
    /// full image.
    fn component(&self, x: &BitVector, cell: usize) -> bool {
        self.apply(x)[cell]
    }
}

/// The vectorial negation, flipping every bit.
#[derive(Debug, Clone, Copy)]
pub struct Negation {
    arity: usize,
}

impl Negation {
    pub fn new(arity: usize) -> Self {
        Self { arity }
    }
}

impl BooleanMap for Negation {
    fn arity(&self) -> usize {
        self.arity
    }

    fn apply(&self, x: &BitVector) -> BitVector {
        vectorial_negation(x)
    }

    fn component(&self, x: &BitVector, cell: usize) -> bool {
        !x[cell]
    }
}

/// Wraps an arbitrary rule as a [`BooleanMap`].
pub struct FnMap<F> {
    arity: usize,
    rule: F,
}

impl<F: Fn(&BitVector) -> BitVector> FnMap<F> {
    pub fn new(arity: usize, rule: F) -> Self {
        Self { arity, rule }
    }
}

impl<F: Fn(&BitVector) -> BitVector> BooleanMap for FnMap<F> {
    fn arity(&self) -> usize {
        self.arity
    }

    fn apply(&self, x: &BitVector) -> BitVector {
        (self.rule)(x)
    }
}

/// Discrete metric on a single bit.
pub fn delta(a: bool, b: bool) -> u8 {
    u8::from(a != b)
}

pub fn vectorial_negation(v: &BitVector) -> BitVector {
    BitVector::new(v.iter().map(|b| !b).collect()).expect("length preserved")
}

/// One chaotic-iteration step: only `cell` is updated, to `f(state)[cell]`.
pub fn ci_step<F: BooleanMap + ?Sized>(state: &BitVector, f: &F, cell: usize) -> Result<BitVector> {
    if cell >= state.len() {
        return Err(Error::IndexOutOfRange {
            index: cell,
            length: state.len(),
        });
    }
    if f.arity() != state.len() {
        return Err(Error::LengthMismatch {
            expected: f.arity(),
            found: state.len(),
        });
    }
    let mut next = state.clone();
    next.set(cell, f.component(state, cell));
    Ok(next)
}

/// Folds [`ci_step`] over `steps` steps; step `n` (1-based) uses term `n - 1`.
pub fn ci_iterate<F: BooleanMap + ?Sized>(
    x0: &BitVector,
    f: &F,
    strategy: &Strategy,
    steps: usize,
) -> Result<BitVector> {
    if strategy.alphabet() != x0.len() {
        return Err(Error::AlphabetMismatch {
            left: strategy.alphabet(),
            right: x0.len(),
        });
    }
    strategy.require(steps)?;
    (0..steps).try_fold(x0.clone(), |x, n| ci_step(&x, f, strategy.at(n)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(bits: &[u8]) -> BitVector {
        BitVector::from_bits(bits).unwrap()
    }

    #[test]
    fn delta_cases() {
        assert_eq!(delta(false, false), 0);
        assert_eq!(delta(true, false), 1);
        assert_eq!(delta(true, true), 0);
    }

    #[test]
    fn negation_examples() {
        assert_eq!(vectorial_negation(&bv(&[0, 1, 0, 1])), bv(&[1, 0, 1, 0]));
        assert_eq!(vectorial_negation(&bv(&[0])), bv(&[1]));
    }

    #[test]
    fn negation_is_an_exhaustive_bijection() {
        for n in 1..=8 {
            let mut seen = vec![false; 1 << n];
            for w in 0..(1u64 << n) {
                let v = BitVector::from_word(n, w).unwrap();
                let image = vectorial_negation(&v);
                assert_eq!(vectorial_negation(&image), v);
                let slot = &mut seen[image.to_word() as usize];
                assert!(!*slot);
                *slot = true;
            }
        }
    }

    #[test]
    fn single_step_examples() {
        let f4 = Negation::new(4);
        assert_eq!(ci_step(&bv(&[0, 0, 0, 0]), &f4, 2).unwrap(), bv(&[0, 0, 1, 0]));
        assert_eq!(ci_step(&bv(&[1, 1]), &Negation::new(2), 0).unwrap(), bv(&[0, 1]));
        let twice = ci_step(&ci_step(&bv(&[1, 0, 1, 1]), &f4, 3).unwrap(), &f4, 3).unwrap();
        assert_eq!(twice, bv(&[1, 0, 1, 1]));
        assert_eq!(
            ci_step(&bv(&[0, 0]), &Negation::new(2), 2),
            Err(Error::IndexOutOfRange { index: 2, length: 2 })
        );
    }

    #[test]
    fn step_uses_general_map_component() {
        // f(x) = constant (1, 1, 1): only the chosen cell becomes 1
        let ones = FnMap::new(3, |_: &BitVector| BitVector::from_bits(&[1, 1, 1]).unwrap());
        assert_eq!(ci_step(&bv(&[0, 0, 0]), &ones, 1).unwrap(), bv(&[0, 1, 0]));
    }

    #[test]
    fn iterate_examples() {
        let f = Negation::new(4);
        let x0 = bv(&[0, 0, 0, 0]);
        let s = Strategy::new(4, vec![2, 2]).unwrap();
        assert_eq!(ci_iterate(&x0, &f, &s, 0).unwrap(), x0);
        assert_eq!(ci_iterate(&x0, &f, &s, 2).unwrap(), x0);
        let s = Strategy::new(4, vec![0, 3]).unwrap();
        assert_eq!(ci_iterate(&x0, &f, &s, 2).unwrap(), bv(&[1, 0, 0, 1]));
        assert!(matches!(
            ci_iterate(&x0, &f, &s, 3),
            Err(Error::InsufficientStrategy {
                required: 3,
                available: 2
            })
        ));
    }

    /// Brute-force trace against the parity characterization of f0 iterations.
    #[test]
    fn iterate_matches_parity_rule_exhaustively() {
        for n in 1..=3usize {
            let f = Negation::new(n);
            for steps in 0..=4u32 {
                let count = n.pow(steps);
                for code in 0..count {
                    let mut terms = Vec::new();
                    let mut c = code;
                    for _ in 0..steps {
                        terms.push(c % n);
                        c /= n;
                    }
                    let s = Strategy::new(n, terms.clone()).unwrap();
                    for w in 0..(1u64 << n) {
                        let x0 = BitVector::from_word(n, w).unwrap();
                        let out = ci_iterate(&x0, &f, &s, steps as usize).unwrap();
                        for i in 0..n {
                            let hits = terms.iter().filter(|&&t| t == i).count();
                            assert_eq!(out[i], x0[i] ^ (hits % 2 == 1));
                        }
                    }
                }
            }
        }
    }
}
