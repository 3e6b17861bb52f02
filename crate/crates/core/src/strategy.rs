//! Strategies: sequences of cell indices over a fixed alphabet `0..k`.
//!
//! A strategy is stored as a materialized prefix optionally followed by a
//! cycle repeated forever. Finite strategies (empty cycle) are what the key
//! schedule produces; eventually periodic ones are what the phase-space
//! constructions produce. Shifting is O(1) and shares the underlying storage.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Clone)]
pub struct Strategy {
    alphabet: usize,
    prefix: Arc<[usize]>,
    cycle: Arc<[usize]>,
    offset: usize,
}

fn check_terms(alphabet: usize, terms: &[usize]) -> Result<()> {
    match terms.iter().find(|&&t| t >= alphabet) {
        Some(&term) => Err(Error::TermOutOfAlphabet { term, alphabet }),
        None => Ok(()),
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Strategy {
    /// A finite strategy holding exactly `terms`.
    pub fn new(alphabet: usize, terms: Vec<usize>) -> Result<Self> {
        Self::eventually_periodic(alphabet, terms, Vec::new())
    }

    /// The infinite sequence `cycle, cycle, ...`.
    pub fn cyclic(alphabet: usize, cycle: Vec<usize>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::InvalidParameter("cycle must be non-empty".into()));
        }
        Self::eventually_periodic(alphabet, Vec::new(), cycle)
    }

    /// `prefix` followed by `cycle` repeated forever. An empty cycle gives a
    /// finite strategy.
    pub fn eventually_periodic(alphabet: usize, prefix: Vec<usize>, cycle: Vec<usize>) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::InvalidParameter("alphabet must be at least 1".into()));
        }
        check_terms(alphabet, &prefix)?;
        check_terms(alphabet, &cycle)?;
        Ok(Self {
            alphabet,
            prefix: prefix.into(),
            cycle: cycle.into(),
            offset: 0,
        })
    }

    /// `head` followed by every term of `tail`.
    pub fn concat(head: Vec<usize>, tail: &Strategy) -> Result<Self> {
        let (rest, cycle) = tail.normalized();
        let mut prefix = head;
        prefix.extend(rest);
        Self::eventually_periodic(tail.alphabet, prefix, cycle)
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn is_infinite(&self) -> bool {
        !self.cycle.is_empty()
    }

    /// Number of terms available, `usize::MAX` for infinite strategies.
    pub fn available(&self) -> usize {
        if self.is_infinite() {
            usize::MAX
        } else {
            self.prefix.len().saturating_sub(self.offset)
        }
    }

    pub fn require(&self, steps: usize) -> Result<()> {
        if self.available() < steps {
            return Err(Error::InsufficientStrategy {
                required: steps,
                available: self.available(),
            });
        }
        Ok(())
    }

    pub fn term(&self, k: usize) -> Option<usize> {
        let idx = self.offset.checked_add(k)?;
        if idx < self.prefix.len() {
            Some(self.prefix[idx])
        } else if self.cycle.is_empty() {
            None
        } else {
            Some(self.cycle[(idx - self.prefix.len()) % self.cycle.len()])
        }
    }

    /// Term `k`, or `InsufficientStrategy` past the end.
    pub fn at(&self, k: usize) -> Result<usize> {
        self.term(k).ok_or(Error::InsufficientStrategy {
            required: k + 1,
            available: self.available(),
        })
    }

    /// The first `n` terms.
    pub fn prefix(&self, n: usize) -> Result<Vec<usize>> {
        self.require(n)?;
        Ok((0..n).filter_map(|k| self.term(k)).collect())
    }

    /// Drops the first term.
    pub fn shift(&self) -> Result<Self> {
        self.shifted(1)
    }

    pub fn shifted(&self, n: usize) -> Result<Self> {
        self.require(n)?;
        let mut out = self.clone();
        out.offset += n;
        if out.is_infinite() && out.offset >= out.prefix.len() {
            // keep the offset bounded on long orbits
            let period = out.cycle.len();
            let excess = out.offset - out.prefix.len();
            out.offset = out.prefix.len() + excess % period;
        }
        Ok(out)
    }

    /// A copy with term `k` replaced, materializing cycle terms if needed.
    pub fn with_term(&self, k: usize, value: usize) -> Result<Self> {
        if value >= self.alphabet {
            return Err(Error::TermOutOfAlphabet {
                term: value,
                alphabet: self.alphabet,
            });
        }
        self.require(k + 1)?;
        let (mut rest, cycle) = self.normalized();
        if k >= rest.len() {
            let period = cycle.len();
            let start = rest.len();
            rest.extend((start..=k).map(|i| cycle[(i - start) % period]));
            let rotation = (k + 1 - start) % period;
            let rotated: Vec<usize> = (0..period).map(|i| cycle[(i + rotation) % period]).collect();
            rest[k] = value;
            return Self::eventually_periodic(self.alphabet, rest, rotated);
        }
        rest[k] = value;
        Self::eventually_periodic(self.alphabet, rest, cycle)
    }

    /// Remaining prefix and the cycle rotated to line up after it.
    fn normalized(&self) -> (Vec<usize>, Vec<usize>) {
        if self.offset <= self.prefix.len() {
            (self.prefix[self.offset..].to_vec(), self.cycle.to_vec())
        } else {
            let period = self.cycle.len();
            let rotation = (self.offset - self.prefix.len()) % period;
            let rotated = (0..period).map(|i| self.cycle[(i + rotation) % period]).collect();
            (Vec::new(), rotated)
        }
    }

    /// Exact equality of the represented sequences.
    pub fn same_sequence(&self, other: &Self) -> bool {
        if self.alphabet != other.alphabet || self.is_infinite() != other.is_infinite() {
            return false;
        }
        let horizon = if self.is_infinite() {
            let (a, b) = (self.cycle.len(), other.cycle.len());
            let lcm = a / gcd(a, b) * b;
            let pre_a = self.prefix.len().saturating_sub(self.offset);
            let pre_b = other.prefix.len().saturating_sub(other.offset);
            pre_a.max(pre_b) + lcm
        } else {
            if self.available() != other.available() {
                return false;
            }
            self.available()
        };
        (0..horizon).all(|k| self.term(k) == other.term(k))
    }

    /// Equality of the first `depth` terms; false if either runs out.
    pub fn agrees_to_depth(&self, other: &Self, depth: usize) -> bool {
        self.alphabet == other.alphabet
            && (0..depth).all(|k| match (self.term(k), other.term(k)) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            })
    }
}

impl PartialEq for Strategy {
    fn eq(&self, other: &Self) -> bool {
        self.same_sequence(other)
    }
}

impl Eq for Strategy {}

impl fmt::Debug for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (rest, cycle) = self.normalized();
        f.debug_struct("Strategy")
            .field("alphabet", &self.alphabet)
            .field("prefix", &rest)
            .field("cycle", &cycle)
            .finish()
    }
}
