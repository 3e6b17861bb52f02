//! Periodic points near any target and orbits joining two balls.
//!
//! Both constructions keep the first `k0` strategy terms of the starting
//! point, then append a block of steps that first repairs the cover cells and
//! then the message bits. Every result is verified by iterating the map.

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::strategy::Strategy;

use super::{d2, scismm_iterate, PointX2, TruncationDepth};

/// Number of leading strategy terms that must be kept to stay within `eps`:
/// `floor(-log10(eps / 3)) + 1`, at least 1.
pub fn k0_of_epsilon(eps: f64) -> usize {
    assert!(eps > 0.0, "epsilon must be positive");
    let k = (-(eps / 3.0).log10()).floor() + 1.0;
    if k < 1.0 {
        1
    } else {
        k as usize
    }
}

/// Steps appended after the kept prefix, with the state they lead to.
struct Repair {
    place: Vec<usize>,
    choice: Vec<usize>,
    mixing: Vec<usize>,
    x: BitVector,
    m: BitVector,
}

impl Repair {
    fn new(x: BitVector, m: BitVector) -> Self {
        Self {
            place: Vec::new(),
            choice: Vec::new(),
            mixing: Vec::new(),
            x,
            m,
        }
    }

    fn push(&mut self, place: usize, choice: usize, mix: usize) {
        self.x.set(place, self.m[choice]);
        self.m.flip(mix);
        self.place.push(place);
        self.choice.push(choice);
        self.mixing.push(mix);
    }

    fn len(&self) -> usize {
        self.place.len()
    }

    /// Drives every cover cell to `target`; returns the number of steps used.
    fn fix_cells(&mut self, target: &BitVector) -> usize {
        let start = self.len();
        let wrong: Vec<usize> = (0..target.len()).filter(|&i| self.x[i] != target[i]).collect();
        for j in wrong {
            match (0..self.m.len()).find(|&l| self.m[l] == target[j]) {
                Some(l) => self.push(j, l, l),
                None => {
                    // every message bit is the complement of target[j], as is x[j]:
                    // the first write is a no-op, the flip provides the right bit
                    self.push(j, 0, 0);
                    self.push(j, 0, 0);
                }
            }
        }
        self.len() - start
    }

    /// Drives the message to `target` while the cover stays as it is.
    fn fix_message(&mut self, target: &BitVector) -> Result<usize> {
        let start = self.len();
        let wrong: Vec<usize> = (0..target.len()).filter(|&r| self.m[r] != target[r]).collect();
        for r in wrong {
            match (0..self.x.len()).find(|&mu| self.x[mu] == self.m[r]) {
                Some(mu) => self.push(mu, r, r),
                None if self.m.len() >= 2 => {
                    // damage cell 0, repair it with the flipped bit, then undo
                    // the auxiliary flip, which must not touch bit r
                    let aux = if r == 0 { 1 } else { 0 };
                    self.push(0, r, r);
                    self.push(0, r, aux);
                    self.push(0, r, aux);
                }
                None => {
                    return Err(Error::Unreachable(format!(
                        "single message bit and every cover cell equal to it ({})",
                        target
                    )))
                }
            }
        }
        Ok(self.len() - start)
    }
}

fn kept_prefixes(p: &PointX2, k0: usize) -> Result<[Vec<usize>; 3]> {
    Ok([p.place.prefix(k0)?, p.choice.prefix(k0)?, p.mixing.prefix(k0)?])
}

fn joined(mut head: Vec<usize>, tail: &[usize]) -> Vec<usize> {
    head.extend_from_slice(tail);
    head
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_nan() || eps <= 0.0 || eps.is_infinite() {
        return Err(Error::InvalidParameter(format!(
            "radius must be positive and finite, got {eps}"
        )));
    }
    Ok(())
}

/// Builds a periodic point within `eps` of `target` and returns it with its
/// period. The returned point has the target's states and first `k0(eps)`
/// strategy terms.
pub fn construct_periodic_point(target: &PointX2, eps: f64, depth: TruncationDepth) -> Result<(PointX2, usize)> {
    check_eps(eps)?;
    let k0 = k0_of_epsilon(eps);
    let [place0, choice0, mixing0] = kept_prefixes(target, k0)?;
    let after_prefix = scismm_iterate(target, k0)?;

    let mut repair = Repair::new(after_prefix.x, after_prefix.m);
    let gamma = repair.fix_cells(&target.x);
    let alpha = repair.fix_message(&target.m)?;
    let period = k0 + gamma + alpha;

    let point = PointX2::new(
        Strategy::cyclic(target.cells(), joined(place0, &repair.place))?,
        target.x.clone(),
        Strategy::cyclic(target.message_bits(), joined(choice0, &repair.choice))?,
        target.m.clone(),
        Strategy::cyclic(target.message_bits(), joined(mixing0, &repair.mixing))?,
    )?;

    let distance = d2(&point, target, depth)?;
    if distance >= eps {
        return Err(Error::ConstructionFailed(format!("d2 = {distance} is not below {eps}")));
    }
    if !point.agrees_to_depth(target, k0) {
        return Err(Error::ConstructionFailed("kept prefix differs from the target".into()));
    }
    if scismm_iterate(&point, period)? != point {
        return Err(Error::ConstructionFailed(format!(
            "point does not return after {period} steps"
        )));
    }
    Ok((point, period))
}

/// Builds a point in the open ball `B(a, radius)` whose `n0`-th iterate is
/// exactly `b`, returning it with `n0`.
pub fn construct_transit_point(
    a: &PointX2,
    radius: f64,
    b: &PointX2,
    depth: TruncationDepth,
) -> Result<(PointX2, usize)> {
    check_eps(radius)?;
    if a.cells() != b.cells() || a.message_bits() != b.message_bits() {
        return Err(Error::ShapeMismatch);
    }
    let k0 = k0_of_epsilon(radius);

    // the orbit of the center may already pass through b
    let mut orbit = a.clone();
    for k in 0..=k0 {
        if orbit == *b {
            return Ok((a.clone(), k));
        }
        orbit = super::scismm_step(&orbit)?;
    }

    let [place0, choice0, mixing0] = kept_prefixes(a, k0)?;
    let after_prefix = scismm_iterate(a, k0)?;
    let mut repair = Repair::new(after_prefix.x, after_prefix.m);
    let gamma = repair.fix_cells(&b.x);
    let alpha = repair.fix_message(&b.m)?;
    let n0 = k0 + gamma + alpha;

    let point = PointX2::new(
        Strategy::concat(joined(place0, &repair.place), &b.place)?,
        a.x.clone(),
        Strategy::concat(joined(choice0, &repair.choice), &b.choice)?,
        a.m.clone(),
        Strategy::concat(joined(mixing0, &repair.mixing), &b.mixing)?,
    )?;

    let distance = d2(&point, a, depth)?;
    if distance >= radius {
        return Err(Error::ConstructionFailed(format!(
            "d2 = {distance} is not below {radius}"
        )));
    }
    let landed = scismm_iterate(&point, n0)?;
    if landed != *b || !landed.agrees_to_depth(b, depth.get()) {
        return Err(Error::ConstructionFailed(format!(
            "iterate {n0} does not reach the target center"
        )));
    }
    Ok((point, n0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{random_point, scismm_step};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bv(bits: &[u8]) -> BitVector {
        BitVector::from_bits(bits).unwrap()
    }

    #[test]
    fn k0_examples() {
        assert_eq!(k0_of_epsilon(0.3), 2);
        assert_eq!(k0_of_epsilon(3.0), 1);
        assert_eq!(k0_of_epsilon(30.0), 1);
        assert_eq!(k0_of_epsilon(0.03), 3);
        assert_eq!(k0_of_epsilon(0.1), 2);
    }

    #[test]
    fn periodic_target_is_reconstructed() {
        let target = PointX2::new(
            Strategy::cyclic(2, vec![0, 0]).unwrap(),
            bv(&[1, 0]),
            Strategy::cyclic(2, vec![0, 0]).unwrap(),
            bv(&[1, 1]),
            Strategy::cyclic(2, vec![1, 1]).unwrap(),
        )
        .unwrap();
        assert_eq!(scismm_iterate(&target, 2).unwrap(), target);
        let (point, period) = construct_periodic_point(&target, 0.3, TruncationDepth::default()).unwrap();
        assert_eq!(period, 2);
        assert_eq!(point, target);
    }

    #[test]
    fn random_targets_with_several_message_bits() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.random_range(1..=4);
            let p = rng.random_range(2..=4);
            let target = random_point(&mut rng, n, p, 80);
            for eps in [0.3, 0.03, 0.0004] {
                let (point, period) = construct_periodic_point(&target, eps, TruncationDepth::default()).unwrap();
                assert_eq!(scismm_iterate(&point, period).unwrap(), point);
            }
        }
    }

    #[test]
    fn message_fix_with_first_bit_uses_auxiliary_flip() {
        // after the kept prefix every cell is 1 and m[0] = 0 must become 1
        let mut repair = Repair::new(bv(&[1, 1]), bv(&[0, 0]));
        let used = repair.fix_message(&bv(&[1, 0])).unwrap();
        assert_eq!(used, 3);
        assert_eq!((repair.x, repair.m), (bv(&[1, 1]), bv(&[1, 0])));
        assert_eq!(repair.mixing, vec![0, 1, 1]);
    }

    /// A single message bit flips on every step, and the written bit is the
    /// pre-flip value, so no point has every cover cell equal to the message
    /// bit in its image.
    #[test]
    fn single_bit_uniform_points_have_no_preimage() {
        for n in 1..=3usize {
            let cyclic = |k: usize, t: usize| Strategy::cyclic(k, vec![t]).unwrap();
            for w in 0..(1u64 << n) {
                for mbit in 0..2u64 {
                    for cell in 0..n {
                        let p = PointX2::new(
                            cyclic(n, cell),
                            BitVector::from_word(n, w).unwrap(),
                            cyclic(1, 0),
                            BitVector::from_word(1, mbit).unwrap(),
                            cyclic(1, 0),
                        )
                        .unwrap();
                        let q = scismm_step(&p).unwrap();
                        let c = q.m[0];
                        assert!(q.x.iter().any(|b| b != c));
                    }
                }
            }
            let target = PointX2::new(
                cyclic(n, 0),
                BitVector::new(vec![true; n]).unwrap(),
                cyclic(1, 0),
                bv(&[1]),
                cyclic(1, 0),
            )
            .unwrap();
            assert!(matches!(
                construct_periodic_point(&target, 0.3, TruncationDepth::default()),
                Err(Error::Unreachable(_))
            ));
        }
    }

    #[test]
    fn transit_along_existing_orbit_returns_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_point(&mut rng, 3, 2, 80);
        let b = scismm_iterate(&a, 2).unwrap();
        let (point, n0) = construct_transit_point(&a, 0.3, &b, TruncationDepth::default()).unwrap();
        assert_eq!((point, n0), (a, 2));
    }

    #[test]
    fn transit_reaches_random_centers() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let n = rng.random_range(1..=4);
            let p = rng.random_range(2..=4);
            let a = random_point(&mut rng, n, p, 80);
            let b = random_point(&mut rng, n, p, 80);
            let (point, n0) = construct_transit_point(&a, 0.05, &b, TruncationDepth::default()).unwrap();
            assert!(d2(&point, &a, TruncationDepth::default()).unwrap() < 0.05);
            assert_eq!(scismm_iterate(&point, n0).unwrap(), b);
        }
    }

    #[test]
    fn invalid_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_point(&mut rng, 2, 2, 70);
        assert!(construct_periodic_point(&a, 0.0, TruncationDepth::default()).is_err());
        assert!(construct_transit_point(&a, f64::NAN, &a, TruncationDepth::default()).is_err());
    }
}
