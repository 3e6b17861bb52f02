//! Stego-security checks: exact enumeration on small instances and seeded
//! Monte-Carlo chi-square tests on larger ones.
//!
//! The exact and uniform Monte-Carlo tests draw covers, messages and strategy
//! terms uniformly and independently. Under that hypothesis the stego vector
//! is uniform for some small instances but not all: once a message bit has
//! been copied into the cover, later copies of the same bit are correlated
//! with it, so e.g. N = 2, P = 1, T = 3 gives probabilities 3/16 and 5/16.
//! The keyed test fixes one CIIS strategy triple per key; it is reported, not
//! judged.

use std::fmt;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::gamma::gamma_ur;

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::keygen::{derive_strategy_triple, Key, PlcmParameter, SeedMode, UnitFraction};
use crate::scheme::{embed, ScismmInput};
use crate::strategy::Strategy;

/// Identifier of the generator behind every Monte-Carlo report.
pub const RNG_ALGORITHM: &str = "chacha8";

/// Enumeration budget of [`exact_distribution`].
pub const EXACT_BUDGET: u128 = 1 << 26;

/// Trials per generator stream; each block gets its own ChaCha stream so the
/// aggregate does not depend on scheduling.
const BLOCK: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDistribution {
    pub cells: usize,
    pub message_bits: usize,
    pub steps: usize,
    /// Outcome counts indexed by `y.to_word()`.
    pub counts: Vec<u64>,
    pub total: u64,
}

impl ExactDistribution {
    pub fn probability(&self, y: usize) -> Ratio<u64> {
        Ratio::new(self.counts[y], self.total)
    }

    pub fn probabilities(&self) -> Vec<Ratio<u64>> {
        (0..self.counts.len()).map(|y| self.probability(y)).collect()
    }

    /// Every outcome has probability exactly `2^-N`.
    pub fn is_uniform(&self) -> bool {
        let expected = Ratio::new(1, 1u64 << self.cells);
        self.probabilities().iter().all(|&p| p == expected)
    }
}

fn digits(mut code: u64, base: usize, len: usize) -> Vec<usize> {
    (0..len)
        .map(|_| {
            let d = (code % base as u64) as usize;
            code /= base as u64;
            d
        })
        .collect()
}

/// Enumerates every cover, message and strategy prefix with equal weight,
/// embeds, and tallies the stego vectors.
pub fn exact_distribution(cells: usize, message_bits: usize, steps: usize) -> Result<ExactDistribution> {
    if cells == 0 || message_bits == 0 || cells > 20 || message_bits > 20 {
        return Err(Error::InvalidParameter("N and P must be between 1 and 20".into()));
    }
    let pow = |base: usize, exp: usize| (base as u128).checked_pow(exp as u32);
    let required = pow(2, cells)
        .zip(pow(2, message_bits))
        .zip(pow(cells, steps))
        .zip(pow(message_bits, 2 * steps))
        .and_then(|(((a, b), c), d)| a.checked_mul(b)?.checked_mul(c)?.checked_mul(d))
        .unwrap_or(u128::MAX);
    if required > EXACT_BUDGET {
        return Err(Error::BudgetExceeded {
            required,
            budget: EXACT_BUDGET,
        });
    }

    let place_count = (cells as u64).pow(steps as u32);
    let msg_count = (message_bits as u64).pow(steps as u32);
    let mut counts = vec![0u64; 1 << cells];
    let mut total = 0u64;
    for place_code in 0..place_count {
        let place = Strategy::new(cells, digits(place_code, cells, steps))?;
        for choice_code in 0..msg_count {
            let choice = Strategy::new(message_bits, digits(choice_code, message_bits, steps))?;
            for mix_code in 0..msg_count {
                let mixing = Strategy::new(message_bits, digits(mix_code, message_bits, steps))?;
                for xw in 0..(1u64 << cells) {
                    for mw in 0..(1u64 << message_bits) {
                        let input = ScismmInput::new(
                            BitVector::from_word(cells, xw)?,
                            BitVector::from_word(message_bits, mw)?,
                            place.clone(),
                            choice.clone(),
                            mixing.clone(),
                            steps,
                        )?;
                        let (y, _) = embed(&input)?;
                        counts[y.to_word() as usize] += 1;
                        total += 1;
                    }
                }
            }
        }
    }
    Ok(ExactDistribution {
        cells,
        message_bits,
        steps,
        counts,
        total,
    })
}

/// Pearson statistic of `bins` against the uniform distribution, and its
/// upper-tail p-value with `bins.len() - 1` degrees of freedom.
pub fn chi_square_uniform(bins: &[u64]) -> (f64, f64) {
    let samples: u64 = bins.iter().sum();
    let k = bins.len() as f64;
    let expected = samples as f64 / k;
    let statistic: f64 = bins
        .iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum();
    (statistic, chi_square_p_value(statistic, bins.len() - 1))
}

/// `Q(dof/2, statistic/2)`, the regularized upper incomplete gamma function.
pub fn chi_square_p_value(statistic: f64, dof: usize) -> f64 {
    if statistic <= 0.0 {
        return 1.0;
    }
    gamma_ur(dof as f64 / 2.0, statistic / 2.0)
}

/// Total-variation distance between the empirical distribution and uniform.
pub fn total_variation(bins: &[u64]) -> f64 {
    let samples: u64 = bins.iter().sum();
    let u = 1.0 / bins.len() as f64;
    0.5 * bins.iter().map(|&c| (c as f64 / samples as f64 - u).abs()).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformityReport {
    pub cells: usize,
    pub message_bits: usize,
    pub steps: usize,
    pub samples: usize,
    pub seed: u64,
    pub bins: Vec<u64>,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl UniformityReport {
    fn from_bins(cells: usize, message_bits: usize, steps: usize, seed: u64, bins: Vec<u64>) -> Self {
        let samples = bins.iter().sum::<u64>() as usize;
        let (statistic, p_value) = chi_square_uniform(&bins);
        Self {
            cells,
            message_bits,
            steps,
            samples,
            seed,
            dof: bins.len() - 1,
            bins,
            statistic,
            p_value,
        }
    }

    pub fn total_variation(&self) -> f64 {
        total_variation(&self.bins)
    }
}

/// Field order: rng, seed, n, p, t, samples, dof, statistic, p_value, bins.
impl fmt::Display for UniformityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rng={RNG_ALGORITHM}")?;
        writeln!(f, "seed={}", self.seed)?;
        writeln!(f, "n={}", self.cells)?;
        writeln!(f, "p={}", self.message_bits)?;
        writeln!(f, "t={}", self.steps)?;
        writeln!(f, "samples={}", self.samples)?;
        writeln!(f, "dof={}", self.dof)?;
        writeln!(f, "statistic={:.6}", self.statistic)?;
        writeln!(f, "p_value={:.6e}", self.p_value)?;
        let bins: Vec<String> = self.bins.iter().map(u64::to_string).collect();
        writeln!(f, "bins={}", bins.join(","))
    }
}

fn check_samples(cells: usize, samples: usize) -> Result<()> {
    if cells == 0 || cells > 24 {
        return Err(Error::InvalidParameter("N must be between 1 and 24".into()));
    }
    let minimum = 10 << cells;
    if samples < minimum {
        return Err(Error::InsufficientSamples { samples, minimum });
    }
    Ok(())
}

/// Bins `sampler` outputs over `samples` trials. Trial `i` draws from
/// ChaCha8 stream `i / 1024` seeded with `seed`; blocks run in parallel and
/// are summed, so the result is independent of scheduling.
pub fn tally<F>(cells: usize, samples: usize, seed: u64, sampler: F) -> Result<Vec<u64>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<usize> + Sync,
{
    let blocks = samples.div_ceil(BLOCK);
    let partial: Result<Vec<Vec<u64>>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let mut bins = vec![0u64; 1 << cells];
            let trials = BLOCK.min(samples - b * BLOCK);
            for _ in 0..trials {
                bins[sampler(&mut rng)?] += 1;
            }
            Ok(bins)
        })
        .collect();
    let mut bins = vec![0u64; 1 << cells];
    for block in partial? {
        for (acc, c) in bins.iter_mut().zip(block) {
            *acc += c;
        }
    }
    Ok(bins)
}

fn uniform_strategy(rng: &mut ChaCha8Rng, alphabet: usize, len: usize) -> Result<Strategy> {
    Strategy::new(alphabet, (0..len).map(|_| rng.random_range(0..alphabet)).collect())
}

fn uniform_bits(rng: &mut ChaCha8Rng, len: usize) -> Result<BitVector> {
    BitVector::new((0..len).map(|_| rng.random_bool(0.5)).collect())
}

/// Monte-Carlo uniformity of the stego vector with uniform covers, messages
/// and strategies.
pub fn uniformity_test(
    cells: usize,
    message_bits: usize,
    steps: usize,
    samples: usize,
    seed: u64,
) -> Result<UniformityReport> {
    check_samples(cells, samples)?;
    if message_bits == 0 {
        return Err(Error::InvalidParameter("P must be at least 1".into()));
    }
    let bins = tally(cells, samples, seed, |rng| {
        let x0 = uniform_bits(rng, cells)?;
        let m0 = uniform_bits(rng, message_bits)?;
        let place = uniform_strategy(rng, cells, steps)?;
        let choice = uniform_strategy(rng, message_bits, steps)?;
        let mixing = uniform_strategy(rng, message_bits, steps)?;
        let (y, _) = embed(&ScismmInput::new(x0, m0, place, choice, mixing, steps)?)?;
        Ok(y.to_word() as usize)
    })?;
    Ok(UniformityReport::from_bins(cells, message_bits, steps, seed, bins))
}

/// Same test with one fixed blind-mode CIIS strategy triple per key.
pub fn keyed_uniformity_test(
    keys: &[UnitFraction],
    p: PlcmParameter,
    cells: usize,
    message_bits: usize,
    steps: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<UniformityReport>> {
    check_samples(cells, samples)?;
    keys.iter()
        .map(|&k| {
            let key = Key { seed: k, p };
            let triple = derive_strategy_triple(&key, cells, message_bits, steps, SeedMode::Blind)?;
            let bins = tally(cells, samples, seed, |rng| {
                let x0 = uniform_bits(rng, cells)?;
                let m0 = uniform_bits(rng, message_bits)?;
                let input = ScismmInput::new(
                    x0,
                    m0,
                    triple.place.clone(),
                    triple.choice.clone(),
                    triple.mixing.clone(),
                    steps,
                )?;
                Ok(embed(&input)?.0.to_word() as usize)
            })?;
            Ok(UniformityReport::from_bins(cells, message_bits, steps, seed, bins))
        })
        .collect()
}

/// Uniformity report for an arbitrary sampler, used for control runs.
pub fn uniformity_of<F>(cells: usize, samples: usize, seed: u64, sampler: F) -> Result<UniformityReport>
where
    F: Fn(&mut ChaCha8Rng) -> Result<usize> + Sync,
{
    check_samples(cells, samples)?;
    let bins = tally(cells, samples, seed, sampler)?;
    Ok(UniformityReport::from_bins(cells, 0, 0, seed, bins))
}
