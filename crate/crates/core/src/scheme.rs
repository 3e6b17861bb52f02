//! Substitution with mixing message: the embedding recurrence and its blind
//! inverse.
//!
//! Step `n` (1-based) reads place, choice and mixing terms `n - 1`. It first
//! writes the current (pre-mix) message bit `m[Sc]` into cover cell `Sp`,
//! then negates message bit `Sm`.

use std::collections::{BTreeMap, BTreeSet};

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::strategy::Strategy;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScismmInput {
    pub x0: BitVector,
    pub m0: BitVector,
    pub place: Strategy,
    pub choice: Strategy,
    pub mixing: Strategy,
    pub steps: usize,
}

impl ScismmInput {
    pub fn new(
        x0: BitVector,
        m0: BitVector,
        place: Strategy,
        choice: Strategy,
        mixing: Strategy,
        steps: usize,
    ) -> Result<Self> {
        let input = Self {
            x0,
            m0,
            place,
            choice,
            mixing,
            steps,
        };
        input.validate()?;
        Ok(input)
    }

    /// Iteration count `T = P`.
    pub fn with_default_steps(
        x0: BitVector,
        m0: BitVector,
        place: Strategy,
        choice: Strategy,
        mixing: Strategy,
    ) -> Result<Self> {
        let steps = m0.len();
        Self::new(x0, m0, place, choice, mixing, steps)
    }

    pub fn cells(&self) -> usize {
        self.x0.len()
    }

    pub fn message_bits(&self) -> usize {
        self.m0.len()
    }

    fn validate(&self) -> Result<()> {
        check_shapes(
            &self.place,
            &self.choice,
            &self.mixing,
            self.cells(),
            self.message_bits(),
        )?;
        self.place.require(self.steps)?;
        self.choice.require(self.steps)?;
        self.mixing.require(self.steps)
    }
}

fn check_alphabet(s: &Strategy, expected: usize) -> Result<()> {
    if s.alphabet() != expected {
        return Err(Error::AlphabetMismatch {
            left: s.alphabet(),
            right: expected,
        });
    }
    Ok(())
}

fn check_shapes(place: &Strategy, choice: &Strategy, mixing: &Strategy, cells: usize, bits: usize) -> Result<()> {
    check_alphabet(place, cells)?;
    check_alphabet(choice, bits)?;
    check_alphabet(mixing, bits)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceStep {
    /// 1-based step index.
    pub n: usize,
    pub place: usize,
    pub choice: usize,
    pub written: bool,
    pub mix: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EmbedTrace {
    pub steps: Vec<TraceStep>,
}

/// `n` mixing steps: bit `j` is negated once for every occurrence of `j`
/// among the first `n` mixing terms.
pub fn mix_message(m0: &BitVector, mixing: &Strategy, n: usize) -> Result<BitVector> {
    check_alphabet(mixing, m0.len())?;
    mixing.require(n)?;
    let mut m = m0.clone();
    for idx in 0..n {
        m.flip(mixing.at(idx)?);
    }
    Ok(m)
}

/// Runs the recurrence for `input.steps` steps and returns the stego vector
/// with a per-step trace.
pub fn embed(input: &ScismmInput) -> Result<(BitVector, EmbedTrace)> {
    input.validate()?;
    let mut x = input.x0.clone();
    let mut m = input.m0.clone();
    let mut trace = EmbedTrace {
        steps: Vec::with_capacity(input.steps),
    };
    for idx in 0..input.steps {
        let place = input.place.at(idx)?;
        let choice = input.choice.at(idx)?;
        let mix = input.mixing.at(idx)?;
        let written = m[choice];
        x.set(place, written);
        m.flip(mix);
        trace.steps.push(TraceStep {
            n: idx + 1,
            place,
            choice,
            written,
            mix,
        });
    }
    Ok((x, trace))
}

/// How one message bit is read back: `m0[j] = y[cell] XOR parity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecoveryPlan {
    /// 1-based step whose write survives in the stego vector.
    pub step: usize,
    pub cell: usize,
    pub parity: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodabilityReport {
    pub plan: BTreeMap<usize, RecoveryPlan>,
    pub missing: BTreeSet<usize>,
}

impl DecodabilityReport {
    pub fn recoverable(&self) -> BTreeSet<usize> {
        self.plan.keys().copied().collect()
    }

    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
    }
}

/// Determines which message bits survive as the final write to some cell.
pub fn decodability(
    place: &Strategy,
    choice: &Strategy,
    mixing: &Strategy,
    cells: usize,
    bits: usize,
    steps: usize,
) -> Result<DecodabilityReport> {
    check_shapes(place, choice, mixing, cells, bits)?;
    place.require(steps)?;
    choice.require(steps)?;
    mixing.require(steps)?;

    // parity_before[idx] is the flip parity of each bit before step idx + 1
    let mut last_write: Vec<Option<usize>> = vec![None; cells];
    for idx in 0..steps {
        last_write[place.at(idx)?] = Some(idx);
    }
    let mut survivors: BTreeMap<usize, usize> = BTreeMap::new();
    for idx in last_write.iter().flatten() {
        let j = choice.at(*idx)?;
        let best = survivors.entry(j).or_insert(*idx);
        *best = (*best).max(*idx);
    }

    let mut flips = vec![false; bits];
    let mut plan = BTreeMap::new();
    let mut pending: BTreeMap<usize, usize> = survivors.iter().map(|(&j, &idx)| (idx, j)).collect();
    for idx in 0..steps {
        if let Some(j) = pending.remove(&idx) {
            plan.insert(
                j,
                RecoveryPlan {
                    step: idx + 1,
                    cell: place.at(idx)?,
                    parity: flips[j],
                },
            );
        }
        let mix = mixing.at(idx)?;
        flips[mix] = !flips[mix];
    }
    let missing = (0..bits).filter(|j| !plan.contains_key(j)).collect();
    Ok(DecodabilityReport { plan, missing })
}

/// Smallest `T` in `min_steps..=max_steps` for which every message bit is
/// recoverable, scanning the strategies once.
pub fn first_decodable_length(
    place: &Strategy,
    choice: &Strategy,
    cells: usize,
    bits: usize,
    min_steps: usize,
    max_steps: usize,
) -> Result<Option<usize>> {
    check_alphabet(place, cells)?;
    check_alphabet(choice, bits)?;
    place.require(max_steps)?;
    choice.require(max_steps)?;

    // writers[j] counts cells whose latest write read message bit j
    let mut cell_choice: Vec<Option<usize>> = vec![None; cells];
    let mut writers = vec![0usize; bits];
    let mut covered = 0usize;
    if min_steps == 0 && bits == 0 {
        return Ok(Some(0));
    }
    for idx in 0..max_steps {
        let cell = place.at(idx)?;
        let j = choice.at(idx)?;
        if let Some(old) = cell_choice[cell].replace(j) {
            writers[old] -= 1;
            if writers[old] == 0 {
                covered -= 1;
            }
        }
        writers[j] += 1;
        if writers[j] == 1 {
            covered += 1;
        }
        if idx + 1 >= min_steps && covered == bits {
            return Ok(Some(idx + 1));
        }
    }
    Ok(None)
}

/// Recovers `m0` from the stego vector, failing with the set of bits whose
/// writes did not survive.
pub fn extract(
    y: &BitVector,
    place: &Strategy,
    choice: &Strategy,
    mixing: &Strategy,
    bits: usize,
    steps: usize,
) -> Result<BitVector> {
    let report = decodability(place, choice, mixing, y.len(), bits, steps)?;
    if !report.is_complete() {
        return Err(Error::UndecodableMessage {
            missing: report.missing,
        });
    }
    let recovered = (0..bits)
        .map(|j| {
            let plan = report.plan[&j];
            y[plan.cell] ^ plan.parity
        })
        .collect();
    BitVector::new(recovered)
}

/// Like [`extract`] but returns whatever is recoverable, `None` for lost bits.
pub fn extract_partial(
    y: &BitVector,
    place: &Strategy,
    choice: &Strategy,
    mixing: &Strategy,
    bits: usize,
    steps: usize,
) -> Result<Vec<Option<bool>>> {
    let report = decodability(place, choice, mixing, y.len(), bits, steps)?;
    Ok((0..bits)
        .map(|j| report.plan.get(&j).map(|plan| y[plan.cell] ^ plan.parity))
        .collect())
}
