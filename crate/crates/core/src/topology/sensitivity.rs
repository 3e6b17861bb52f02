use crate::error::{Error, Result};

use super::{d2, scismm_iterate, scismm_step, PointX2, TruncationDepth};

/// Finds a point `Y` with `d2(X, Y) < 10^-k` whose orbit separates from the
/// orbit of `X` by at least 1 (a differing state bit) within `max_steps`.
///
/// `Y` differs from `X` in a single strategy term at some index `t >= k + 2`.
/// Changing the place term is tried first, then the choice term, then the
/// mixing term; the first change that alters the state after step `t + 1`
/// wins, so divergence happens at `n = t + 1`.
pub fn sensitivity_probe(x: &PointX2, k: usize, max_steps: usize, depth: TruncationDepth) -> Result<(PointX2, usize)> {
    if k == 0 {
        return Err(Error::InvalidParameter("closeness exponent must be at least 1".into()));
    }
    let first = k + 2;
    let cells = x.cells();
    let bits = x.message_bits();

    let mut current = match scismm_iterate(x, first) {
        Ok(p) => p,
        Err(Error::InsufficientStrategy { .. }) => return Err(Error::ProbeExhausted { max_steps }),
        Err(e) => return Err(e),
    };
    for t in first..max_steps {
        let (Ok(place), Ok(choice), Ok(mix)) = (current.place.at(0), current.choice.at(0), current.mixing.at(0)) else {
            break;
        };
        let written = current.m[choice];

        let edit = if let Some(alt) =
            (0..cells).find(|&i| i != place && (current.x[place] != written || current.x[i] != written))
        {
            Some(Edit::Place(alt))
        } else if let Some(alt) = (0..bits).find(|&l| current.m[l] != written) {
            Some(Edit::Choice(alt))
        } else {
            (0..bits).find(|&l| l != mix).map(Edit::Mixing)
        };

        if let Some(edit) = edit {
            let y = edit.apply(x, t)?;
            let n = t + 1;
            let close = d2(x, &y, depth)?;
            if close >= 10f64.powi(-(k as i32)) {
                return Err(Error::ConstructionFailed(format!("probe point at distance {close}")));
            }
            let (fx, fy) = (scismm_iterate(x, n)?, scismm_iterate(&y, n)?);
            if fx.x == fy.x && fx.m == fy.m {
                return Err(Error::ConstructionFailed(format!("orbits agree after {n} steps")));
            }
            return Ok((y, n));
        }
        current = scismm_step(&current)?;
    }
    Err(Error::ProbeExhausted { max_steps })
}

enum Edit {
    Place(usize),
    Choice(usize),
    Mixing(usize),
}

impl Edit {
    /// `x` with strategy term `t` replaced.
    fn apply(&self, x: &PointX2, t: usize) -> Result<PointX2> {
        let mut y = x.clone();
        match *self {
            Edit::Place(v) => y.place = x.place.with_term(t, v)?,
            Edit::Choice(v) => y.choice = x.choice.with_term(t, v)?,
            Edit::Mixing(v) => y.mixing = x.mixing.with_term(t, v)?,
        }
        Ok(y)
    }
}
