//! Geometric cover of dyadic intervals over a 1-based time horizon.
//!
//! The cover is the union over levels `k >= 0` of the interval families
//! `[i * 2^k, (i+1) * 2^k - 1]` for `i >= 1`. Every time point `t` lies in
//! exactly `floor(log2 t) + 1` cover elements, and any contiguous window
//! `[q, s]` splits into two short runs of cover elements whose lengths at
//! least double toward the middle and at least halve away from it. Those two
//! facts are what make the cover usable as a sleeping-expert index set: the
//! awake set is logarithmic and every window is covered by logarithmically
//! many experts.

use crate::{Error, Result};
use std::fmt;

/// A closed interval `[start, start + 2^level - 1]` from the geometric cover.
///
/// `start` must be a positive multiple of the length `2^level`; equivalently
/// the interval is the `i`-th length-`2^level` block with `i >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicInterval {
    start: u64,
    level: u32,
}

impl DyadicInterval {
    /// Builds the cover element starting at `start` with length `2^level`.
    pub fn new(start: u64, level: u32) -> Result<Self> {
        if level >= 63 {
            return Err(Error::Domain(format!("interval level {level} too large")));
        }
        let len = 1u64 << level;
        if start == 0 || !start.is_multiple_of(len) {
            return Err(Error::Domain(format!(
                "start {start} is not a positive multiple of 2^{level}"
            )));
        }
        Ok(DyadicInterval { start, level })
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn end(&self) -> u64 {
        self.start + self.len() - 1
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> u64 {
        1u64 << self.level
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, t: u64) -> bool {
        t >= self.start && t <= self.end()
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.start, self.end())
    }
}

/// A window `[q, s]` tiled by two runs of cover elements.
///
/// Reading the concatenation left to right, `left_run` lengths at least
/// double at each step and `right_run` lengths at least halve from its second
/// element onward. The first right-run element is unconstrained relative to
/// the last left-run element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverPartition {
    pub left_run: Vec<DyadicInterval>,
    pub right_run: Vec<DyadicInterval>,
}

impl CoverPartition {
    /// All elements in tiling order.
    pub fn elements(&self) -> impl Iterator<Item = &DyadicInterval> {
        self.left_run.iter().chain(self.right_run.iter())
    }

    pub fn count(&self) -> usize {
        self.left_run.len() + self.right_run.len()
    }
}

/// Number of cover elements containing `t`, ignoring any horizon restriction.
///
/// Equals `floor(log2 t) + 1`: one element per level `k` with `2^k <= t`.
pub fn awake_count_unrestricted(t: u64) -> Result<u64> {
    if t < 1 {
        return Err(Error::Domain(format!("time index {t} must be >= 1")));
    }
    Ok(t.ilog2() as u64 + 1)
}

/// All cover elements containing `t` that fit inside `[1, n]`, by increasing
/// length.
pub fn awake_set(t: u64, n: u64) -> Result<Vec<DyadicInterval>> {
    if t < 1 || t > n {
        return Err(Error::Domain(format!(
            "time index {t} outside horizon [1, {n}]"
        )));
    }
    let mut out = Vec::new();
    for level in 0..=t.ilog2() {
        let len = 1u64 << level;
        let start = (t / len) * len;
        // start >= len holds because 2^level <= t, so the block index is >= 1.
        if start + len - 1 <= n {
            out.push(DyadicInterval { start, level });
        }
    }
    Ok(out)
}

/// True iff `[a, b]` is a cover element: length a power of two dividing `a`.
pub fn is_cover_element(a: u64, b: u64) -> bool {
    if a == 0 || b < a {
        return false;
    }
    let len = b - a + 1;
    len.is_power_of_two() && a.is_multiple_of(len)
}

/// Enumerates every cover element contained in `[1, n]`, level by level.
///
/// The total count is at most `2n`; this is the index set the expert pool is
/// initialized over.
pub fn enumerate_cover(n: u64) -> Vec<DyadicInterval> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    for level in 0..=n.ilog2() {
        let len = 1u64 << level;
        let mut start = len;
        while start + len - 1 <= n {
            out.push(DyadicInterval { start, level });
            start += len;
        }
    }
    out
}

/// Tiles `[q, s]` (within horizon `n`) by cover elements, split into the
/// doubling and halving runs.
///
/// Walks left to right, at each position taking the longest cover element
/// that starts there and fits in the remaining window: the feasible level is
/// capped by both the 2-adic valuation of the position and the remaining
/// length. While the valuation is the binding cap the levels strictly rise;
/// once the remaining length binds they strictly fall, and they never rise
/// again. The split point between the two runs is chosen so that the
/// doubling/halving ratio conditions hold on each side.
pub fn partition(q: u64, s: u64, n: u64) -> Result<CoverPartition> {
    if q < 1 || q > s || s > n {
        return Err(Error::Domain(format!(
            "window [{q}, {s}] invalid for horizon {n}"
        )));
    }
    let mut picks: Vec<DyadicInterval> = Vec::new();
    // Index of the first pick whose level was capped by the remaining length
    // rather than by the valuation of its start position.
    let mut first_size_limited: Option<usize> = None;
    let mut p = q;
    while p <= s {
        let valuation = p.trailing_zeros();
        let size_cap = (s - p + 1).ilog2();
        let level = valuation.min(size_cap);
        if first_size_limited.is_none() && valuation >= size_cap {
            first_size_limited = Some(picks.len());
        }
        let iv = DyadicInterval {
            start: p,
            level,
        };
        p = iv.end() + 1;
        picks.push(iv);
    }

    // All picks valuation-limited cannot happen (the last pick always ends at
    // s, so its level is capped by the remaining length); treat it as the
    // final pick for robustness.
    let split = first_size_limited.unwrap_or(picks.len() - 1);
    let boundary = if split == 0 {
        // No rising phase: the peak alone forms the left run.
        1
    } else if picks[split].level > picks[split - 1].level {
        // Peak strictly above the rising phase: it extends the doubling run.
        split + 1
    } else {
        // Peak ties the last rising element: it must start the halving run,
        // where its ratio to the previous element is unconstrained.
        split
    };
    let right_run = picks.split_off(boundary);
    Ok(CoverPartition {
        left_run: picks,
        right_run,
    })
}
