//! Executable forms of the constructive arguments behind the guarantees.
//!
//! These exist for the test suite and diagnostics; the estimator never calls
//! them. The bin-partition scheme splits a queried sequence into consecutive
//! chunks whose internal variation stays below `B / sqrt(chunk ping count)`,
//! and the number of chunks it spawns is deterministically bounded by
//! `max(3 n^{1/3} C^{2/3} B^{-2/3}, 1)`. The two-run verifier checks an
//! arbitrary claimed tiling of a window against the cover-membership and
//! length-ratio conditions.

use crate::cover::{is_cover_element, CoverPartition};
use crate::{Error, Result};

/// Consecutive bins over a queried-value sequence.
#[derive(Debug, Clone)]
pub struct BinPartition {
    /// Inclusive 1-based (start, end) positions of each bin.
    pub bins: Vec<(usize, usize)>,
    /// Variation accumulated strictly inside each bin.
    pub bin_tv: Vec<f64>,
    /// Ping totals per bin.
    pub bin_pings: Vec<u64>,
}

impl BinPartition {
    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }
}

/// Runs the streaming bin-splitting scheme: a new bin starts whenever adding
/// the next value would push the running variation above
/// `B / sqrt(pings + p_i)`.
pub fn bin_partition(thetas: &[f64], pings: &[u64], bound: f64) -> Result<BinPartition> {
    if thetas.is_empty() || thetas.len() != pings.len() {
        return Err(Error::Domain(
            "need equal, non-zero numbers of values and ping counts".into(),
        ));
    }
    if pings.iter().any(|&p| p < 1) {
        return Err(Error::Domain("ping counts must be at least 1".into()));
    }
    if !(bound.is_finite() && bound > 0.0) {
        return Err(Error::Domain(format!("bound {bound} must be positive")));
    }
    let m = thetas.len();
    let mut bins = Vec::new();
    let mut bin_tv = Vec::new();
    let mut bin_pings = Vec::new();
    let mut start = 1usize;
    let mut ping_acc = pings[0];
    let mut tv_acc = 0.0f64;
    for i in 2..=m {
        let jump = (thetas[i - 1] - thetas[i - 2]).abs();
        if tv_acc + jump > bound / ((ping_acc + pings[i - 1]) as f64).sqrt() {
            bins.push((start, i - 1));
            bin_tv.push(tv_acc);
            bin_pings.push(ping_acc);
            start = i;
            ping_acc = pings[i - 1];
            tv_acc = 0.0;
        } else {
            ping_acc += pings[i - 1];
            tv_acc += jump;
        }
    }
    bins.push((start, m));
    bin_tv.push(tv_acc);
    bin_pings.push(ping_acc);
    Ok(BinPartition {
        bins,
        bin_tv,
        bin_pings,
    })
}

/// Deterministic cap on the bin count: `max(3 n^{1/3} C^{2/3} B^{-2/3}, 1)`.
pub fn bin_count_bound(n: u64, total_variation: f64, bound: f64) -> f64 {
    (3.0 * (n as f64).powf(1.0 / 3.0) * total_variation.powf(2.0 / 3.0) * bound.powf(-2.0 / 3.0))
        .max(1.0)
}

/// Outcome of checking a claimed two-run tiling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilingReport {
    pub pass: bool,
    /// First violated condition, when any.
    pub failure: Option<String>,
}

impl TilingReport {
    fn fail(reason: String) -> Self {
        TilingReport {
            pass: false,
            failure: Some(reason),
        }
    }

    fn pass() -> Self {
        TilingReport {
            pass: true,
            failure: None,
        }
    }
}

/// Checks raw interval runs against the two-run conditions over `[q, s]`:
/// cover membership, exact consecutive tiling, lengths at least doubling
/// along the left run, and at least halving along the right run from its
/// second element on.
pub fn verify_two_run_tiling(
    left_run: &[(u64, u64)],
    right_run: &[(u64, u64)],
    q: u64,
    s: u64,
) -> TilingReport {
    let all: Vec<(u64, u64)> = left_run.iter().chain(right_run).copied().collect();
    if all.is_empty() {
        return TilingReport::fail("empty tiling".into());
    }
    for &(a, b) in &all {
        if !is_cover_element(a, b) {
            return TilingReport::fail(format!("[{a},{b}] is not a cover element"));
        }
    }
    let mut cursor = q;
    for &(a, b) in &all {
        if a != cursor {
            return TilingReport::fail(format!(
                "expected an interval starting at {cursor}, found [{a},{b}]"
            ));
        }
        cursor = b + 1;
    }
    if cursor != s + 1 {
        return TilingReport::fail(format!("tiling stops at {} instead of {s}", cursor - 1));
    }
    let len = |iv: (u64, u64)| iv.1 - iv.0 + 1;
    for w in left_run.windows(2) {
        if 2 * len(w[0]) > len(w[1]) {
            return TilingReport::fail(format!(
                "left run ratio violated: |[{},{}]| / |[{},{}]| > 1/2",
                w[0].0, w[0].1, w[1].0, w[1].1
            ));
        }
    }
    for w in right_run.windows(2) {
        if 2 * len(w[1]) > len(w[0]) {
            return TilingReport::fail(format!(
                "right run ratio violated: |[{},{}]| / |[{},{}]| > 1/2",
                w[1].0, w[1].1, w[0].0, w[0].1
            ));
        }
    }
    TilingReport::pass()
}

/// [`verify_two_run_tiling`] applied to a constructed [`CoverPartition`].
pub fn verify_cover_partition(partition: &CoverPartition, q: u64, s: u64) -> TilingReport {
    let to_raw =
        |run: &[crate::cover::DyadicInterval]| -> Vec<(u64, u64)> {
            run.iter().map(|iv| (iv.start(), iv.end())).collect()
        };
    verify_two_run_tiling(&to_raw(&partition.left_run), &to_raw(&partition.right_run), q, s)
}
