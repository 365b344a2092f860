//! Order statistics and quantile conditioning rectangles.
//!
//! Empirical quantiles follow the floor-index convention: for a sample of
//! size `n` and a split `(p, q)`, the interval is
//! `[X_([np]+1), X_([nq])]` where `[a]` is the integer part of `a`.
//! Intervals are closed on both ends.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{QccError, Result};

/// A pair of probability levels `0 < p < q < 1` selecting the central part
/// of a margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(f64, f64)", into = "(f64, f64)")]
pub struct QuantileSplit {
    p: f64,
    q: f64,
}

impl QuantileSplit {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0 && p < q && q < 1.0) {
            return Err(QccError::InvalidSplit { p, q });
        }
        Ok(Self { p, q })
    }

    /// Symmetric split `(p, 1 - p)`.
    pub fn symmetric(p: f64) -> Result<Self> {
        Self::new(p, 1.0 - p)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// 1-based order-statistic indices `([np] + 1, [nq])` for a sample of size `n`.
    pub fn rank_bounds(&self, n: usize) -> (usize, usize) {
        let nf = n as f64;
        (floor_index(nf * self.p) + 1, floor_index(nf * self.q))
    }
}

impl TryFrom<(f64, f64)> for QuantileSplit {
    type Error = QccError;

    fn try_from((p, q): (f64, f64)) -> Result<Self> {
        Self::new(p, q)
    }
}

impl From<QuantileSplit> for (f64, f64) {
    fn from(s: QuantileSplit) -> Self {
        (s.p, s.q)
    }
}

impl fmt::Display for QuantileSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

/// Integer part of a non-negative index product.
///
/// Products such as `100 * 0.29` land a few ulps below the exact integer in
/// binary floating point; values within that rounding band snap to the
/// integer so the index matches exact arithmetic.
pub(crate) fn floor_index(a: f64) -> usize {
    let r = a.round();
    if (a - r).abs() <= 8.0 * f64::EPSILON * a.abs().max(1.0) {
        r as usize
    } else {
        a.floor() as usize
    }
}

/// Ceiling counterpart of [`floor_index`].
pub(crate) fn ceil_index(a: f64) -> usize {
    let r = a.round();
    if (a - r).abs() <= 8.0 * f64::EPSILON * a.abs().max(1.0) {
        r as usize
    } else {
        a.ceil() as usize
    }
}

/// Closed interval `[lo, hi]`; any interval with `lo > hi` is empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const EMPTY: Interval = Interval {
        lo: f64::INFINITY,
        hi: f64::NEG_INFINITY,
    };

    pub const FULL: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo <= self.hi)
    }

    #[inline]
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Product of two closed intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub x: Interval,
    pub y: Interval,
}

impl Rectangle {
    pub const FULL: Rectangle = Rectangle {
        x: Interval::FULL,
        y: Interval::FULL,
    };

    pub fn new(x: Interval, y: Interval) -> Self {
        Self { x, y }
    }

    pub fn square(side: Interval) -> Self {
        Self { x: side, y: side }
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty() || self.y.is_empty()
    }
}

/// Membership in the closed rectangle.
#[inline]
pub fn contains(rect: &Rectangle, x: f64, y: f64) -> bool {
    rect.x.contains(x) && rect.y.contains(y)
}

/// The `k`-th smallest element (1-based) with multiset semantics.
pub fn order_statistic(sample: &[f64], k: usize) -> Result<f64> {
    if sample.is_empty() {
        return Err(QccError::EmptySample);
    }
    if k == 0 || k > sample.len() {
        return Err(QccError::IndexOutOfRange {
            k,
            len: sample.len(),
        });
    }
    let mut scratch = sample.to_vec();
    let (_, v, _) = scratch.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*v)
}

/// Two order statistics `lo_rank <= hi_rank` (1-based) from one scratch copy.
fn order_statistic_pair(sample: &[f64], lo_rank: usize, hi_rank: usize) -> (f64, f64) {
    debug_assert!(1 <= lo_rank && lo_rank <= hi_rank && hi_rank <= sample.len());
    let mut scratch = sample.to_vec();
    let (left, hi, _) = scratch.select_nth_unstable_by(hi_rank - 1, f64::total_cmp);
    let hi = *hi;
    let lo = if lo_rank == hi_rank {
        hi
    } else {
        *left.select_nth_unstable_by(lo_rank - 1, f64::total_cmp).1
    };
    (lo, hi)
}

/// `[X_([np]+1), X_([nq])]`, or the empty interval when the index range is inverted.
pub fn empirical_interval(sample: &[f64], split: QuantileSplit) -> Result<Interval> {
    if sample.is_empty() {
        return Err(QccError::EmptySample);
    }
    let (lo_rank, hi_rank) = split.rank_bounds(sample.len());
    if lo_rank > hi_rank || hi_rank == 0 {
        return Ok(Interval::EMPTY);
    }
    let (lo, hi) = order_statistic_pair(sample, lo_rank, hi_rank);
    Ok(Interval::new(lo, hi))
}

/// Empirical conditioning rectangle built margin by margin.
pub fn rectangle_hat(
    x: &[f64],
    y: &[f64],
    split_x: QuantileSplit,
    split_y: QuantileSplit,
) -> Result<Rectangle> {
    if x.len() != y.len() {
        return Err(QccError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    Ok(Rectangle::new(
        empirical_interval(x, split_x)?,
        empirical_interval(y, split_y)?,
    ))
}
