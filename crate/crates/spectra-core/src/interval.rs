//! Closed real intervals used for certified enclosures.

use serde::{Deserialize, Serialize};

/// A closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}] is reversed");
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    /// Minkowski sum: the enclosure of `x + y` for `x` here, `y` there.
    pub fn sum(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo + other.lo, hi: self.hi + other.hi }
    }

    /// Certified separation between the two intervals: a lower bound for
    /// `|x - y|` over all `x` here and `y` there. Zero when they overlap.
    pub fn gap(&self, other: &Interval) -> f64 {
        (other.lo - self.hi).max(self.lo - other.hi).max(0.0)
    }

    /// Upper bound for `|x - y|` over all `x` here and `y` there.
    pub fn spread(&self, other: &Interval) -> f64 {
        (self.hi - other.lo).abs().max((other.hi - self.lo).abs())
    }

    /// Widens both ends outward by a relative-plus-absolute margin, so an
    /// interval computed in floating point stays a sound enclosure.
    pub fn widened(&self) -> Interval {
        Interval { lo: round_down(self.lo), hi: round_up(self.hi) }
    }
}

const REL_EPS: f64 = 1e-14;
const ABS_EPS: f64 = 1e-300;

fn round_down(x: f64) -> f64 {
    x - x.abs() * REL_EPS - ABS_EPS
}

fn round_up(x: f64) -> f64 {
    x + x.abs() * REL_EPS + ABS_EPS
}
