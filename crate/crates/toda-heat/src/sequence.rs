//! Rational sequences on explicit integer intervals.
//!
//! A `Seq` is a function from a contiguous interval `[lo, hi]` to `Rat`.
//! Evaluation outside the interval is `None`, never a silent zero: on a
//! finite window, out-of-range data is *unknown*, and zero-filling would
//! corrupt exact identity checks.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rational::Rat;

/// Closed integer interval `[lo, hi]`; empty when `lo > hi`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Interval {
    pub lo: i64,
    pub hi: i64,
}

impl Interval {
    pub fn new(lo: i64, hi: i64) -> Self {
        Interval { lo, hi }
    }

    /// Canonical empty interval.
    pub fn empty() -> Self {
        Interval { lo: 1, hi: 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            (self.hi - self.lo + 1) as usize
        }
    }

    pub fn contains(&self, n: i64) -> bool {
        self.lo <= n && n <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        other.is_empty() || (self.lo <= other.lo && other.hi <= self.hi)
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// Convex hull; an empty side is ignored.
    pub fn hull(&self, other: &Interval) -> Interval {
        if self.is_empty() {
            return *other;
        }
        if other.is_empty() {
            return *self;
        }
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn translate(&self, d: i64) -> Interval {
        Interval::new(self.lo + d, self.hi + d)
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "[]")
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

/// Rational sequence defined on an explicit interval.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seq {
    lo: i64,
    vals: Vec<Rat>,
}

impl Seq {
    pub fn new(lo: i64, vals: Vec<Rat>) -> Self {
        Seq { lo, vals }
    }

    pub fn constant(c: Rat, iv: Interval) -> Self {
        Seq::new(iv.lo, vec![c; iv.len()])
    }

    /// Build from a function on an interval.
    pub fn tabulate(iv: Interval, mut f: impl FnMut(i64) -> Rat) -> Self {
        Seq::new(iv.lo, iv.iter().map(&mut f).collect())
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.lo, self.lo + self.vals.len() as i64 - 1)
    }

    pub fn get(&self, n: i64) -> Option<&Rat> {
        if n < self.lo {
            return None;
        }
        self.vals.get((n - self.lo) as usize)
    }

    /// Value at `n`; panics outside the interval. Callers compute validity
    /// intervals first, so an out-of-range hit is an internal bug.
    pub fn at(&self, n: i64) -> &Rat {
        self.get(n)
            .unwrap_or_else(|| panic!("sequence index {n} outside {}", self.interval()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Rat)> {
        self.vals.iter().enumerate().map(move |(i, v)| (self.lo + i as i64, v))
    }

    pub fn is_zero(&self) -> bool {
        self.vals.iter().all(Rat::is_zero)
    }

    /// Restrict to a subinterval (which must be contained in the domain).
    pub fn restrict(&self, iv: Interval) -> Seq {
        assert!(self.interval().contains_interval(&iv));
        Seq::tabulate(iv, |n| self.at(n).clone())
    }

    /// Pointwise combination on the intersection of domains.
    pub fn zip_with(&self, other: &Seq, mut f: impl FnMut(&Rat, &Rat) -> Rat) -> Seq {
        let iv = self.interval().intersect(&other.interval());
        Seq::tabulate(iv, |n| f(self.at(n), other.at(n)))
    }

    pub fn sub(&self, other: &Seq) -> Seq {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: &Rat) -> Seq {
        Seq::new(self.lo, self.vals.iter().map(|v| v * c).collect())
    }

    /// Equality as sequences restricted to the intersection of domains;
    /// returns the interval on which they were compared.
    pub fn eq_on_common(&self, other: &Seq) -> (bool, Interval) {
        let iv = self.interval().intersect(&other.interval());
        let ok = iv.iter().all(|n| self.at(n) == other.at(n));
        (ok, iv)
    }
}

impl fmt::Debug for Seq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Seq{}{{", self.interval())?;
        for (n, v) in self.iter() {
            write!(f, " {n}:{v}")?;
        }
        write!(f, " }}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_ops() {
        let a = Interval::new(0, 5);
        let b = Interval::new(3, 9);
        assert_eq!(a.intersect(&b), Interval::new(3, 5));
        assert_eq!(a.hull(&b), Interval::new(0, 9));
        assert!(Interval::new(4, 2).is_empty());
        assert_eq!(Interval::empty().hull(&a), a);
    }

    #[test]
    fn seq_access() {
        let s = Seq::tabulate(Interval::new(-2, 2), Rat::from_int);
        assert_eq!(s.get(-2), Some(&Rat::from_int(-2)));
        assert_eq!(s.get(3), None);
        let t = s.restrict(Interval::new(0, 1));
        assert_eq!(t.interval(), Interval::new(0, 1));
    }
}
