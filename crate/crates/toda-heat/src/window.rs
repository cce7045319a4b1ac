//! Finite windows of tridiagonal operator data.
//!
//! A `Window` holds the two coefficient sequences `a_n`, `b_n` of
//! `L = E + b_n Id + a_n E^{-1}` on a closed interval, with every `a_n`
//! nonzero (the operator stays properly bordered). It is the ground-truth
//! data object: wave tables, heat coefficients, and vector fields are all
//! functions of a window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rat;
use crate::sequence::{Interval, Seq};

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Window {
    a: Seq,
    b: Seq,
}

impl Window {
    /// Build a window from `a` and `b` values on `iv`. Fails if some `a_n`
    /// vanishes.
    pub fn new(iv: Interval, a: Vec<Rat>, b: Vec<Rat>) -> Result<Self> {
        assert_eq!(a.len(), iv.len(), "a length must match interval");
        assert_eq!(b.len(), iv.len(), "b length must match interval");
        if let Some(i) = a.iter().position(Rat::is_zero) {
            return Err(Error::NotProperlyBordered { n: iv.lo + i as i64 });
        }
        Ok(Window {
            a: Seq::new(iv.lo, a),
            b: Seq::new(iv.lo, b),
        })
    }

    pub fn from_seqs(a: Seq, b: Seq) -> Result<Self> {
        assert_eq!(a.interval(), b.interval());
        if let Some((n, _)) = a.iter().find(|(_, v)| v.is_zero()) {
            return Err(Error::NotProperlyBordered { n });
        }
        Ok(Window { a, b })
    }

    /// Constant-coefficient window `a_n = a`, `b_n = b` on `iv`.
    pub fn constant(a: Rat, b: Rat, iv: Interval) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::InvalidArgument("constant window needs a != 0".into()));
        }
        Ok(Window {
            a: Seq::constant(a, iv),
            b: Seq::constant(b, iv),
        })
    }

    /// The free window `a = 1`, `b = 0` (discrete Laplacian shifted by 2).
    pub fn free(iv: Interval) -> Self {
        Window::constant(Rat::one(), Rat::zero(), iv).unwrap()
    }

    pub fn interval(&self) -> Interval {
        self.a.interval()
    }

    pub fn a(&self, n: i64) -> Option<&Rat> {
        self.a.get(n)
    }

    pub fn b(&self, n: i64) -> Option<&Rat> {
        self.b.get(n)
    }

    pub fn a_seq(&self) -> &Seq {
        &self.a
    }

    pub fn b_seq(&self) -> &Seq {
        &self.b
    }

    /// Midpoint of the interval, the default gauge base point.
    pub fn midpoint(&self) -> i64 {
        let iv = self.interval();
        (iv.lo + iv.hi).div_euclid(2)
    }
}
