//! Truncated Laurent series and formal power series.
//!
//! A `TruncatedLaurentSeries` stores exponents `top, top-1, ..., top-K+1`;
//! exponents above `top` are structurally zero, exponents below the tracked
//! range are unknown. Every operation propagates the guaranteed-valid depth
//! pessimistically and refuses to report coefficients below it — silent depth
//! loss, not wrong arithmetic, is the main hazard of a truncated calculus.

use crate::error::{Error, Result};
use crate::laurent::LaurentPoly;
use crate::rational::Rat;

/// Laurent series known on a contiguous exponent range `[top-K+1, top]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TruncatedLaurentSeries {
    top: i64,
    /// coeffs[i] is the coefficient of `x^(top - i)`.
    coeffs: Vec<Rat>,
}

impl TruncatedLaurentSeries {
    pub fn new(top: i64, coeffs: Vec<Rat>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least one tracked coefficient");
        TruncatedLaurentSeries { top, coeffs }
    }

    /// Truncate an exact Laurent polynomial to the range `[top-depth+1, top]`.
    /// `top` must be at least the polynomial's degree.
    pub fn from_poly(p: &LaurentPoly, top: i64, depth: usize) -> Self {
        assert!(p.degree().map_or(true, |d| d <= top));
        let coeffs = (0..depth as i64).map(|i| p.coeff(top - i)).collect();
        TruncatedLaurentSeries::new(top, coeffs)
    }

    pub fn top(&self) -> i64 {
        self.top
    }

    pub fn depth(&self) -> usize {
        self.coeffs.len()
    }

    /// Lowest exponent whose coefficient is guaranteed.
    pub fn valid_down_to(&self) -> i64 {
        self.top - self.coeffs.len() as i64 + 1
    }

    /// Coefficient of `x^e`; exponents above `top` are zero, exponents below
    /// the tracked depth are an error.
    pub fn coeff(&self, e: i64) -> Result<Rat> {
        if e > self.top {
            return Ok(Rat::zero());
        }
        if e < self.valid_down_to() {
            return Err(Error::DepthInsufficient {
                wanted: e,
                valid_down_to: self.valid_down_to(),
            });
        }
        Ok(self.coeffs[(self.top - e) as usize].clone())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let top = self.top.max(rhs.top);
        let down = self.valid_down_to().max(rhs.valid_down_to());
        let depth = (top - down + 1).max(1) as usize;
        let coeffs = (0..depth as i64)
            .map(|i| {
                let e = top - i;
                self.coeff(e).unwrap() + rhs.coeff(e).unwrap()
            })
            .collect();
        TruncatedLaurentSeries::new(top, coeffs)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        TruncatedLaurentSeries::new(self.top, self.coeffs.iter().map(|v| v * c).collect())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rat::one())
    }

    /// Product. With depths `d1`, `d2` the result depth is `min(d1, d2)`:
    /// the coefficient of `(t1 + t2) - r` involves unknown coefficients as
    /// soon as `r` reaches the shallower operand's depth.
    pub fn mul(&self, rhs: &Self) -> Self {
        let top = self.top + rhs.top;
        let depth = self.depth().min(rhs.depth());
        let mut coeffs = vec![Rat::zero(); depth];
        for (i, a) in self.coeffs.iter().enumerate().take(depth) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if i + j >= depth {
                    break;
                }
                coeffs[i + j] += a * b;
            }
        }
        TruncatedLaurentSeries::new(top, coeffs)
    }

    /// Reciprocal of a series with nonzero leading coefficient, to the same
    /// depth.
    pub fn reciprocal(&self) -> Result<Self> {
        let lead = &self.coeffs[0];
        if lead.is_zero() {
            return Err(Error::ZeroLeadingCoefficient);
        }
        let inv_lead = lead.recip();
        let mut out = vec![Rat::zero(); self.depth()];
        out[0] = inv_lead.clone();
        for r in 1..self.depth() {
            // convolution of (self * out) at offset r must vanish
            let mut acc = Rat::zero();
            for i in 1..=r {
                acc += &self.coeffs[i] * &out[r - i];
            }
            out[r] = -(acc * inv_lead.clone());
        }
        Ok(TruncatedLaurentSeries::new(-self.top, out))
    }

    /// Multiply by `x^e`.
    pub fn shift(&self, e: i64) -> Self {
        TruncatedLaurentSeries::new(self.top + e, self.coeffs.clone())
    }
}

/// Coefficient of `x^{-1}`, the formal residue.
pub fn residue_z(s: &TruncatedLaurentSeries) -> Result<Rat> {
    s.coeff(-1)
}

/// Formal power series `c_0 + c_1 w + ... + c_K w^K` in an auxiliary
/// variable, truncated at a fixed depth.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PowerSeries {
    pub coeffs: Vec<Rat>,
}

impl PowerSeries {
    pub fn new(coeffs: Vec<Rat>) -> Self {
        assert!(!coeffs.is_empty());
        PowerSeries { coeffs }
    }

    pub fn constant(c: Rat, depth: usize) -> Self {
        let mut coeffs = vec![Rat::zero(); depth];
        coeffs[0] = c;
        PowerSeries::new(coeffs)
    }

    /// Truncate a polynomial (nonnegative exponents only) to `depth` terms.
    pub fn from_poly(p: &LaurentPoly, depth: usize) -> Self {
        assert!(p.valuation().map_or(true, |v| v >= 0), "needs a polynomial");
        PowerSeries::new((0..depth as i64).map(|i| p.coeff(i)).collect())
    }

    pub fn depth(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let depth = self.depth().min(rhs.depth());
        PowerSeries::new((0..depth).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let depth = self.depth().min(rhs.depth());
        PowerSeries::new((0..depth).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let depth = self.depth().min(rhs.depth());
        let mut out = vec![Rat::zero(); depth];
        for i in 0..depth {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..depth - i {
                out[i + j] += &self.coeffs[i] * &rhs.coeffs[j];
            }
        }
        PowerSeries::new(out)
    }

    /// Reciprocal; requires a nonzero constant term.
    pub fn reciprocal(&self) -> Result<Self> {
        if self.coeffs[0].is_zero() {
            return Err(Error::ZeroLeadingCoefficient);
        }
        let inv0 = self.coeffs[0].recip();
        let mut out = vec![Rat::zero(); self.depth()];
        out[0] = inv0.clone();
        for r in 1..self.depth() {
            let mut acc = Rat::zero();
            for i in 1..=r {
                acc += &self.coeffs[i] * &out[r - i];
            }
            out[r] = -(acc * inv0.clone());
        }
        Ok(PowerSeries::new(out))
    }
}

/// Formal square root of a power series with constant term 1, found by the
/// recursion `2 s_0 s_r = p_r - sum_{0 < i < r} s_i s_{r-i}`.
pub fn formal_sqrt(p: &PowerSeries) -> Result<PowerSeries> {
    if !p.coeffs[0].is_one() {
        return Err(Error::ConstantTermNotOne {
            found: p.coeffs[0].to_string(),
        });
    }
    let mut s = vec![Rat::zero(); p.depth()];
    s[0] = Rat::one();
    let half = Rat::new(1, 2);
    for r in 1..p.depth() {
        let mut acc = p.coeffs[r].clone();
        for i in 1..r {
            acc -= &s[i] * &s[r - i];
        }
        s[r] = acc * half.clone();
    }
    Ok(PowerSeries::new(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(top: i64, ints: &[i64]) -> TruncatedLaurentSeries {
        TruncatedLaurentSeries::new(top, ints.iter().map(|&c| Rat::from_int(c)).collect())
    }

    #[test]
    fn residue_reads_off_coefficient() {
        // z^2 + 3 + 5/z
        let s = series(2, &[1, 0, 3, 5]);
        assert_eq!(residue_z(&s).unwrap(), Rat::from_int(5));
        // z alone: tracked down to z^1 only, so the residue is below depth
        let s = series(1, &[1]);
        assert!(matches!(residue_z(&s), Err(Error::DepthInsufficient { .. })));
        // z tracked deep enough has residue 0
        let s = series(1, &[1, 0, 0, 0]);
        assert_eq!(residue_z(&s).unwrap(), Rat::zero());
    }

    #[test]
    fn depth_tracking_in_products() {
        let a = series(0, &[1, 2, 3]);
        let b = series(1, &[1, 1]);
        let p = a.mul(&b);
        assert_eq!(p.top(), 1);
        assert_eq!(p.depth(), 2);
        assert_eq!(p.coeff(1).unwrap(), Rat::one());
        assert_eq!(p.coeff(0).unwrap(), Rat::from_int(3));
        assert!(p.coeff(-1).is_err());
    }

    proptest! {
        #[test]
        fn reciprocal_multiplies_to_one(
            top in -3i64..=3,
            lead in 1i64..=5,
            tail in proptest::collection::vec(-4i64..=4, 1..6),
        ) {
            let mut coeffs = vec![Rat::from_int(lead)];
            coeffs.extend(tail.iter().map(|&c| Rat::from_int(c)));
            let s = TruncatedLaurentSeries::new(top, coeffs);
            let inv = s.reciprocal().unwrap();
            let prod = s.mul(&inv);
            prop_assert_eq!(prod.coeff(0).unwrap(), Rat::one());
            for e in (prod.valid_down_to())..0 {
                prop_assert_eq!(prod.coeff(e).unwrap(), Rat::zero());
            }
        }

        #[test]
        fn sqrt_squares_back(tail in proptest::collection::vec((-5i64..=5, 1i64..=4), 1..8)) {
            let mut coeffs = vec![Rat::one()];
            coeffs.extend(tail.iter().map(|&(n, d)| Rat::new(n, d)));
            let p = PowerSeries::new(coeffs);
            let s = formal_sqrt(&p).unwrap();
            prop_assert_eq!(s.mul(&s), p);
        }
    }

    #[test]
    fn sqrt_of_perfect_square() {
        // 1 + 2w + w^2 -> 1 + w
        let p = PowerSeries::new(vec![Rat::one(), Rat::from_int(2), Rat::one(), Rat::zero()]);
        let s = formal_sqrt(&p).unwrap();
        assert_eq!(
            s.coeffs,
            vec![Rat::one(), Rat::one(), Rat::zero(), Rat::zero()]
        );
        // sqrt(1) = 1
        let one = PowerSeries::constant(Rat::one(), 4);
        assert_eq!(formal_sqrt(&one).unwrap(), one);
    }

    #[test]
    fn sqrt_rejects_bad_constant_term() {
        let p = PowerSeries::new(vec![Rat::from_int(4), Rat::one()]);
        assert!(matches!(formal_sqrt(&p), Err(Error::ConstantTermNotOne { .. })));
    }

    #[test]
    fn sqrt_of_free_operator_symbol() {
        // q(w) for a = 1, b = 0 is (1 - w^2)^2; its square root is 1 - w^2.
        let q = PowerSeries::new(vec![
            Rat::one(),
            Rat::zero(),
            Rat::from_int(-2),
            Rat::zero(),
            Rat::one(),
            Rat::zero(),
        ]);
        let s = formal_sqrt(&q).unwrap();
        let expect = PowerSeries::new(vec![
            Rat::one(),
            Rat::zero(),
            -Rat::one(),
            Rat::zero(),
            Rat::zero(),
            Rat::zero(),
        ]);
        assert_eq!(s, expect);
    }
}
