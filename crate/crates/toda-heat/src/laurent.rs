//! Exact Laurent polynomials in one variable.
//!
//! Coefficients live in a `BTreeMap<i64, Rat>` keyed by exponent; zero
//! coefficients are never stored, so the zero polynomial is the empty map and
//! degree queries return `None` instead of a sentinel. Substitution
//! `x -> 1/x` is exact (exponent negation), which makes the symmetric /
//! antisymmetric split under that involution a finite computation.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::rational::Rat;

/// Laurent polynomial with rational coefficients and finite support.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i64, Rat>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly { coeffs: BTreeMap::new() }
    }

    pub fn one() -> Self {
        LaurentPoly::monomial(0, Rat::one())
    }

    /// The monomial `c * x^e`.
    pub fn monomial(e: i64, c: Rat) -> Self {
        let mut p = LaurentPoly::zero();
        p.set(e, c);
        p
    }

    /// `x + 1/x`, the symmetric generator.
    pub fn u() -> Self {
        let mut p = LaurentPoly::zero();
        p.set(1, Rat::one());
        p.set(-1, Rat::one());
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, Rat)>>(terms: I) -> Self {
        let mut p = LaurentPoly::zero();
        for (e, c) in terms {
            let cur = p.coeff(e) + c;
            p.set(e, cur);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, e: i64) -> Rat {
        self.coeffs.get(&e).cloned().unwrap_or_else(Rat::zero)
    }

    /// Set the coefficient of `x^e`, removing the entry when it is zero.
    pub fn set(&mut self, e: i64, c: Rat) {
        if c.is_zero() {
            self.coeffs.remove(&e);
        } else {
            self.coeffs.insert(e, c);
        }
    }

    /// Highest exponent with nonzero coefficient; `None` for the zero poly.
    pub fn degree(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// Lowest exponent with nonzero coefficient; `None` for the zero poly.
    pub fn valuation(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rat)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return LaurentPoly::zero();
        }
        LaurentPoly {
            coeffs: self.coeffs.iter().map(|(e, v)| (*e, v * c)).collect(),
        }
    }

    /// Multiply by the monomial `x^e`.
    pub fn shift(&self, e: i64) -> Self {
        LaurentPoly {
            coeffs: self.coeffs.iter().map(|(k, v)| (k + e, v.clone())).collect(),
        }
    }

    /// Substitute `x -> 1/x`.
    pub fn reflect(&self) -> Self {
        LaurentPoly {
            coeffs: self.coeffs.iter().map(|(k, v)| (-k, v.clone())).collect(),
        }
    }

    /// Substitute `x -> x^2`.
    pub fn stretch2(&self) -> Self {
        LaurentPoly {
            coeffs: self.coeffs.iter().map(|(k, v)| (2 * k, v.clone())).collect(),
        }
    }

    /// Evaluate at a nonzero rational point.
    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for (e, c) in &self.coeffs {
            acc += c * &x.pow(*e as i32);
        }
        acc
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = LaurentPoly::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Substitute `x = a + y` where `self` must be an ordinary polynomial
    /// (no negative exponents); returns the coefficients in `y`.
    pub fn taylor_shift(&self, a: &Rat) -> Self {
        assert!(
            self.valuation().map_or(true, |v| v >= 0),
            "taylor_shift needs a polynomial"
        );
        let mut out = LaurentPoly::zero();
        // Horner in (a + y).
        let deg = match self.degree() {
            None => return out,
            Some(d) => d,
        };
        for e in (0..=deg).rev() {
            // out = out * (a + y) + coeff(e)
            let mut next = LaurentPoly::zero();
            for (k, c) in out.terms() {
                let t = next.coeff(k) + c * a;
                next.set(k, t);
                let t = next.coeff(k + 1) + c.clone();
                next.set(k + 1, t);
            }
            let t = next.coeff(0) + self.coeff(e);
            next.set(0, t);
            out = next;
        }
        out
    }

    /// Exact division; `None` when the remainder is nonzero.
    pub fn div_exact(&self, d: &LaurentPoly) -> Option<LaurentPoly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(LaurentPoly::zero());
        }
        let vn = self.valuation().unwrap();
        let vd = d.valuation().unwrap();
        // Shift both to plain polynomials with nonzero constant term.
        let mut rem = self.shift(-vn);
        let den = d.shift(-vd);
        let dd = den.degree().unwrap();
        let lead = den.coeff(dd);
        let mut quo = LaurentPoly::zero();
        while let Some(dr) = rem.degree() {
            if dr < dd {
                return None;
            }
            let q = rem.coeff(dr) / lead.clone();
            quo.set(dr - dd, q.clone());
            rem = &rem - &den.shift(dr - dd).scale(&q);
        }
        Some(quo.shift(vn - vd))
    }

    /// Split under `x -> 1/x`: returns `(P, r)` with `self = P(u) + r`,
    /// `P` a polynomial in `u = x + 1/x` (given by its coefficient list in
    /// `u`), and `r(1/x) = -r(x)`. The split is exact and unique.
    pub fn symmetric_decompose(&self) -> (UPoly, LaurentPoly) {
        let refl = self.reflect();
        let half = Rat::new(1, 2);
        let sym = (self + &refl).scale(&half);
        let anti = (self - &refl).scale(&half);
        let p = UPoly::from_symmetric(&sym).expect("symmetric part must be a polynomial in u");
        (p, anti)
    }

    /// Evaluate a polynomial-in-u expression: substitute `u = x + 1/x`.
    pub fn expand_in_u(upoly: &UPoly) -> LaurentPoly {
        let u = LaurentPoly::u();
        let mut acc = LaurentPoly::zero();
        for (j, c) in upoly.0.terms() {
            debug_assert!(j >= 0);
            acc = &acc + &u.pow(j as u32).scale(c);
        }
        acc
    }
}

/// Polynomial in the symmetric variable `u = x + 1/x`, stored by its
/// coefficients in `u`. A newtype keeps `u`-space and `x`-space from mixing.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct UPoly(pub LaurentPoly);

impl UPoly {
    pub fn zero() -> Self {
        UPoly(LaurentPoly::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn monomial(e: i64, c: Rat) -> Self {
        assert!(e >= 0);
        UPoly(LaurentPoly::monomial(e, c))
    }

    /// Rewrite a symmetric Laurent polynomial as a polynomial in `u`.
    /// Returns `None` if the input is not symmetric.
    pub fn from_symmetric(h: &LaurentPoly) -> Option<UPoly> {
        if h != &h.reflect() {
            return None;
        }
        let mut rem = h.clone();
        let mut out = LaurentPoly::zero();
        let u = LaurentPoly::u();
        while let Some(d) = rem.degree() {
            if d == 0 {
                let c = out.coeff(0) + rem.coeff(0);
                out.set(0, c);
                break;
            }
            let c = rem.coeff(d);
            out.set(d, c.clone());
            rem = &rem - &u.pow(d as u32).scale(&c);
        }
        Some(UPoly(out))
    }

    pub fn expand(&self) -> LaurentPoly {
        LaurentPoly::expand_in_u(self)
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            let v = out.coeff(e) + c.clone();
            out.set(e, v);
        }
        out
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            let v = out.coeff(e) - c.clone();
            out.set(e, v);
        }
        out
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (e1, c1) in self.terms() {
            for (e2, c2) in rhs.terms() {
                let v = out.coeff(e1 + e2) + c1 * c2;
                out.set(e1 + e2, v);
            }
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.coeffs.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match e {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*x")?,
                _ => write!(f, "{c}*x^{e}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Debug for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u-poly[{}]", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_poly() -> impl Strategy<Value = LaurentPoly> {
        proptest::collection::vec((-6i64..=6, -9i64..=9), 0..8).prop_map(|terms| {
            LaurentPoly::from_terms(terms.into_iter().map(|(e, c)| (e, Rat::from_int(c))))
        })
    }

    proptest! {
        #[test]
        fn decompose_recombines(h in arb_poly()) {
            let (p, r) = h.symmetric_decompose();
            let back = &p.expand() + &r;
            prop_assert_eq!(back, h.clone());
            prop_assert_eq!(r.reflect(), -&r);
        }

        #[test]
        fn div_exact_inverts_mul(a in arb_poly(), b in arb_poly()) {
            prop_assume!(!b.is_zero());
            let prod = &a * &b;
            let q = prod.div_exact(&b).expect("product must divide");
            prop_assert_eq!(q, a);
        }
    }

    #[test]
    fn decompose_symmetric_input() {
        let h = LaurentPoly::u();
        let (p, r) = h.symmetric_decompose();
        assert!(r.is_zero());
        assert_eq!(p.expand(), h);
        assert_eq!(p.0.coeff(1), Rat::one());
    }

    #[test]
    fn decompose_antisymmetric_input() {
        let h = LaurentPoly::from_terms([(1, Rat::one()), (-1, -Rat::one())]);
        let (p, r) = h.symmetric_decompose();
        assert!(p.is_zero());
        assert_eq!(r, h);
    }

    #[test]
    fn taylor_shift_matches_eval() {
        // p(x) = x^3 - 2x + 5 shifted to x = 2 + y.
        let p = LaurentPoly::from_terms([
            (3, Rat::one()),
            (1, Rat::from_int(-2)),
            (0, Rat::from_int(5)),
        ]);
        let q = p.taylor_shift(&Rat::from_int(2));
        for y in -3..=3 {
            let lhs = q.eval(&Rat::from_int(y));
            let rhs = p.eval(&Rat::from_int(2 + y));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn degree_of_zero_is_none() {
        assert_eq!(LaurentPoly::zero().degree(), None);
        assert_eq!(LaurentPoly::zero().valuation(), None);
    }
}
