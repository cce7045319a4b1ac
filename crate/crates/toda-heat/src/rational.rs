//! Arbitrary-precision rational numbers and the small combinatorial helpers
//! used throughout the crate.
//!
//! `Rat` wraps `num_rational::BigRational`, which keeps values reduced with a
//! positive denominator. All arithmetic is exact; nothing in the algebraic
//! layer ever rounds. The textual form is `p/q` (or just `p` when q = 1) and
//! is what the JSON emitters use.

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Exact rational number in canonical reduced form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    /// Build `num/den`. Panics if `den` is zero.
    pub fn new(num: i64, den: i64) -> Self {
        Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Self {
        Rat(BigRational::new(num, den))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Self {
        Rat(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "division by zero rational");
        Rat(self.0.clone().recip())
    }

    pub fn pow(&self, exp: i32) -> Self {
        if exp == 0 {
            return Rat::one();
        }
        if exp < 0 {
            return self.recip().pow(-exp);
        }
        let mut acc = Rat::one();
        for _ in 0..exp {
            acc *= self.clone();
        }
        acc
    }

    /// Round to `f64`. Large numerators and denominators are rescaled by a
    /// common power of two first so that neither conversion overflows.
    pub fn to_f64(&self) -> f64 {
        let num = self.0.numer();
        let den = self.0.denom();
        let shift = num.bits().max(den.bits()).saturating_sub(900);
        let num = num >> shift;
        let den = den >> shift;
        let n = num.to_f64().unwrap_or(f64::NAN);
        let d = den.to_f64().unwrap_or(f64::NAN);
        n / d
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

// Debug delegates to Display: `3/7` reads better than a struct dump in
// test failure output.
impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((a, b)) => (a, b),
            None => (s, "1"),
        };
        let num = BigInt::from_str(num.trim()).map_err(|e| format!("bad numerator {num:?}: {e}"))?;
        let den = BigInt::from_str(den.trim()).map_err(|e| format!("bad denominator {den:?}: {e}"))?;
        if den.is_zero() {
            return Err("zero denominator".into());
        }
        Ok(Rat(BigRational::new(num, den)))
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::from_int(n)
    }
}

impl From<BigInt> for Rat {
    fn from(n: BigInt) -> Self {
        Rat(BigRational::from_integer(n))
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat(self.0.$method(rhs.0))
            }
        }
        impl $trait<&Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<&Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat(self.0.$method(&rhs.0))
            }
        }
        impl $trait<Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((&self.0).$method(rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

impl Div for Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rat(self.0 / rhs.0)
    }
}

impl Div<&Rat> for &Rat {
    type Output = Rat;
    fn div(self, rhs: &Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rat(&self.0 / &rhs.0)
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl AddAssign for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        self.0 += rhs.0;
    }
}

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl SubAssign for Rat {
    fn sub_assign(&mut self, rhs: Rat) {
        self.0 -= rhs.0;
    }
}

impl MulAssign for Rat {
    fn mul_assign(&mut self, rhs: Rat) {
        self.0 *= rhs.0;
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |a, b| a + b)
    }
}

impl Product for Rat {
    fn product<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::one(), |a, b| a * b)
    }
}

/// `n!` as a big integer.
pub fn factorial(n: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n as i64 {
        acc *= i;
    }
    acc
}

/// Double factorial `n!! = n (n-2) (n-4) ...`, with `(-1)!! = 0!! = 1`.
pub fn double_factorial(n: i64) -> BigInt {
    let mut acc = BigInt::one();
    let mut i = n;
    while i >= 2 {
        acc *= i;
        i -= 2;
    }
    acc
}

/// Binomial coefficient in the falling-factorial convention:
/// `C(x, r) = x (x-1) ... (x-r+1) / r!` for any integer `x`, including
/// negative values. `C(x, r) = 0` for `r < 0`.
pub fn binomial(x: i64, r: i64) -> Rat {
    if r < 0 {
        return Rat::zero();
    }
    let mut num = BigInt::one();
    for i in 0..r {
        num *= x - i;
    }
    Rat::from_big(num, factorial(r as u32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_rat() -> impl Strategy<Value = Rat> {
        (-50i64..=50, 1i64..=30).prop_map(|(n, d)| Rat::new(n, d))
    }

    fn arb_nonzero_rat() -> impl Strategy<Value = Rat> {
        ((1i64..=50), (1i64..=30), proptest::bool::ANY)
            .prop_map(|(n, d, neg)| if neg { -Rat::new(n, d) } else { Rat::new(n, d) })
    }

    proptest! {
        #[test]
        fn mul_inverse(a in arb_nonzero_rat(), b in arb_nonzero_rat()) {
            let q = &a / &b;
            let r = &b / &a;
            prop_assert_eq!(q * r, Rat::one());
        }

        #[test]
        fn distributivity(a in arb_rat(), b in arb_rat(), c in arb_rat()) {
            let lhs = &a * &(&b + &c);
            let rhs = &(&a * &b) + &(&a * &c);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn display_round_trip(a in arb_rat()) {
            let s = a.to_string();
            let back: Rat = s.parse().unwrap();
            prop_assert_eq!(a, back);
        }
    }

    #[test]
    fn canonical_form() {
        let r = Rat::new(6, -4);
        assert_eq!(r.to_string(), "-3/2");
        assert_eq!(Rat::new(5, 1).to_string(), "5");
    }

    #[test]
    fn binomial_negative_upper() {
        // C(-1, r) = (-1)^r under the falling-factorial convention.
        for r in 0..8 {
            let expect = if r % 2 == 0 { Rat::one() } else { -Rat::one() };
            assert_eq!(binomial(-1, r), expect);
        }
        assert_eq!(binomial(-3, 2), Rat::from_int(6));
        assert_eq!(binomial(4, 2), Rat::from_int(6));
        assert_eq!(binomial(3, 5), Rat::zero());
        assert_eq!(binomial(5, -1), Rat::zero());
    }

    #[test]
    fn double_factorial_values() {
        assert_eq!(double_factorial(-1), BigInt::from(1));
        assert_eq!(double_factorial(0), BigInt::from(1));
        assert_eq!(double_factorial(5), BigInt::from(15));
        assert_eq!(double_factorial(6), BigInt::from(48));
    }

    #[test]
    fn to_f64_handles_big_values() {
        let mut r = Rat::new(1, 3);
        for _ in 0..200 {
            r = &r * &Rat::new(1000, 7);
        }
        let f = r.to_f64();
        assert!(f.is_finite() || f == f64::INFINITY);
        assert_eq!(Rat::new(1, 4).to_f64(), 0.25);
    }
}
