//! The monic polynomial family behind the closed heat-coefficient formula.
//!
//! `q_poly(beta, k)` is the monic degree-`k` polynomial
//!
//! ```text
//! Q^beta_k(z) = z^k + (beta - 2k) sum_{j=0}^{k-1} C(beta-2j-1, k-j-1) z^j / (k-j)
//! ```
//!
//! with binomials in the falling-factorial convention so that `beta` may be
//! any integer. `g_poly(k, d)` specializes it: `Q^d_{k/2}(z^2)` for even `k`
//! and `z Q^{d-1}_{(k-1)/2}(z^2)` for odd `k`, a monic polynomial of degree
//! `k` whose parity matches the parity of `k` and which depends on the two
//! lattice sites only through their difference `d = n - m`.

use crate::laurent::LaurentPoly;
use crate::rational::{binomial, Rat};

/// `Q^beta_k(z)` as an exact polynomial in `z`.
pub fn q_poly(beta: i64, k: usize) -> LaurentPoly {
    let k = k as i64;
    let mut p = LaurentPoly::monomial(k, Rat::one());
    let factor = Rat::from_int(beta - 2 * k);
    if factor.is_zero() {
        return p;
    }
    for j in 0..k {
        let c = binomial(beta - 2 * j - 1, k - j - 1) / Rat::from_int(k - j);
        p.set(j, &factor * &c);
    }
    p
}

/// Heat-coefficient weight polynomial of order `k` at diagonal offset
/// `d = n - m`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GPoly {
    pub k: usize,
    pub n_minus_m: i64,
    pub poly: LaurentPoly,
}

pub fn g_poly(k: usize, n_minus_m: i64) -> GPoly {
    let poly = if k % 2 == 0 {
        q_poly(n_minus_m, k / 2).stretch2()
    } else {
        q_poly(n_minus_m - 1, (k - 1) / 2).stretch2().shift(1)
    };
    debug_assert_eq!(poly.degree(), Some(k as i64));
    debug_assert!(poly.coeff(k as i64).is_one());
    GPoly {
        k,
        n_minus_m,
        poly,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    #[test]
    fn order_zero_is_one() {
        assert_eq!(q_poly(5, 0), LaurentPoly::one());
        assert_eq!(q_poly(-4, 0), LaurentPoly::one());
    }

    #[test]
    fn contiguous_shift_in_beta_by_two() {
        // Q^b_k(z) - z Q^{b-2}_{k-1}(z) = ((b - 2k)/k) C(b-1, k-1)
        let mut rng = rng_from_seed(51);
        for _ in 0..50 {
            let beta = rng.gen_range(-12i64..=12);
            let k = rng.gen_range(1usize..=9);
            let lhs = &q_poly(beta, k) - &q_poly(beta - 2, k - 1).shift(1);
            let c = Rat::from_int(beta - 2 * k as i64) / Rat::from_int(k as i64)
                * binomial(beta - 1, k as i64 - 1);
            assert_eq!(lhs, LaurentPoly::monomial(0, c), "beta={beta}, k={k}");
        }
    }

    #[test]
    fn contiguous_shift_in_beta_by_one() {
        // Q^b_k + Q^b_{k-1} - z Q^{b-1}_{k-1} = ((b - 2k + 1)/k) C(b, k-1)
        let mut rng = rng_from_seed(52);
        for _ in 0..50 {
            let beta = rng.gen_range(-12i64..=12);
            let k = rng.gen_range(1usize..=9);
            let lhs = &(&q_poly(beta, k) + &q_poly(beta, k - 1))
                - &q_poly(beta - 1, k - 1).shift(1);
            let c = Rat::from_int(beta - 2 * k as i64 + 1) / Rat::from_int(k as i64)
                * binomial(beta, k as i64 - 1);
            assert_eq!(lhs, LaurentPoly::monomial(0, c), "beta={beta}, k={k}");
        }
    }

    #[test]
    fn g_on_seed_line_is_pure_power() {
        // g_k at n = m + k is z^k
        for k in 1..=8usize {
            let g = g_poly(k, k as i64);
            assert_eq!(g.poly, LaurentPoly::monomial(k as i64, Rat::one()), "k={k}");
        }
    }

    #[test]
    fn odd_order_shift_identity() {
        // g_k(n, m) = z g_{k-1}(n-1, m) for odd k
        for d in -6i64..=6 {
            for k in [1usize, 3, 5, 7] {
                let lhs = g_poly(k, d).poly;
                let rhs = g_poly(k - 1, d - 1).poly.shift(1);
                assert_eq!(lhs, rhs, "k={k}, d={d}");
            }
        }
    }

    #[test]
    fn even_order_shift_identity() {
        // g_k(n, m) - z^2 g_{k-2}(n-2, m) = (2(n-m-k)/k) C(n-m-1, k/2-1), k even
        for d in -6i64..=6 {
            for k in [2usize, 4, 6, 8] {
                let lhs = &g_poly(k, d).poly - &g_poly(k - 2, d - 2).poly.shift(2);
                let c = Rat::from_int(2 * (d - k as i64)) / Rat::from_int(k as i64)
                    * binomial(d - 1, k as i64 / 2 - 1);
                assert_eq!(lhs, LaurentPoly::monomial(0, c), "k={k}, d={d}");
            }
        }
    }

    #[test]
    fn parity_structure() {
        for k in 0..=9usize {
            let g = g_poly(k, 3);
            for (e, _) in g.poly.terms() {
                assert_eq!(e.rem_euclid(2), (k as i64).rem_euclid(2), "k={k}");
            }
        }
    }

    #[test]
    fn first_subdiagonal_closed_form() {
        // g_{k+1}(n, n-1) = z^{k+1}
        //   + k sum_{i=1}^{floor((k+1)/2)} ((-1)^i / i) C(k-i-1, i-1) z^{k+1-2i}
        for k in 0..=10i64 {
            let g = g_poly((k + 1) as usize, 1).poly;
            let mut expect = LaurentPoly::monomial(k + 1, Rat::one());
            for i in 1..=(k + 1) / 2 {
                let sign = if i % 2 == 0 { Rat::one() } else { -Rat::one() };
                let c = Rat::from_int(k) * sign / Rat::from_int(i) * binomial(k - i - 1, i - 1);
                let cur = expect.coeff(k + 1 - 2 * i) + c;
                expect.set(k + 1 - 2 * i, cur);
            }
            assert_eq!(g, expect, "k={k}");
        }
    }

    #[test]
    fn diagonal_closed_form() {
        // g_k(n-1, n-1) = z^k
        //   + k sum_{i=1}^{floor((k+1)/2)} ((-1)^i / i) C(k-i-1, i-1) z^{k-2i}
        //   + delta_{k,1}/z
        for k in 1..=10i64 {
            let g = g_poly(k as usize, 0).poly;
            let mut expect = LaurentPoly::monomial(k, Rat::one());
            for i in 1..=(k + 1) / 2 {
                let sign = if i % 2 == 0 { Rat::one() } else { -Rat::one() };
                let c = Rat::from_int(k) * sign / Rat::from_int(i) * binomial(k - i - 1, i - 1);
                let cur = expect.coeff(k - 2 * i) + c;
                expect.set(k - 2 * i, cur);
            }
            if k == 1 {
                let cur = expect.coeff(-1) + Rat::one();
                expect.set(-1, cur);
            }
            assert_eq!(g, expect, "k={k}");
        }
    }
}
