//! Toda vector fields, heat-coefficient fields, and their recombinations.
//!
//! A vector field value is the instantaneous pair `(db, da)` of derivatives
//! of the window data under a flow; no flow is ever integrated in time.
//! `toda_field` evaluates `X_k = [(L^k)_+, L]` both as an operator bracket
//! and through wave-function pairings (the `r`/`l` residues of the powers of
//! `L`); the two routes must agree exactly. `heat_field` evaluates the
//! hierarchy generated by the diagonal heat coefficients,
//!
//! ```text
//! db_n = alpha_{k+1}(n+1, n) - alpha_{k+1}(n, n-1)
//! da_n = a_n (alpha_k(n, n) - alpha_k(n-1, n-1)),
//! ```
//!
//! and the basis-change maps between the two hierarchies are exact rational
//! coefficient lists. The stationarity combinations `Y_k` detect the
//! bispectral Darboux operators: `Y_k` vanishes identically on them for all
//! `k` past a threshold, and generically does not vanish elsewhere.

use crate::alpha::{alpha_recurrence, required_window, Region};
use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, UPoly};
use crate::operator::{operator_power, BandedOperator};
use crate::rational::{binomial, double_factorial, factorial, Rat};
use crate::sequence::{Interval, Seq};
use crate::wave::{build_wave_table, WaveTable};
use crate::window::Window;

/// Instantaneous value of a vector field on a window: `db` and `da` on
/// explicit intervals.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VectorFieldValue {
    pub db: Seq,
    pub da: Seq,
}

impl VectorFieldValue {
    pub fn is_zero(&self) -> bool {
        self.db.is_zero() && self.da.is_zero()
    }

    pub fn scale(&self, c: &Rat) -> Self {
        VectorFieldValue {
            db: self.db.scale(c),
            da: self.da.scale(c),
        }
    }

    /// Pointwise sum on the intersection of intervals.
    pub fn add(&self, other: &Self) -> Self {
        VectorFieldValue {
            db: self.db.zip_with(&other.db, |x, y| x + y),
            da: self.da.zip_with(&other.da, |x, y| x + y),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        VectorFieldValue {
            db: self.db.sub(&other.db),
            da: self.da.sub(&other.da),
        }
    }

    /// Equality on the intersection of intervals; the intersection must be
    /// nonempty on both components.
    pub fn eq_on_common(&self, other: &Self) -> bool {
        let (ok_b, iv_b) = self.db.eq_on_common(&other.db);
        let (ok_a, iv_a) = self.da.eq_on_common(&other.da);
        ok_b && ok_a && !iv_b.is_empty() && !iv_a.is_empty()
    }

    /// Exact linear combination of field values, on common intervals.
    pub fn linear_combination(terms: &[(Rat, VectorFieldValue)]) -> Option<Self> {
        let mut iter = terms.iter();
        let (c0, v0) = iter.next()?;
        let mut acc = v0.scale(c0);
        for (c, v) in iter {
            acc = acc.add(&v.scale(c));
        }
        Some(acc)
    }
}

/// `X_k(L) = [(L^k)_+, L]`, read off the bracket: `db` is the coefficient of
/// `E^0`, `da` the coefficient of `E^{-1}`.
pub fn toda_field(w: &Window, k: u32) -> Result<VectorFieldValue> {
    let lk = operator_power(w, k)?;
    let l = BandedOperator::from_window(w);
    let bracket = lk.positive_part().commutator(&l)?;
    // the bracket is supported on offsets 0 and -1 only
    if let Some((lo, hi)) = bracket.pruned().support() {
        debug_assert!(lo >= -1 && hi <= 0, "unexpected bracket support");
    }
    let iv = bracket.common_interval();
    let db = match bracket.coeff(0) {
        Some(s) => s.clone(),
        None => Seq::constant(Rat::zero(), iv),
    };
    let da = match bracket.coeff(-1) {
        Some(s) => s.clone(),
        None => Seq::constant(Rat::zero(), iv),
    };
    Ok(VectorFieldValue { db, da })
}

/// The same field through wave-function pairings: with
/// `r_k(n) = conv_{k+1}(n, n)` and `l_k(n) = conv_k(n-1, n)`,
/// `db_n = r_k(n+1) - r_k(n)` and `da_n = a_n (l_k(n+1) - l_k(n))`.
pub fn toda_field_residue(w: &Window, k: u32) -> Result<VectorFieldValue> {
    let table = build_wave_table(w, k as usize + 1, w.midpoint())?;
    toda_field_from_table(w, &table, k)
}

pub fn toda_field_from_table(w: &Window, t: &WaveTable, k: u32) -> Result<VectorFieldValue> {
    let k = k as usize;
    if t.order() < k + 1 {
        return Err(Error::OrderInsufficient {
            need: k + 1,
            have: t.order(),
        });
    }
    let r_of = |n: i64| t.pair_convolution(n, n, k + 1);
    let l_of = |n: i64| t.pair_convolution(n - 1, n, k);
    // validity: r needs psi_i(n), psi*_j(n) to order k+1; derive by probing
    let psi_iv = t.psi_interval(k + 1);
    let star_iv = t.psi_star_interval(k + 1);
    let r_iv = psi_iv.intersect(&star_iv);
    let db_iv = r_iv.intersect(&r_iv.translate(-1));
    if db_iv.is_empty() {
        return Err(Error::EmptyInterior("toda field via pairings".into()));
    }
    let db = Seq::tabulate(db_iv, |n| r_of(n + 1).unwrap() - r_of(n).unwrap());
    let l_iv = psi_iv.translate(1).intersect(&star_iv);
    let da_iv = l_iv
        .intersect(&l_iv.translate(-1))
        .intersect(&w.interval());
    if da_iv.is_empty() {
        return Err(Error::EmptyInterior("toda field via pairings".into()));
    }
    let da = Seq::tabulate(da_iv, |n| {
        w.a(n).unwrap() * (l_of(n + 1).unwrap() - l_of(n).unwrap())
    });
    Ok(VectorFieldValue { db, da })
}

/// Sites where the heat-coefficient table of order `k` at diagonal offset
/// `d` (points `(t, t-d)`) fits inside the window.
fn usable_sites(w: &Window, d: i64, k: usize) -> Interval {
    let cone = required_window(&Region::single(0, -d), k);
    if cone.is_empty() {
        return w.interval();
    }
    let iv = w.interval();
    Interval::new(iv.lo - cone.lo, iv.hi - cone.hi)
}

/// The heat-coefficient field of order `k` on the largest computable
/// interval.
pub fn heat_field(w: &Window, k: u32) -> Result<VectorFieldValue> {
    let k = k as usize;
    // db at n needs alpha_{k+1} at (n+1, n) and (n, n-1); da at n needs
    // alpha_k at (n, n) and (n-1, n-1) plus a_n.
    let sub = usable_sites(w, 1, k + 1);
    let db_iv = sub.intersect(&sub.translate(-1));
    let diag = usable_sites(w, 0, k);
    let da_iv = diag
        .intersect(&diag.translate(1))
        .intersect(&w.interval());
    if db_iv.is_empty() || da_iv.is_empty() {
        return Err(Error::EmptyInterior(format!(
            "heat field of order {k} on window {}",
            w.interval()
        )));
    }
    // the subdiagonal needs one order more than the diagonal, so the two
    // point families get separate tables
    let sub_region = Region::from_points(db_iv.iter().flat_map(|n| [(n + 1, n), (n, n - 1)]));
    let diag_region =
        Region::from_points(da_iv.iter().flat_map(|n| [(n, n), (n - 1, n - 1)]));
    let sub_table = alpha_recurrence(w, k + 1, &sub_region)?;
    let diag_table = alpha_recurrence(w, k, &diag_region)?;
    let db = Seq::tabulate(db_iv, |n| {
        sub_table.get(k + 1, n + 1, n).unwrap() - sub_table.get(k + 1, n, n - 1).unwrap()
    });
    let da = Seq::tabulate(da_iv, |n| {
        w.a(n).unwrap()
            * &(diag_table.get(k, n, n).unwrap() - diag_table.get(k, n - 1, n - 1).unwrap())
    });
    Ok(VectorFieldValue { db, da })
}

/// Coefficients expressing the heat field in the Toda basis:
/// `X'_k = k sum_i ((-1)^i / (k - 2i)) C(k-i-1, i) X_{k-2i}`.
pub fn xprime_from_x(k: u32) -> Vec<(u32, Rat)> {
    let k = k as i64;
    let mut out = Vec::new();
    for i in 0..=(k - 1) / 2 {
        let sign = if i % 2 == 0 { Rat::one() } else { -Rat::one() };
        let c = Rat::from_int(k) * sign / Rat::from_int(k - 2 * i) * binomial(k - i - 1, i);
        out.push(((k - 2 * i) as u32, c));
    }
    out
}

/// Inverse direction: `X_k = sum_j C(k, j) X'_{k-2j}`.
pub fn x_from_xprime(k: u32) -> Vec<(u32, Rat)> {
    let k = k as i64;
    (0..=(k - 1) / 2)
        .map(|j| ((k - 2 * j) as u32, binomial(k, j)))
        .collect()
}

/// Parity indicator: 0 for odd `k`, 1 for even `k`.
pub fn epsilon(k: u32) -> u32 {
    1 - k % 2
}

/// The odd polynomial `q_k(x) = sum_j C(2k+1, j) (-1)^j x^{2k+1-2j}`,
/// `j = 0..k`.
pub fn special_poly_q(k: u32) -> LaurentPoly {
    let k = k as i64;
    LaurentPoly::from_terms((0..=k).map(|j| {
        let sign = if j % 2 == 0 { Rat::one() } else { -Rat::one() };
        (2 * k + 1 - 2 * j, sign * binomial(2 * k + 1, j))
    }))
}

/// The symmetrization `P_k(u)`: odd polynomial of degree `2k+1` in
/// `u = x + 1/x` with
/// `P_k(u) = sum_j ((-2)^j / j!) ((2k+1)!! / (2k+1-2j)!!) u^{2k+1-2j}`.
pub fn special_poly_p(k: u32) -> UPoly {
    let k = k as i64;
    let top = double_factorial(2 * k + 1);
    let mut p = LaurentPoly::zero();
    for j in 0..=k {
        let c = Rat::from_int(-2).pow(j as i32) / Rat::from(factorial(j as u32))
            * Rat::from(top.clone())
            / Rat::from(double_factorial(2 * k + 1 - 2 * j));
        p.set(2 * k + 1 - 2 * j, c);
    }
    UPoly(p)
}

/// Coefficient of `X_{k-2j}` in the stationarity combination `Y_k`.
fn y_coeff(k: u32, j: u32) -> Rat {
    let s = (k as i64 - 1).div_euclid(2);
    let e = epsilon(k) as i64;
    let k = k as i64;
    let j = j as i64;
    let sign = if j % 2 == 0 { Rat::one() } else { -Rat::one() };
    Rat::from(factorial((k - e) as u32)) / Rat::from(factorial(s as u32))
        * sign
        / Rat::from(factorial(j as u32))
        * Rat::from(factorial((s - j) as u32))
        / Rat::from(factorial((k - e - 2 * j) as u32))
}

/// `Y_k(L)` assembled from Toda fields.
pub fn stationarity_field(w: &Window, k: u32) -> Result<VectorFieldValue> {
    let s = (k - 1) / 2;
    let mut terms = Vec::new();
    for j in 0..=s {
        let x = toda_field(w, k - 2 * j)?;
        terms.push((y_coeff(k, j), x));
    }
    Ok(VectorFieldValue::linear_combination(&terms).expect("k >= 1"))
}

/// The closed-form coefficient of `X'_{k-2l}` in `Y_k`:
/// `(-1)^l (1 - (2l/k) eps_k) C(k, l)`.
pub fn r_closed(k: u32, l: u32) -> Rat {
    let sign = if l % 2 == 0 { Rat::one() } else { -Rat::one() };
    let corr = Rat::one()
        - Rat::from_int(2 * l as i64) / Rat::from_int(k as i64) * Rat::from_int(epsilon(k) as i64);
    sign * corr * binomial(k as i64, l as i64)
}

/// The same coefficient from the defining double sum (composition of the
/// `Y` and `X -> X'` coefficient maps); kept separate so the closed form is
/// testable against it.
pub fn r_from_sum(k: u32, l: u32) -> Rat {
    let mut acc = Rat::zero();
    for j in 0..=l {
        // X_{k-2j} expanded in X', picking the X'_{k-2l} term (i = l - j)
        let inner = x_from_xprime(k - 2 * j)
            .into_iter()
            .find(|(idx, _)| *idx == k - 2 * l)
            .map(|(_, c)| c)
            .unwrap_or_else(Rat::zero);
        acc += y_coeff(k, j) * inner;
    }
    acc
}

/// `Y_k(L)` assembled from heat fields with the closed-form coefficients.
pub fn stationarity_field_heat(w: &Window, k: u32) -> Result<VectorFieldValue> {
    let s = (k - 1) / 2;
    let mut terms = Vec::new();
    for l in 0..=s {
        let xp = heat_field(w, k - 2 * l)?;
        terms.push((r_closed(k, l), xp));
    }
    Ok(VectorFieldValue::linear_combination(&terms).expect("k >= 1"))
}

/// Whether both stationarity brackets vanish on the window's interior:
/// `[P_k(L)_+, L] = 0` and `[(L P_k(L))_+, L] = 0`.
pub fn stationarity_bracket_check(w: &Window, k: u32) -> Result<bool> {
    let l = BandedOperator::from_window(w);
    let p = special_poly_p(k).0; // coefficients in u, nonnegative exponents
    let pl = l.poly_eval(&p)?;
    let first = pl.positive_part().commutator(&l)?;
    if !first.is_zero_on_interior() {
        return Ok(false);
    }
    let lpl = l.compose(&pl)?;
    let second = lpl.positive_part().commutator(&l)?;
    Ok(second.is_zero_on_interior())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_window, rng_from_seed};

    #[test]
    fn classical_toda_field() {
        let mut rng = rng_from_seed(701);
        let w = random_window(&mut rng, Interval::new(-8, 8));
        let x1 = toda_field(&w, 1).unwrap();
        let db = Seq::tabulate(Interval::new(-7, 7), |n| {
            w.a(n + 1).unwrap() - w.a(n).unwrap()
        });
        let da = Seq::tabulate(Interval::new(-7, 7), |n| {
            w.a(n).unwrap() * &(w.b(n).unwrap() - w.b(n - 1).unwrap())
        });
        assert!(x1.db.eq_on_common(&db).0);
        assert!(x1.da.eq_on_common(&da).0);
    }

    #[test]
    fn free_fields_vanish() {
        let w = Window::free(Interval::new(-10, 10));
        for k in 1..=3 {
            assert!(toda_field(&w, k).unwrap().is_zero());
            assert!(heat_field(&w, k).unwrap().is_zero());
            assert!(stationarity_field(&w, k).unwrap().is_zero());
        }
    }

    #[test]
    fn two_paths_agree() {
        let mut rng = rng_from_seed(702);
        for k in 1..=4u32 {
            let w = random_window(&mut rng, Interval::new(-12, 12));
            let bracket = toda_field(&w, k).unwrap();
            let residue = toda_field_residue(&w, k).unwrap();
            assert!(bracket.eq_on_common(&residue), "k={k}");
        }
    }

    #[test]
    fn heat_field_first_order_is_toda() {
        let mut rng = rng_from_seed(703);
        let w = random_window(&mut rng, Interval::new(-10, 10));
        let x1 = toda_field(&w, 1).unwrap();
        let xp1 = heat_field(&w, 1).unwrap();
        assert!(x1.eq_on_common(&xp1));
    }

    #[test]
    fn basis_change_coefficients() {
        // X'_1 = X_1 and X'_3 = X_3 - 3 X_1
        assert_eq!(xprime_from_x(1), vec![(1, Rat::one())]);
        assert_eq!(
            xprime_from_x(3),
            vec![(3, Rat::one()), (1, Rat::from_int(-3))]
        );
    }

    #[test]
    fn basis_round_trip_is_identity() {
        // composing the two maps collapses to delta_{m,0} for k <= 20
        for k in 1..=20u32 {
            let mut acc: std::collections::BTreeMap<u32, Rat> = Default::default();
            for (mid, c1) in xprime_from_x(k) {
                for (fin, c2) in x_from_xprime(mid) {
                    let e = acc.entry(fin).or_insert_with(Rat::zero);
                    *e += &c1 * &c2;
                }
            }
            for (idx, c) in acc {
                let expect = if idx == k { Rat::one() } else { Rat::zero() };
                assert_eq!(c, expect, "k={k}, idx={idx}");
            }
        }
    }

    #[test]
    fn delta_identity_for_combination_weights() {
        // k sum_{i<=m} ((-1)^i/(k-2i)) C(k-i-1, i) C(k-2i, m-i) = delta_{m,0}
        for k in 1..=20i64 {
            for m in 0..=(k - 1) / 2 {
                let mut acc = Rat::zero();
                for i in 0..=m {
                    let sign = if i % 2 == 0 { Rat::one() } else { -Rat::one() };
                    acc += Rat::from_int(k) * sign / Rat::from_int(k - 2 * i)
                        * binomial(k - i - 1, i)
                        * binomial(k - 2 * i, m - i);
                }
                let expect = if m == 0 { Rat::one() } else { Rat::zero() };
                assert_eq!(acc, expect, "k={k}, m={m}");
            }
        }
    }

    #[test]
    fn inclusion_exclusion_binomial_identity() {
        // sum_i (-1)^i C(k-i, r) C(m, i) = C(k-m, k-r)
        let mut rng = rng_from_seed(704);
        use rand::Rng;
        for _ in 0..200 {
            let k = rng.gen_range(0i64..=18);
            let r = rng.gen_range(0i64..=18);
            let m = rng.gen_range(0i64..=k.max(0));
            let mut acc = Rat::zero();
            for i in 0..=m {
                let sign = if i % 2 == 0 { Rat::one() } else { -Rat::one() };
                acc += sign * binomial(k - i, r) * binomial(m, i);
            }
            assert_eq!(acc, binomial(k - m, k - r), "k={k} r={r} m={m}");
        }
    }

    #[test]
    fn q_polynomials() {
        // q_0 = x; the quadratic recurrence in u; the symmetric and
        // antisymmetric parts
        assert_eq!(special_poly_q(0), LaurentPoly::monomial(1, Rat::one()));
        let u = LaurentPoly::u();
        let u2m4 = &(&u * &u) - &LaurentPoly::monomial(0, Rat::from_int(4));
        for k in 0..=8u32 {
            let qk = special_poly_q(k);
            let qk1 = special_poly_q(k + 1);
            let sign = if k % 2 == 0 { -Rat::one() } else { Rat::one() };
            let corr = u.scale(&(sign * binomial(2 * k as i64 + 1, k as i64)));
            assert_eq!(qk1, &(&u2m4 * &qk) + &corr, "recurrence k={k}");
            // antisymmetric part: q_k(x) - q_k(1/x) = (x - 1/x)^{2k+1}
            let anti = &qk - &qk.reflect();
            let xm = LaurentPoly::from_terms([(1, Rat::one()), (-1, -Rat::one())]);
            assert_eq!(anti, xm.pow(2 * k + 1), "antisymmetric k={k}");
            // symmetric part: q_k(x) + q_k(1/x) = P_k(u)
            let sym = &qk + &qk.reflect();
            assert_eq!(sym, special_poly_p(k).expand(), "symmetric k={k}");
        }
    }

    #[test]
    fn stationarity_coefficients_closed_form() {
        for s in 0..=8u32 {
            for l in 0..=s {
                // odd k = 2s+1
                assert_eq!(r_from_sum(2 * s + 1, l), r_closed(2 * s + 1, l));
                let sign = if l % 2 == 0 { Rat::one() } else { -Rat::one() };
                assert_eq!(
                    r_closed(2 * s + 1, l),
                    sign.clone() * binomial(2 * s as i64 + 1, l as i64)
                );
                // even k = 2s+2
                assert_eq!(r_from_sum(2 * s + 2, l), r_closed(2 * s + 2, l));
                assert_eq!(
                    r_closed(2 * s + 2, l),
                    sign * Rat::new(s as i64 - l as i64 + 1, s as i64 + 1)
                        * binomial(2 * s as i64 + 2, l as i64)
                );
            }
        }
    }

    #[test]
    fn heat_fields_recombine_into_toda_basis() {
        // X'_k equals the combination of toda fields, k <= 4 here (the
        // acceptance suite pushes to 6 on more windows)
        let mut rng = rng_from_seed(705);
        let w = random_window(&mut rng, Interval::new(-16, 16));
        for k in 1..=4u32 {
            let xp = heat_field(&w, k).unwrap();
            let terms: Vec<(Rat, VectorFieldValue)> = xprime_from_x(k)
                .into_iter()
                .map(|(j, c)| (c, toda_field(&w, j).unwrap()))
                .collect();
            let comb = VectorFieldValue::linear_combination(&terms).unwrap();
            assert!(xp.eq_on_common(&comb), "k={k}");
        }
    }

    #[test]
    fn oddness_kills_high_stationarity_weights() {
        // for f an odd monomial of degree <= 2N-1 and k >= 2N+1:
        // sum_l (-1)^l (1 - (2l/k) eps_k) C(k, l) f(k - 2l) = 0
        for cap in 1..=4i64 {
            for r in 0..cap {
                let deg = 2 * r + 1; // degree <= 2 cap - 1
                for k in (2 * cap + 1)..=(2 * cap + 6) {
                    let mut acc = Rat::zero();
                    for l in 0..=(k - 1) / 2 {
                        let c = r_closed(k as u32, l as u32);
                        let f = Rat::from_int(k - 2 * l).pow(deg as i32);
                        acc += c * f;
                    }
                    assert_eq!(acc, Rat::zero(), "cap={cap} deg={deg} k={k}");
                }
            }
        }
    }

    #[test]
    fn random_window_is_not_stationary() {
        // negative control: a generic window has nonvanishing Y_5 and
        // failing bracket check at k = 2
        let mut rng = rng_from_seed(706);
        let w = random_window(&mut rng, Interval::new(-20, 20));
        let y5 = stationarity_field(&w, 5).unwrap();
        assert!(!y5.is_zero());
        assert!(!stationarity_bracket_check(&w, 2).unwrap());
    }

    #[test]
    fn free_window_brackets_vanish() {
        let w = Window::free(Interval::new(-16, 16));
        assert!(stationarity_bracket_check(&w, 1).unwrap());
    }

    #[test]
    fn stationarity_two_routes_agree() {
        let mut rng = rng_from_seed(707);
        let w = random_window(&mut rng, Interval::new(-20, 20));
        for k in 1..=4u32 {
            let via_toda = stationarity_field(&w, k).unwrap();
            let via_heat = stationarity_field_heat(&w, k).unwrap();
            assert!(via_toda.eq_on_common(&via_heat), "k={k}");
        }
    }
}
