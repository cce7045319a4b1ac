//! Numeric layer: Bessel functions of imaginary argument, truncated kernel
//! sums, and the finite two-Bessel closed form.
//!
//! This is the only module that touches floating point. Every returned
//! value carries a forward error bound: series truncation tails are bounded
//! by the ratio test, and rounding is charged at a few ulps per operation.
//! Comparison tolerances in the tests are derived from those bounds — the
//! fixed ceilings (1e-9, 1e-10) of the acceptance checks are ceilings, not
//! the operative bounds.
//!
//! The resummation machinery turns a tail `sum_{i<k} p(i) I_i(2t)` with `p`
//! odd per parity branch into `p1(t) I_k(2t) + p2(t) I_{k-1}(2t)` with
//! `p1(0) = p2(0) = 0`, by exact triangular matching against the weight
//! polynomials `A^{m,c}(i)` that satisfy
//! `t^m I_c(2t) = (-1)^m sum_{i <= c, i = c+m mod 2} A^{m,c}(i) I_i(2t)`.
//! The heat-kernel application: for a Darboux window the heat coefficients
//! `alpha_k(n,m)`, `k >= 1`, are exactly an odd polynomial in `n - m - k`
//! per parity class; fitting that polynomial and resumming produces the
//! closed form `(1 + p1(t)) I_{n-m}(2t) + p2(t) I_{n-m-1}(2t)`, certified
//! numerically against the truncated expansion.

use num_bigint::BigInt;
use num_traits::One;

use crate::alpha::{alpha_recurrence, required_window, AlphaTable, Region};
use crate::darboux::{extract_l, fit_odd_polynomial, DarbouxSpec};
use crate::error::{Error, Result};
use crate::laurent::LaurentPoly;
use crate::rational::{factorial, Rat};
use crate::sequence::Interval;
use crate::window::Window;

const EPS: f64 = f64::EPSILON;

/// Series evaluator configuration.
#[derive(Clone, Copy, Debug)]
pub struct BesselEvaluator {
    /// Target relative tolerance of the truncation tail.
    pub rel_tol: f64,
    /// Hard cap on series terms.
    pub max_terms: usize,
}

impl Default for BesselEvaluator {
    fn default() -> Self {
        BesselEvaluator {
            rel_tol: 1e-15,
            max_terms: 500,
        }
    }
}

/// A float with a rigorous error bound: the true value lies within
/// `value ± bound`.
#[derive(Clone, Copy, Debug)]
pub struct BesselValue {
    pub value: f64,
    pub bound: f64,
}

impl BesselValue {
    pub fn exact(value: f64) -> Self {
        BesselValue {
            value,
            bound: value.abs() * EPS,
        }
    }

    pub fn agrees_with(&self, other: &BesselValue, extra: f64) -> bool {
        (self.value - other.value).abs() <= self.bound + other.bound + extra
    }
}

/// `I_r(2t)` via the series `sum_j t^{r+2j} / (j! (r+j)!)`, `r = |k|`; the
/// symmetry in the order is exact by construction. Truncation stops when
/// the ratio-test tail drops below the tolerance.
pub fn bessel_i(eval: &BesselEvaluator, k: i64, two_t: f64) -> Result<BesselValue> {
    let r = k.unsigned_abs() as u32;
    let t = two_t / 2.0;
    if t == 0.0 {
        return Ok(BesselValue {
            value: if r == 0 { 1.0 } else { 0.0 },
            bound: 0.0,
        });
    }
    let at = t.abs();
    // first term t^r / r!
    let mut term = 1.0f64;
    for j in 1..=r {
        term *= t / j as f64;
    }
    let mut sum = term;
    let mut abs_sum = term.abs();
    let mut j = 0usize;
    loop {
        j += 1;
        if j > eval.max_terms {
            return Err(Error::BesselCapExceeded {
                cap: eval.max_terms,
                arg: two_t,
            });
        }
        term *= (t * t) / (j as f64 * (r as f64 + j as f64));
        sum += term;
        abs_sum += term.abs();
        // ratio of consecutive terms from here on
        let ratio = (at * at) / ((j as f64 + 1.0) * (r as f64 + j as f64 + 1.0));
        if ratio < 0.5 {
            let tail = term.abs() * ratio / (1.0 - ratio);
            if tail <= eval.rel_tol * sum.abs().max(f64::MIN_POSITIVE) || tail < 1e-300 {
                let rounding = abs_sum * (j as f64 + r as f64 + 2.0) * 2.0 * EPS;
                return Ok(BesselValue {
                    value: sum,
                    bound: tail + rounding,
                });
            }
        }
    }
}

/// Uniform tail bound `|I_{-r}(2t)| <= T^r / r! * e^{T^2}` for `|t| <= T`.
pub fn uniform_bound(r: u32, t_cap: f64) -> f64 {
    let mut p = 1.0f64;
    for j in 1..=r {
        p *= t_cap / j as f64;
    }
    p * (t_cap * t_cap).exp()
}

/// Truncated kernel sum `sum_{k<=K} alpha_k(n,m) I_{n-m-k}(2t)` with a
/// reported (heuristic) tail estimate alongside the rigorous bound of the
/// summed part.
pub fn kernel_truncated(
    eval: &BesselEvaluator,
    table: &AlphaTable,
    n: i64,
    m: i64,
    t: f64,
    order: usize,
) -> Result<BesselValue> {
    if table.max_order() < order {
        return Err(Error::OrderInsufficient {
            need: order,
            have: table.max_order(),
        });
    }
    let mut sum = 0.0f64;
    let mut bound = 0.0f64;
    let mut last_alpha: f64 = 1.0;
    for k in 0..=order {
        let alpha = table
            .get(k, n, m)
            .ok_or_else(|| Error::InvalidArgument(format!("alpha table lacks ({n}, {m})")))?
            .to_f64();
        let b = bessel_i(eval, n - m - k as i64, 2.0 * t)?;
        sum += alpha * b.value;
        bound += alpha.abs() * b.bound + (alpha * b.value).abs() * 2.0 * EPS;
        if alpha != 0.0 {
            last_alpha = alpha.abs().max(last_alpha);
        }
    }
    // heuristic tail: coefficient growth times the next Bessel magnitude
    let next = bessel_i(eval, n - m - order as i64 - 1, 2.0 * t)?;
    let tail_estimate = last_alpha * 4.0 * (next.value.abs() + next.bound);
    Ok(BesselValue {
        value: sum,
        bound: bound + tail_estimate,
    })
}

/// The weight polynomial `A^{m,c}(i) = i / (4^{m-1} (m-1)!)
/// prod_{|j|<m, j = m mod 2} ((c+j)^2 - i^2)`, an odd polynomial in `i` of
/// degree `2m - 1`.
pub fn bessel_weight_poly(m: u32, c: i64) -> LaurentPoly {
    assert!(m >= 1);
    let mut denom = BigInt::one();
    for _ in 1..m {
        denom *= 4;
    }
    denom *= factorial(m - 1);
    let mut p = LaurentPoly::monomial(1, Rat::from_big(BigInt::one(), denom));
    let mut j = -(m as i64 - 1);
    while j < m as i64 {
        if (j - m as i64).rem_euclid(2) == 0 {
            let factor = LaurentPoly::from_terms([
                (0, Rat::from_int((c + j) * (c + j))),
                (2, -Rat::one()),
            ]);
            p = &p * &factor;
        }
        j += 1;
    }
    p
}

/// Numeric evaluation of `sum_{i <= cutoff, i = parity(cutoff_parity)}
/// w(i) I_i(2t)`, truncated where the factorial decay makes further terms
/// irrelevant.
fn weighted_bessel_tail(
    eval: &BesselEvaluator,
    w: &LaurentPoly,
    cutoff: i64,
    parity: i64,
    t: f64,
) -> Result<BesselValue> {
    let mut i = cutoff;
    if i.rem_euclid(2) != parity.rem_euclid(2) {
        i -= 1;
    }
    let mut sum = 0.0;
    let mut bound = 0.0;
    let mut small_streak = 0;
    let mut steps = 0usize;
    while small_streak < 4 {
        steps += 1;
        if steps > 4000 {
            return Err(Error::BesselCapExceeded {
                cap: 4000,
                arg: 2.0 * t,
            });
        }
        let wv = w.eval(&Rat::from_int(i)).to_f64();
        let b = bessel_i(eval, i, 2.0 * t)?;
        sum += wv * b.value;
        bound += wv.abs() * b.bound + (wv * b.value).abs() * 2.0 * EPS;
        if wv.abs() * (b.value.abs() + b.bound) < 1e-22 * (1.0 + sum.abs()) && i < -(2.0 * t) as i64 {
            small_streak += 1;
        } else {
            small_streak = 0;
        }
        i -= 2;
    }
    Ok(BesselValue { value: sum, bound })
}

/// Polynomials in `t` with exact rational coefficients, the two-Bessel
/// closed form of a kernel tail: `p1(t) I_k + p2(t) I_{k-1}` with
/// `p1(0) = p2(0) = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteKernelForm {
    pub n: i64,
    pub m: i64,
    pub p1: Vec<Rat>,
    pub p2: Vec<Rat>,
}

impl FiniteKernelForm {
    pub fn eval_p1(&self, t: f64) -> f64 {
        eval_poly_f64(&self.p1, t)
    }

    pub fn eval_p2(&self, t: f64) -> f64 {
        eval_poly_f64(&self.p2, t)
    }

    pub fn is_trivial(&self) -> bool {
        self.p1.iter().all(Rat::is_zero) && self.p2.iter().all(Rat::is_zero)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "m": self.m,
            "p1": self.p1.iter().map(Rat::to_string).collect::<Vec<_>>(),
            "p2": self.p2.iter().map(Rat::to_string).collect::<Vec<_>>(),
        })
    }
}

fn eval_poly_f64(coeffs: &[Rat], t: f64) -> f64 {
    let mut acc = 0.0;
    for c in coeffs.iter().rev() {
        acc = acc * t + c.to_f64();
    }
    acc
}

fn assert_odd_branch(p: &LaurentPoly, branch: &'static str) -> Result<()> {
    for (e, _) in p.terms() {
        if e < 1 || e % 2 == 0 {
            return Err(Error::NotOddPolynomial { branch });
        }
    }
    Ok(())
}

/// Resum `sum_{i<k} p(i) I_i(2t)` into a two-Bessel form. `p` is given per
/// parity branch of `i` (each an odd polynomial in `i`).
pub fn resum_two_bessel(
    p_even_i: &LaurentPoly,
    p_odd_i: &LaurentPoly,
    cutoff: i64,
) -> Result<FiniteKernelForm> {
    assert_odd_branch(p_even_i, "even")?;
    assert_odd_branch(p_odd_i, "odd")?;
    let mut p1: Vec<Rat> = Vec::new();
    let mut p2: Vec<Rat> = Vec::new();
    let mut bump = |v: &mut Vec<Rat>, m: usize, c: Rat| {
        if v.len() <= m {
            v.resize(m + 1, Rat::zero());
        }
        v[m] = &v[m] + &c;
    };
    for (branch, same_parity_as_cutoff) in [
        (p_even_i, cutoff.rem_euclid(2) == 0),
        (p_odd_i, cutoff.rem_euclid(2) != 0),
    ] {
        let mut rem = branch.clone();
        while let Some(d) = rem.degree() {
            let m = ((d + 1) / 2) as u32; // weight degree 2m - 1 = d
            // which cutoff the degree-matching block lives at:
            //   same-parity branch: even m pairs with cutoff k, odd with k-1
            //   other branch: odd m pairs with k, even with k-1
            let use_k = if same_parity_as_cutoff {
                m % 2 == 0
            } else {
                m % 2 == 1
            };
            let c_ref = if use_k { cutoff } else { cutoff - 1 };
            let basis = bessel_weight_poly(m, c_ref);
            let coeff = rem.coeff(d) / basis.coeff(d);
            rem = &rem - &basis.scale(&coeff);
            // signs: block sums to (-1)^m t^m I_{c_ref}
            let sign = if m % 2 == 0 { Rat::one() } else { -Rat::one() };
            let signed = sign * coeff;
            if use_k {
                bump(&mut p1, m as usize, signed);
            } else {
                bump(&mut p2, m as usize, signed);
            }
        }
    }
    if !p1.is_empty() {
        assert!(p1[0].is_zero(), "p1 must vanish at t = 0");
    }
    if !p2.is_empty() {
        assert!(p2[0].is_zero(), "p2 must vanish at t = 0");
    }
    Ok(FiniteKernelForm {
        n: 0,
        m: 0,
        p1,
        p2,
    })
}

/// Exact odd-polynomial fit of `alpha_k(n, m)` in `d = n - m - k` per
/// parity class of `k >= 1`, with degree bound `2 half_degree - 1`.
/// Returns `(branch for even i, branch for odd i)` in the variable
/// `i = n - m - k`; fails with the offending order if any computed
/// coefficient falls off the fitted polynomial.
pub fn odd_fit_alpha(
    table: &AlphaTable,
    n: i64,
    m: i64,
    order: usize,
    half_degree: usize,
) -> Result<(LaurentPoly, LaurentPoly)> {
    let mut branches = Vec::with_capacity(2);
    for parity in [0i64, 1] {
        // class of k with (n - m - k) = parity mod 2
        let class_ks: Vec<usize> = (1..=order)
            .filter(|&k| (n - m - k as i64).rem_euclid(2) == parity)
            .collect();
        let mut fit_pts: Vec<(Rat, Rat)> = Vec::new();
        let mut used: Vec<i64> = Vec::new();
        for &k in &class_ks {
            let d = n - m - k as i64;
            if d == 0 || used.contains(&d.abs()) {
                continue;
            }
            if fit_pts.len() < half_degree {
                let v = table
                    .get(k, n, m)
                    .ok_or_else(|| Error::InvalidArgument("alpha table too small".into()))?;
                fit_pts.push((Rat::from_int(d), v.clone()));
                used.push(d.abs());
            }
        }
        if fit_pts.len() < half_degree {
            return Err(Error::FiniteFormFit {
                k: order,
                reason: format!(
                    "only {} usable interpolation nodes for a degree-{} odd fit",
                    fit_pts.len(),
                    2 * half_degree as i64 - 1
                ),
            });
        }
        let coeffs = if half_degree == 0 {
            Vec::new()
        } else {
            fit_odd_polynomial(&fit_pts)?
        };
        let poly = LaurentPoly::from_terms(
            coeffs
                .iter()
                .enumerate()
                .map(|(r, c)| (2 * r as i64 + 1, c.clone())),
        );
        // exact verification on the entire class
        for &k in &class_ks {
            let d = n - m - k as i64;
            let expect = poly.eval(&Rat::from_int(d));
            let got = table
                .get(k, n, m)
                .ok_or_else(|| Error::InvalidArgument("alpha table too small".into()))?;
            if &expect != got {
                return Err(Error::FiniteFormFit {
                    k,
                    reason: format!("alpha_{k}({n},{m}) falls off the odd fit"),
                });
            }
        }
        branches.push(poly);
    }
    Ok((branches.remove(0), branches.remove(0)))
}

/// Full finite-form pipeline for a Darboux spec at `(n, m)`: exact fit,
/// resummation, and numeric certification against the truncated kernel at
/// the sample times. The comparison tolerance is the accumulated error
/// bound capped by 1e-9.
pub fn finite_form_check(
    spec: &DarbouxSpec,
    n: i64,
    m: i64,
    t_samples: &[f64],
    order: usize,
) -> Result<FiniteKernelForm> {
    if order < 2 * spec.order() + 4 {
        return Err(Error::OrderInsufficient {
            need: 2 * spec.order() + 4,
            have: order,
        });
    }
    let region = Region::single(n, m);
    let need = required_window(&region, order).hull(&Interval::new(n.min(m), n.max(m)));
    let dx = extract_l(spec, need)?;
    let table = alpha_recurrence(&dx.window, order, &region)?;
    let half_degree = spec.n1.max(spec.n2);
    let (even_i, odd_i) = odd_fit_alpha(&table, n, m, order, half_degree)?;
    let mut form = resum_two_bessel(&even_i, &odd_i, n - m)?;
    form.n = n;
    form.m = m;
    // numeric certification
    let eval = BesselEvaluator::default();
    for &t in t_samples {
        let closed = closed_form_value(&eval, &form, t)?;
        let truncated = kernel_truncated(&eval, &table, n, m, t, order)?;
        let tol = (closed.bound + truncated.bound).max(1e-9);
        if (closed.value - truncated.value).abs() > tol {
            return Err(Error::FiniteFormFit {
                k: 0,
                reason: format!(
                    "closed form deviates by {:e} at t = {t}",
                    (closed.value - truncated.value).abs()
                ),
            });
        }
    }
    Ok(form)
}

/// `(1 + p1(t)) I_{n-m}(2t) + p2(t) I_{n-m-1}(2t)` with its error bound.
pub fn closed_form_value(
    eval: &BesselEvaluator,
    form: &FiniteKernelForm,
    t: f64,
) -> Result<BesselValue> {
    let b1 = bessel_i(eval, form.n - form.m, 2.0 * t)?;
    let b2 = bessel_i(eval, form.n - form.m - 1, 2.0 * t)?;
    let c1 = 1.0 + form.eval_p1(t);
    let c2 = form.eval_p2(t);
    let value = c1 * b1.value + c2 * b2.value;
    let poly_round =
        (form.p1.len() + form.p2.len() + 2) as f64 * EPS * (c1.abs() * b1.value.abs() + c2.abs() * b2.value.abs());
    let bound = c1.abs() * b1.bound + c2.abs() * b2.bound + poly_round * 4.0;
    Ok(BesselValue { value, bound })
}
