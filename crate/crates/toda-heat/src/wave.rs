//! Truncated wave and adjoint-wave coefficient tables.
//!
//! For a window `L = E + b_n Id + a_n E^{-1}` the reduced wave function is
//! the formal series `1 + sum_k psi_k(n) z^{-k}`. Its coefficients solve
//!
//! ```text
//! psi_k(n+1) + b_n psi_{k-1}(n) + a_n psi_{k-2}(n-1) = psi_k(n)
//! ```
//!
//! with the gauge `psi_k(n0) = 0` for `k >= 1` at a caller-chosen base point.
//! The adjoint coefficients `psi*_k` are *defined* by the triangular
//! inversion of the wave operator,
//!
//! ```text
//! sum_{i+j=m} psi_i(n + m - 1) psi*_j(n) = 0   for m >= 1,
//! ```
//!
//! never by an independent recurrence. Per-order validity intervals are
//! computed constructively while building: order `k` loses one site at the
//! lower end relative to order `k-2` (the recurrence consumes
//! `psi_{k-2}(n-1)`), and the adjoint table loses sites from the upper end.
//!
//! Coefficient reconstruction inverts the conjugation `L = W E W^{-1}`:
//! `b_n = psi_1(n) + psi*_1(n+1)` and
//! `a_n = psi_2(n) + psi_1(n) psi*_1(n) + psi*_2(n)`. The placement of the
//! adjoint index in the second formula (all three terms at site `n`) is the
//! one that round-trips the window data exactly; the neighbouring
//! placements fail on generic windows (see `reconstruct_resolves_indices`
//! in the tests, which pins this down by exhaustive comparison).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::Rat;
use crate::sequence::{Interval, Seq};
use crate::series::TruncatedLaurentSeries;
use crate::window::Window;

/// How a table was produced. Darboux-exact tables come from expanding exact
/// rational Baker functions and have no construction gauge.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum Provenance {
    GenericWindow,
    DarbouxExact,
}

#[derive(Clone, Debug, Serialize)]
pub struct WaveTable {
    order: usize,
    base: i64,
    psi: Vec<Seq>,
    psi_star: Vec<Seq>,
    provenance: Provenance,
}

impl WaveTable {
    /// Assemble a table from precomputed rows. `psi[0]` and `psi_star[0]`
    /// must be identically one.
    pub fn from_rows(
        base: i64,
        psi: Vec<Seq>,
        psi_star: Vec<Seq>,
        provenance: Provenance,
    ) -> Self {
        assert_eq!(psi.len(), psi_star.len());
        assert!(!psi.is_empty());
        assert!(psi[0].iter().all(|(_, v)| v.is_one()), "psi_0 must be 1");
        assert!(psi_star[0].iter().all(|(_, v)| v.is_one()), "psi*_0 must be 1");
        WaveTable {
            order: psi.len() - 1,
            base,
            psi,
            psi_star,
            provenance,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn base(&self) -> i64 {
        self.base
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn psi(&self, k: usize, n: i64) -> Option<&Rat> {
        self.psi.get(k).and_then(|s| s.get(n))
    }

    pub fn psi_star(&self, k: usize, n: i64) -> Option<&Rat> {
        self.psi_star.get(k).and_then(|s| s.get(n))
    }

    pub fn psi_interval(&self, k: usize) -> Interval {
        self.psi[k].interval()
    }

    pub fn psi_star_interval(&self, k: usize) -> Interval {
        self.psi_star[k].interval()
    }

    /// Coefficient of `z^{-d}` in the product of the reduced wave function
    /// at `n` and the reduced adjoint at `m1`:
    /// `sum_{i+j=d} psi_i(n) psi*_j(m1)`. `None` if some factor is outside
    /// its validity interval.
    pub fn pair_convolution(&self, n: i64, m1: i64, d: usize) -> Option<Rat> {
        if d > self.order {
            return None;
        }
        let mut acc = Rat::zero();
        for i in 0..=d {
            let a = self.psi(i, n)?;
            let b = self.psi_star(d - i, m1)?;
            acc += a * b;
        }
        Some(acc)
    }

    /// The reduced wave function at `n` as a truncated series in `z`
    /// (top exponent 0, tracked down to `z^{-depth}`).
    pub fn reduced_wave_series(&self, n: i64, depth: usize) -> Result<TruncatedLaurentSeries> {
        self.series_from(&self.psi, n, depth)
    }

    /// The reduced adjoint wave function at `n` as a truncated series.
    pub fn reduced_adjoint_series(&self, n: i64, depth: usize) -> Result<TruncatedLaurentSeries> {
        self.series_from(&self.psi_star, n, depth)
    }

    fn series_from(&self, rows: &[Seq], n: i64, depth: usize) -> Result<TruncatedLaurentSeries> {
        if depth > self.order {
            return Err(Error::OrderInsufficient {
                need: depth,
                have: self.order,
            });
        }
        let mut coeffs = Vec::with_capacity(depth + 1);
        for k in 0..=depth {
            let v = rows[k].get(n).ok_or_else(|| Error::IntervalInsufficient {
                what: format!("wave coefficient order {k}"),
                need_lo: n,
                need_hi: n,
                have_lo: rows[k].interval().lo,
                have_hi: rows[k].interval().hi,
            })?;
            coeffs.push(v.clone());
        }
        Ok(TruncatedLaurentSeries::new(0, coeffs))
    }

    /// Post-hoc integrity re-check of the wave-operator inversion:
    /// `sum_{i+j=m} psi_i(n+m-1) psi*_j(n) = delta_{m,0}` on all valid sites.
    pub fn check_unit_convolution(&self) -> bool {
        for m in 1..=self.order {
            let iv = self.psi_star_interval(m);
            for n in iv.iter() {
                let mut acc = Rat::zero();
                let mut complete = true;
                for i in 0..=m {
                    match (self.psi(i, n + m as i64 - 1), self.psi_star(m - i, n)) {
                        (Some(a), Some(b)) => acc += a * b,
                        _ => complete = false,
                    }
                }
                if complete && !acc.is_zero() {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "order": self.order,
            "base": self.base,
            "provenance": format!("{:?}", self.provenance),
            "psi": self.psi.iter().map(seq_json).collect::<Vec<_>>(),
            "psi_star": self.psi_star.iter().map(seq_json).collect::<Vec<_>>(),
        })
    }
}

fn seq_json(s: &Seq) -> serde_json::Value {
    let iv = s.interval();
    serde_json::json!({
        "lo": iv.lo,
        "vals": iv.iter().map(|n| s.at(n).to_string()).collect::<Vec<_>>(),
    })
}

/// Build the wave table of a window up to `order`, with gauge
/// `psi_k(base) = 0` for `k >= 1`.
pub fn build_wave_table(w: &Window, order: usize, base: i64) -> Result<WaveTable> {
    let iv = w.interval();
    assert!(iv.contains(base), "gauge base point must lie in the window");
    let universal = Interval::new(iv.lo - 1, iv.hi + 1);

    let mut psi: Vec<Seq> = vec![Seq::constant(Rat::one(), universal)];
    for k in 1..=order {
        let prev = psi[k - 1].interval();
        let (lo2, hi2) = if k >= 2 {
            let p2 = psi[k - 2].interval();
            (p2.lo + 1, p2.hi + 1)
        } else {
            (i64::MIN / 4, i64::MAX / 4)
        };
        let e_lo = iv.lo.max(prev.lo).max(lo2);
        let e_hi = iv.hi.min(prev.hi).min(hi2);
        let valid = Interval::new(e_lo, e_hi + 1);
        if valid.is_empty() || !valid.contains(base) {
            return Err(Error::WindowTooNarrow { order: k });
        }
        let mut vals = vec![Rat::zero(); valid.len()];
        let idx = |n: i64| (n - valid.lo) as usize;
        // upward from the gauge point
        for n in base..=e_hi {
            let mut v = vals[idx(n)].clone();
            v -= w.b(n).unwrap() * psi[k - 1].at(n);
            if k >= 2 {
                v -= w.a(n).unwrap() * psi[k - 2].at(n - 1);
            }
            vals[idx(n + 1)] = v;
        }
        // downward from the gauge point
        for n in (e_lo..base).rev() {
            let mut v = vals[idx(n + 1)].clone();
            v += w.b(n).unwrap() * psi[k - 1].at(n);
            if k >= 2 {
                v += w.a(n).unwrap() * psi[k - 2].at(n - 1);
            }
            vals[idx(n)] = v;
        }
        psi.push(Seq::new(valid.lo, vals));
    }

    let psi_star = invert_psi_rows(&psi)?;

    Ok(WaveTable {
        order,
        base,
        psi,
        psi_star,
        provenance: Provenance::GenericWindow,
    })
}

/// Triangular inversion of a wave-coefficient table: given rows `psi_k`,
/// produce the adjoint rows solving
/// `sum_{i+j=m} psi_i(n+m-1) psi*_j(n) = delta_{m,0}` order by order.
/// Validity intervals follow from the inputs'; `psi[0]` must be one.
pub fn invert_psi_rows(psi: &[Seq]) -> Result<Vec<Seq>> {
    assert!(!psi.is_empty() && psi[0].iter().all(|(_, v)| v.is_one()));
    let mut psi_star: Vec<Seq> = vec![psi[0].clone()];
    for m in 1..psi.len() {
        let mut valid = psi_star[m - 1].interval();
        for row in psi.iter().take(m + 1).skip(1) {
            valid = valid.intersect(&row.interval().translate(1 - m as i64));
        }
        if valid.is_empty() {
            return Err(Error::WindowTooNarrow { order: m });
        }
        let seq = Seq::tabulate(valid, |p| {
            let mut acc = Rat::zero();
            for k in 1..=m {
                acc += psi[k].at(p + m as i64 - 1) * psi_star[m - k].at(p);
            }
            -acc
        });
        psi_star.push(seq);
    }
    Ok(psi_star)
}

/// Reconstruct `(b, a)` from a wave table by inverting `L = W E W^{-1}`.
pub fn reconstruct_coefficients(t: &WaveTable) -> Result<(Seq, Seq)> {
    if t.order() < 2 {
        return Err(Error::OrderInsufficient {
            need: 2,
            have: t.order(),
        });
    }
    let b_iv = t
        .psi_interval(1)
        .intersect(&t.psi_star_interval(1).translate(-1));
    if b_iv.is_empty() {
        return Err(Error::EmptyInterior("reconstructed b".into()));
    }
    let b = Seq::tabulate(b_iv, |n| {
        t.psi(1, n).unwrap() + t.psi_star(1, n + 1).unwrap()
    });
    let a_iv = t
        .psi_interval(2)
        .intersect(&t.psi_interval(1))
        .intersect(&t.psi_star_interval(1))
        .intersect(&t.psi_star_interval(2));
    if a_iv.is_empty() {
        return Err(Error::EmptyInterior("reconstructed a".into()));
    }
    let a = Seq::tabulate(a_iv, |n| {
        t.psi(2, n).unwrap()
            + t.psi(1, n).unwrap() * t.psi_star(1, n).unwrap()
            + t.psi_star(2, n).unwrap()
    });
    Ok((b, a))
}

/// Check the shifted residue pairing at shift `k0`: the coefficient of
/// `z^{-1-k0}` in the product of the reduced wave at `n + k0` and the
/// reduced adjoint at `n` must vanish for every valid `n`. `depth` is the
/// table-order budget the caller is asserting; it must cover `k0 + 1`.
pub fn check_bilinear(t: &WaveTable, k0: usize, depth: usize) -> Result<bool> {
    let m = k0 + 1;
    if depth < m || depth > t.order() {
        return Err(Error::OrderInsufficient {
            need: m.max(depth),
            have: t.order().min(depth),
        });
    }
    let mut checked_any = false;
    // n must be valid for psi*_j (all j <= m) and n + k0 for psi_i (i <= m)
    let iv = t
        .psi_star_interval(m)
        .intersect(&t.psi_interval(m).translate(-(k0 as i64)));
    for n in iv.iter() {
        match t.pair_convolution(n + k0 as i64, n, m) {
            Some(v) => {
                checked_any = true;
                if !v.is_zero() {
                    return Ok(false);
                }
            }
            None => continue,
        }
    }
    if !checked_any {
        return Err(Error::EmptyInterior(format!(
            "bilinear check at shift {k0} has no valid site"
        )));
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_window, rng_from_seed};
    use crate::series::residue_z;

    fn table(seed: u64, lo: i64, hi: i64, order: usize) -> (Window, WaveTable) {
        let mut rng = rng_from_seed(seed);
        let w = random_window(&mut rng, Interval::new(lo, hi));
        let base = w.midpoint();
        let t = build_wave_table(&w, order, base).unwrap();
        (w, t)
    }

    #[test]
    fn free_window_table_is_polynomial() {
        // With the eigenvalue-z convention the free window is not gauge
        // trivial: the order-2 source is a_n psi_0 = 1, so psi_2 grows
        // linearly while psi_1 vanishes. The observable quantities
        // (reconstructed a, b and every alpha_k) still collapse to the free
        // values; the former is checked here, the latter in the heat tests.
        let w = Window::free(Interval::new(-8, 8));
        let base = 0;
        let t = build_wave_table(&w, 5, base).unwrap();
        for n in t.psi_interval(1).iter() {
            assert!(t.psi(1, n).unwrap().is_zero());
        }
        for n in t.psi_interval(2).iter() {
            assert_eq!(t.psi(2, n).unwrap(), &Rat::from_int(base - n));
        }
        let (b, a) = reconstruct_coefficients(&t).unwrap();
        assert!(b.is_zero());
        assert!(a.iter().all(|(_, v)| v.is_one()));
    }

    #[test]
    fn recurrence_holds_on_all_valid_sites() {
        let (w, t) = table(101, -10, 9, 6);
        for k in 1..=6usize {
            let iv = t.psi_interval(k);
            for n in iv.lo..iv.hi {
                let lhs = t.psi(k, n + 1).unwrap()
                    + w.b(n).unwrap() * t.psi(k - 1, n).unwrap()
                    + if k >= 2 {
                        w.a(n).unwrap() * t.psi(k - 2, n - 1).unwrap()
                    } else {
                        Rat::zero()
                    };
                assert_eq!(&lhs, t.psi(k, n).unwrap(), "k={k}, n={n}");
            }
        }
    }

    #[test]
    fn first_order_pairing_vanishes() {
        // psi_1 + psi*_1 = 0 on all valid sites
        let (_, t) = table(102, -10, 9, 6);
        let iv = t.psi_interval(1).intersect(&t.psi_star_interval(1));
        assert!(!iv.is_empty());
        for n in iv.iter() {
            let s = t.psi(1, n).unwrap() + t.psi_star(1, n).unwrap();
            assert!(s.is_zero(), "n={n}");
        }
    }

    #[test]
    fn second_order_pairing_vanishes() {
        // psi_2(n+1) + psi_1(n+1) psi*_1(n) + psi*_2(n) = 0
        let (_, t) = table(103, -10, 9, 6);
        let iv = t
            .psi_star_interval(2)
            .intersect(&t.psi_interval(2).translate(-1));
        assert!(!iv.is_empty());
        for n in iv.iter() {
            let s = t.psi(2, n + 1).unwrap()
                + t.psi(1, n + 1).unwrap() * t.psi_star(1, n).unwrap()
                + t.psi_star(2, n).unwrap();
            assert!(s.is_zero(), "n={n}");
        }
    }

    #[test]
    fn unit_convolution_recheck() {
        let (_, t) = table(104, -9, 10, 7);
        assert!(t.check_unit_convolution());
    }

    #[test]
    fn bilinear_holds_for_small_shifts() {
        let (_, t) = table(105, -12, 11, 7);
        for k0 in 0..=4 {
            assert!(check_bilinear(&t, k0, 7).unwrap(), "k0={k0}");
        }
    }

    #[test]
    fn bilinear_detects_corruption() {
        let (_, mut t) = table(106, -10, 9, 5);
        // perturb one psi value
        let iv = t.psi_interval(3);
        let n = (iv.lo + iv.hi) / 2;
        let mut s = t.psi[3].clone();
        let bad = s.at(n) + &Rat::one();
        s = Seq::tabulate(s.interval(), |m| if m == n { bad.clone() } else { s.at(m).clone() });
        t.psi[3] = s;
        assert!(!check_bilinear(&t, 2, 5).unwrap());
    }

    #[test]
    fn reconstruct_round_trips_b_and_a() {
        for seed in [201, 202, 203, 204, 205] {
            let (w, t) = table(seed, -9, 10, 4);
            let (b, a) = reconstruct_coefficients(&t).unwrap();
            let (ok_b, iv_b) = b.eq_on_common(w.b_seq());
            let (ok_a, iv_a) = a.eq_on_common(w.a_seq());
            assert!(ok_b && !iv_b.is_empty());
            assert!(ok_a && !iv_a.is_empty());
        }
    }

    #[test]
    fn reconstruct_resolves_indices() {
        // Of the candidate placements of the adjoint coefficient in the
        // reconstruction of a_n, only the all-at-n form survives a round
        // trip on random windows.
        let mut fails = [0usize; 3]; // psi*_2 at n+1, at n-1, middle term at n+1
        for seed in 301..309 {
            let (w, t) = table(seed, -9, 10, 4);
            let iv = t
                .psi_star_interval(2)
                .translate(-1)
                .intersect(&t.psi_interval(2))
                .intersect(&w.interval())
                .intersect(&t.psi_star_interval(2).translate(1));
            for n in iv.iter() {
                let base2 = t.psi(2, n).unwrap() + t.psi(1, n).unwrap() * t.psi_star(1, n).unwrap();
                let cand = [
                    &base2 + t.psi_star(2, n + 1).unwrap(),
                    &base2 + t.psi_star(2, n - 1).unwrap(),
                    t.psi(2, n).unwrap()
                        + t.psi(1, n).unwrap() * t.psi_star(1, n + 1).unwrap()
                        + t.psi_star(2, n + 1).unwrap(),
                ];
                let correct = base2 + t.psi_star(2, n).unwrap();
                assert_eq!(&correct, w.a(n).unwrap());
                for (i, c) in cand.iter().enumerate() {
                    if c != w.a(n).unwrap() {
                        fails[i] += 1;
                    }
                }
            }
        }
        assert!(fails.iter().all(|&f| f > 0), "every wrong placement must fail somewhere: {fails:?}");
    }

    #[test]
    fn gauge_invariance_of_pair_products() {
        let mut rng = rng_from_seed(401);
        let w = random_window(&mut rng, Interval::new(-10, 9));
        let t1 = build_wave_table(&w, 5, -2).unwrap();
        let t2 = build_wave_table(&w, 5, 3).unwrap();
        let mut compared = 0;
        for d in 0..=5usize {
            for n in -4..=4i64 {
                for m1 in -3..=4i64 {
                    if let (Some(x), Some(y)) =
                        (t1.pair_convolution(n, m1, d), t2.pair_convolution(n, m1, d))
                    {
                        assert_eq!(x, y, "d={d} n={n} m1={m1}");
                        compared += 1;
                    }
                }
            }
        }
        assert!(compared > 100);
    }

    #[test]
    fn window_too_narrow_reports_order() {
        let mut rng = rng_from_seed(402);
        let w = random_window(&mut rng, Interval::new(0, 2));
        let err = build_wave_table(&w, 9, 1).unwrap_err();
        assert!(matches!(err, Error::WindowTooNarrow { .. }));
    }

    #[test]
    fn series_product_residue_is_exact() {
        let (_, t) = table(403, -8, 9, 5);
        let n = 1;
        let shifted = t.reduced_wave_series(n + 2, 5).unwrap();
        let adj = t.reduced_adjoint_series(n, 5).unwrap();
        // shifted pairing at k0 = 2 via explicit series arithmetic
        let prod = shifted.mul(&adj).shift(2);
        assert_eq!(residue_z(&prod).unwrap(), Rat::zero());
    }
}
