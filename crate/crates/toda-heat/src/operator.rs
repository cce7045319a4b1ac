//! Banded difference operators on finite windows.
//!
//! An operator is a map from shift offsets `j` to coefficient sequences
//! `mu_j(n)`, each on its own explicit interval: `(M f)(n) = sum_j mu_j(n)
//! f(n + j)`. An offset absent from the band is zero everywhere; an offset
//! that is present is known only on its interval. All operations compute the
//! largest provable validity intervals instead of assuming them, so interior
//! shrinking under composition is tracked, never guessed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::LaurentPoly;
use crate::rational::Rat;
use crate::sequence::{Interval, Seq};
use crate::window::Window;

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct BandedOperator {
    band: BTreeMap<i64, Seq>,
}

impl BandedOperator {
    pub fn zero() -> Self {
        BandedOperator { band: BTreeMap::new() }
    }

    pub fn identity(iv: Interval) -> Self {
        BandedOperator::from_offsets([(0, Seq::constant(Rat::one(), iv))])
    }

    /// The shift `E^k` on `iv`.
    pub fn shift(k: i64, iv: Interval) -> Self {
        BandedOperator::from_offsets([(k, Seq::constant(Rat::one(), iv))])
    }

    /// Forward difference `E - Id`.
    pub fn forward_difference(iv: Interval) -> Self {
        BandedOperator::from_offsets([
            (1, Seq::constant(Rat::one(), iv)),
            (0, Seq::constant(-Rat::one(), iv)),
        ])
    }

    /// Backward difference `Id - E^{-1}`.
    pub fn backward_difference(iv: Interval) -> Self {
        BandedOperator::from_offsets([
            (0, Seq::constant(Rat::one(), iv)),
            (-1, Seq::constant(-Rat::one(), iv)),
        ])
    }

    pub fn from_offsets<I: IntoIterator<Item = (i64, Seq)>>(offsets: I) -> Self {
        let mut band = BTreeMap::new();
        for (j, seq) in offsets {
            if !seq.interval().is_empty() {
                band.insert(j, seq);
            }
        }
        BandedOperator { band }
    }

    /// The tridiagonal operator `E + b_n Id + a_n E^{-1}` of a window.
    pub fn from_window(w: &Window) -> Self {
        let iv = w.interval();
        BandedOperator::from_offsets([
            (1, Seq::constant(Rat::one(), iv)),
            (0, w.b_seq().clone()),
            (-1, w.a_seq().clone()),
        ])
    }

    /// Constant-coefficient operator `p(E)` on `iv`.
    pub fn from_symbol(p: &LaurentPoly, iv: Interval) -> Self {
        BandedOperator::from_offsets(
            p.terms().map(|(e, c)| (e, Seq::constant(c.clone(), iv))),
        )
    }

    pub fn offsets(&self) -> impl Iterator<Item = i64> + '_ {
        self.band.keys().copied()
    }

    pub fn coeff(&self, j: i64) -> Option<&Seq> {
        self.band.get(&j)
    }

    /// Support `[K-, K+]` of the band; `None` for the zero operator.
    pub fn support(&self) -> Option<(i64, i64)> {
        let lo = self.band.keys().next()?;
        let hi = self.band.keys().next_back()?;
        Some((*lo, *hi))
    }

    /// Drop offsets whose coefficients vanish identically.
    pub fn pruned(&self) -> Self {
        BandedOperator {
            band: self
                .band
                .iter()
                .filter(|(_, s)| !s.is_zero())
                .map(|(j, s)| (*j, s.clone()))
                .collect(),
        }
    }

    /// True when every stored coefficient vanishes on its interval.
    pub fn is_zero_on_interior(&self) -> bool {
        self.band.values().all(Seq::is_zero)
    }

    /// Intersection of all per-offset intervals (the interior on which the
    /// whole band is known).
    pub fn common_interval(&self) -> Interval {
        self.band
            .values()
            .map(Seq::interval)
            .fold(Interval::new(i64::MIN / 4, i64::MAX / 4), |acc, iv| acc.intersect(&iv))
    }

    /// Apply to a sequence: `(M f)(n) = sum_j mu_j(n) f(n+j)`, on the largest
    /// interval where every term is known.
    pub fn apply(&self, f: &Seq) -> Result<Seq> {
        let mut iv = Interval::new(i64::MIN / 4, i64::MAX / 4);
        for (j, c) in &self.band {
            iv = iv.intersect(&c.interval());
            iv = iv.intersect(&f.interval().translate(-j));
        }
        if iv.is_empty() {
            return Err(Error::EmptyInterior(format!(
                "operator applied to sequence on {}",
                f.interval()
            )));
        }
        Ok(Seq::tabulate(iv, |n| {
            let mut acc = Rat::zero();
            for (j, c) in &self.band {
                acc += c.at(n) * f.at(n + j);
            }
            acc
        }))
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut band: BTreeMap<i64, Seq> = BTreeMap::new();
        let offsets: std::collections::BTreeSet<i64> =
            self.band.keys().chain(rhs.band.keys()).copied().collect();
        for j in offsets {
            let seq = match (self.band.get(&j), rhs.band.get(&j)) {
                (Some(x), Some(y)) => x.zip_with(y, |a, b| a + b),
                (Some(x), None) => x.clone(),
                (None, Some(y)) => y.clone(),
                (None, None) => unreachable!(),
            };
            if !seq.interval().is_empty() {
                band.insert(j, seq);
            }
        }
        BandedOperator { band }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return BandedOperator::zero();
        }
        BandedOperator {
            band: self.band.iter().map(|(j, s)| (*j, s.scale(c))).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rat::one())
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    /// Operator product `self ∘ rhs`. The coefficient of `E^t` at `n` is
    /// `sum_{s+j=t} p_s(n) q_j(n+s)`, valid where every contributing term is
    /// known.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        if self.band.is_empty() || rhs.band.is_empty() {
            return Ok(BandedOperator::zero());
        }
        let mut out: BTreeMap<i64, (Interval, Vec<(i64, i64)>)> = BTreeMap::new();
        for (&s, ps) in &self.band {
            for (&j, qj) in &rhs.band {
                let t = s + j;
                let pair_iv = ps.interval().intersect(&qj.interval().translate(-s));
                let entry = out
                    .entry(t)
                    .or_insert_with(|| (Interval::new(i64::MIN / 4, i64::MAX / 4), Vec::new()));
                entry.0 = entry.0.intersect(&pair_iv);
                entry.1.push((s, j));
            }
        }
        let mut band = BTreeMap::new();
        for (t, (iv, pairs)) in out {
            if iv.is_empty() {
                continue;
            }
            let seq = Seq::tabulate(iv, |n| {
                let mut acc = Rat::zero();
                for &(s, j) in &pairs {
                    acc += self.band[&s].at(n) * rhs.band[&j].at(n + s);
                }
                acc
            });
            band.insert(t, seq);
        }
        if band.is_empty() {
            return Err(Error::EmptyInterior(
                "composition has no offset with a nonempty interval".into(),
            ));
        }
        Ok(BandedOperator { band })
    }

    /// Commutator `[self, rhs] = self rhs - rhs self`.
    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        Ok(self.compose(rhs)?.sub(&rhs.compose(self)?))
    }

    /// Band restricted to offsets `>= 0`.
    pub fn positive_part(&self) -> Self {
        BandedOperator {
            band: self.band.range(0..).map(|(j, s)| (*j, s.clone())).collect(),
        }
    }

    /// Band restricted to offsets `<= -1`.
    pub fn negative_part(&self) -> Self {
        BandedOperator {
            band: self.band.range(..0).map(|(j, s)| (*j, s.clone())).collect(),
        }
    }

    /// Coefficient sequence of `E^{-1}` (zero on the common interval when the
    /// offset is absent).
    pub fn res_e(&self) -> Seq {
        match self.band.get(&-1) {
            Some(s) => s.clone(),
            None => Seq::constant(Rat::zero(), self.common_interval()),
        }
    }

    /// Equality on the intersection of valid intervals, offset by offset;
    /// absent offsets compare as zero. Returns the overall comparison
    /// interval alongside the verdict.
    pub fn eq_on_interior(&self, rhs: &Self) -> (bool, Interval) {
        let diff = self.sub(rhs);
        let iv = diff.common_interval();
        (diff.is_zero_on_interior(), iv)
    }

    /// Evaluate a polynomial in `self` by Horner's rule (`p` must have only
    /// nonnegative exponents). `Id` is taken on `self`'s common interval.
    pub fn poly_eval(&self, p: &LaurentPoly) -> Result<Self> {
        assert!(p.valuation().map_or(true, |v| v >= 0), "needs a polynomial");
        let iv = self.common_interval();
        let deg = match p.degree() {
            None => return Ok(BandedOperator::zero()),
            Some(d) => d,
        };
        let mut acc = BandedOperator::zero();
        for e in (0..=deg).rev() {
            if acc.band.is_empty() {
                // skip the multiply while the accumulator is still zero
            } else {
                acc = acc.compose(self)?;
            }
            let c = p.coeff(e);
            if !c.is_zero() {
                acc = acc.add(&BandedOperator::identity(iv).scale(&c));
            }
        }
        Ok(acc)
    }
}

/// `L^k` for the window's tridiagonal operator; support `[-k, k]`, interior
/// shrinking by one site per side and per power.
pub fn operator_power(w: &Window, k: u32) -> Result<BandedOperator> {
    let l = BandedOperator::from_window(w);
    if k == 0 {
        return Ok(BandedOperator::identity(w.interval()));
    }
    let mut acc = l.clone();
    for _ in 1..k {
        acc = acc.compose(&l)?;
    }
    Ok(acc)
}

/// Solve `X * lhs = rhs` for a banded `X` with the declared support, by
/// back-substitution from the top offset of `lhs` (whose leading coefficient
/// must not vanish on the needed interval). The candidate is then verified
/// against `rhs` on the full common interior; any mismatch means no banded
/// solution with that support exists.
pub fn solve_intertwining(
    lhs: &BandedOperator,
    rhs: &BandedOperator,
    support: (i64, i64),
) -> Result<BandedOperator> {
    let (k_min, k_max) = support;
    assert!(k_min <= k_max, "empty unknown support");
    let (_, q_top) = lhs
        .support()
        .ok_or_else(|| Error::EmptyInterior("lhs factor is zero".into()))?;
    let lead = lhs.coeff(q_top).expect("top offset exists");

    let mut x = BandedOperator::zero();
    for s in (k_min..=k_max).rev() {
        let t = s + q_top;
        // interval where x_s(n) is computable
        let mut iv = lead.interval().translate(-s);
        if let Some(r) = rhs.coeff(t) {
            iv = iv.intersect(&r.interval());
        } else {
            // rhs has no E^t coefficient: treat as zero on a wide interval
        }
        for s2 in (s + 1)..=k_max {
            if let Some(xs2) = x.coeff(s2) {
                iv = iv.intersect(&xs2.interval());
                if let Some(q) = lhs.coeff(t - s2) {
                    iv = iv.intersect(&q.interval().translate(-s2));
                }
            }
        }
        if iv.is_empty() {
            return Err(Error::EmptyInterior(format!(
                "no interval left while solving for offset {s}"
            )));
        }
        let mut vals = Vec::with_capacity(iv.len());
        for n in iv.iter() {
            let mut acc = rhs
                .coeff(t)
                .and_then(|r| r.get(n).cloned())
                .unwrap_or_else(Rat::zero);
            for s2 in (s + 1)..=k_max {
                if let (Some(xs2), Some(q)) = (x.coeff(s2), lhs.coeff(t - s2)) {
                    if let (Some(xv), Some(qv)) = (xs2.get(n), q.get(n + s2)) {
                        acc -= xv * qv;
                    }
                }
            }
            let l = lead.at(n + s);
            if l.is_zero() {
                return Err(Error::InconsistentIntertwining { offset: s, n });
            }
            vals.push(acc / l.clone());
        }
        let seq = Seq::new(iv.lo, vals);
        x = x.add(&BandedOperator::from_offsets([(s, seq)]));
    }

    // Verify the full relation, not just the offsets used for substitution.
    let check = x.compose(lhs)?.sub(rhs);
    if !check.is_zero_on_interior() {
        let bad = check
            .band
            .iter()
            .find_map(|(j, s)| s.iter().find(|(_, v)| !v.is_zero()).map(|(n, _)| (*j, n)));
        let (offset, n) = bad.unwrap();
        return Err(Error::InconsistentIntertwining { offset, n });
    }
    Ok(x)
}

/// JSON form per the wire schema: `{offset: [[lo, hi], ["p/q", ...]]}`.
pub fn operator_to_json(op: &BandedOperator) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for j in op.offsets() {
        let seq = op.coeff(j).unwrap();
        let iv = seq.interval();
        let coeffs: Vec<serde_json::Value> = iv
            .iter()
            .map(|n| serde_json::Value::String(seq.at(n).to_string()))
            .collect();
        map.insert(
            j.to_string(),
            serde_json::json!([[iv.lo, iv.hi], coeffs]),
        );
    }
    serde_json::Value::Object(map)
}
