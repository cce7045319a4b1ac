//! Bispectral operators from Darboux chains at the spectrum endpoints.
//!
//! Starting from the free operator `L0 = E + E^{-1}`, chains of functions
//! `(L0 - 2) phi+_j = phi+_{j-1}` and `(L0 + 2) phi-_j = phi-_{j-1}` (with
//! `phi_0 = 0`) span the kernel of a monic difference operator `Q` given by
//! a Casorati-determinant formula. Solving the intertwining relation
//! `Q L0 = L Q` produces the transformed window; the Baker function
//! `Psi_n(x) = Q(x^n) / ((x-1)^{N1} (x+1)^{N2})` is an exact rational
//! eigenfunction, its reflection `x -> 1/x` yields the adjoint up to the
//! per-site constant `c_n = (-1)^{N1} q_0(n)`, and residues of the pairings
//! give orthogonality and the heat coefficients by a third, contour route.
//!
//! Plus-chain members are polynomials in `n` of degree `2j - 1`; minus-chain
//! members are `(-1)^n` times such polynomials. Each Darboux step carries
//! one admixture from the kernel of the relevant factor, realized as a pair
//! of rational coefficients on `{1, n}`; the canonical particular solution
//! of the inhomogeneous step is the one with no constant and no linear term.
//! This parameterization is one concrete chart of the per-step freedom; no
//! claim is made that it matches any external convention.
//!
//! Contour coefficients: with `D = n - m`, the residue at 0 of
//! `x^{D-k} Psi_n Psi*_{m+1}` reproduces the canonical `alpha_k` whenever
//! `n <= m` (and for `k > 2D` when `n > m`). Below the diagonal the Bessel
//! symmetry `I_r = I_{-r}` makes single coefficients contour-inaccessible —
//! only pair sums are determined — so the interior band `0 < k < 2D` is
//! completed through the odd-polynomial structure of `alpha_k` in
//! `n - m - k`, fitted exactly through residue-zone values of the same
//! parity class. Every value is checked against the recurrence oracle in the
//! tests.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, UPoly};
use crate::operator::{solve_intertwining, BandedOperator};
use crate::rational::Rat;
use crate::sequence::{Interval, Seq};
use crate::series::PowerSeries;
use crate::wave::{invert_psi_rows, Provenance, WaveTable};
use crate::window::Window;

/// Darboux data: chain lengths and the per-step kernel admixtures
/// `(c0, c1)` meaning `c0 + c1 n` (times `(-1)^n` for the minus chain).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DarbouxSpec {
    pub n1: usize,
    pub n2: usize,
    pub plus: Vec<(Rat, Rat)>,
    pub minus: Vec<(Rat, Rat)>,
}

impl DarbouxSpec {
    /// Generic small rational parameters, nonsingular on every interval the
    /// acceptance ranges use.
    pub fn generic(n1: usize, n2: usize) -> Self {
        let plus = (1..=n1)
            .map(|j| {
                if j == 1 {
                    (Rat::new(1, 3), Rat::one())
                } else {
                    (Rat::new(1, 4 * j as i64 + 1), Rat::new(1, 4 * j as i64 + 3))
                }
            })
            .collect();
        let minus = (1..=n2)
            .map(|j| {
                if j == 1 {
                    (Rat::new(1, 5), Rat::one())
                } else {
                    (Rat::new(1, 5 * j as i64 + 2), Rat::new(1, 5 * j as i64 + 4))
                }
            })
            .collect();
        DarbouxSpec {
            n1,
            n2,
            plus,
            minus,
        }
    }

    pub fn with_params(n1: usize, n2: usize, plus: Vec<(Rat, Rat)>, minus: Vec<(Rat, Rat)>) -> Result<Self> {
        if plus.len() != n1 || minus.len() != n2 {
            return Err(Error::InvalidArgument(format!(
                "need {n1} plus and {n2} minus admixture pairs, got {} and {}",
                plus.len(),
                minus.len()
            )));
        }
        Ok(DarbouxSpec {
            n1,
            n2,
            plus,
            minus,
        })
    }

    pub fn order(&self) -> usize {
        self.n1 + self.n2
    }
}

/// Chain member: a polynomial in `n` (dense, ascending), possibly twisted
/// by `(-1)^n`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChainFn {
    poly: Vec<Rat>,
    alternating: bool,
}

impl ChainFn {
    pub fn eval(&self, n: i64) -> Rat {
        let x = Rat::from_int(n);
        let mut acc = Rat::zero();
        for c in self.poly.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        if self.alternating && n.rem_euclid(2) == 1 {
            acc = -acc;
        }
        acc
    }

    pub fn tabulate(&self, iv: Interval) -> Seq {
        Seq::tabulate(iv, |n| self.eval(n))
    }
}

/// Solve `P(n+1) - 2 P(n) + P(n-1) = rhs(n)` for the canonical polynomial
/// `P` with zero constant and linear coefficients.
fn discrete_laplace_solve(rhs: &[Rat]) -> Vec<Rat> {
    let d = rhs.len(); // rhs degree is d - 1
    let mut p = vec![Rat::zero(); d + 2];
    // Delta-nabla of n^j contributes 2 C(j, i) to n^i for j - i >= 2 even.
    for t in (0..d).rev() {
        let mut acc = rhs.get(t).cloned().unwrap_or_else(Rat::zero);
        for j in (t + 4..d + 2).step_by(2) {
            if !p[j].is_zero() {
                acc -= Rat::from_int(2) * crate::rational::binomial(j as i64, (j - t) as i64)
                    * p[j].clone();
            }
        }
        let lead = Rat::from_int(((t + 2) * (t + 1)) as i64);
        p[t + 2] = acc / lead;
    }
    while p.last().map_or(false, Rat::is_zero) {
        p.pop();
    }
    p
}

fn negate_poly(p: &[Rat]) -> Vec<Rat> {
    p.iter().map(|c| -c).collect()
}

/// Closed-form chain functions of a spec: plus chain then minus chain.
pub fn chain_functions(spec: &DarbouxSpec) -> Vec<ChainFn> {
    let mut chains = Vec::with_capacity(spec.order());
    let mut prev: Option<Vec<Rat>> = None;
    for (c0, c1) in &spec.plus {
        let mut poly = match &prev {
            None => vec![],
            Some(p) => discrete_laplace_solve(p),
        };
        if poly.is_empty() {
            poly = vec![Rat::zero(); 2];
        }
        while poly.len() < 2 {
            poly.push(Rat::zero());
        }
        poly[0] = &poly[0] + c0;
        poly[1] = &poly[1] + c1;
        chains.push(ChainFn {
            poly: poly.clone(),
            alternating: false,
        });
        prev = Some(poly);
    }
    // minus chain: phi-_j = (-1)^n h_j with Delta-nabla h_j = -h_{j-1}
    let mut prev: Option<Vec<Rat>> = None;
    for (c0, c1) in &spec.minus {
        let mut poly = match &prev {
            None => vec![],
            Some(p) => discrete_laplace_solve(&negate_poly(p)),
        };
        if poly.is_empty() {
            poly = vec![Rat::zero(); 2];
        }
        while poly.len() < 2 {
            poly.push(Rat::zero());
        }
        poly[0] = &poly[0] + c0;
        poly[1] = &poly[1] + c1;
        chains.push(ChainFn {
            poly: poly.clone(),
            alternating: true,
        });
        prev = Some(poly);
    }
    chains
}

/// Tabulate both chains on an interval and verify the chain equations by
/// substitution at every interior site.
pub fn build_phi_chains(spec: &DarbouxSpec, iv: Interval) -> (Vec<Seq>, Vec<Seq>) {
    let chains = chain_functions(spec);
    let (plus, minus) = chains.split_at(spec.n1);
    let check = |fs: &[ChainFn], sign: i64| {
        for (j, f) in fs.iter().enumerate() {
            for n in iv.lo + 1..iv.hi {
                // (L0 -+ 2) phi_j = phi_{j-1}
                let lhs = f.eval(n + 1) + f.eval(n - 1) - Rat::from_int(2 * sign) * f.eval(n);
                let rhs = if j == 0 {
                    Rat::zero()
                } else {
                    fs[j - 1].eval(n)
                };
                assert_eq!(lhs, rhs, "chain equation failed at step {} site {n}", j + 1);
            }
        }
    };
    check(plus, 1);
    check(minus, -1);
    (
        plus.iter().map(|f| f.tabulate(iv)).collect(),
        minus.iter().map(|f| f.tabulate(iv)).collect(),
    )
}

/// Determinant by cofactor expansion; rows are small here (<= 5).
fn det(mat: &[Vec<Rat>]) -> Rat {
    let n = mat.len();
    if n == 0 {
        return Rat::one();
    }
    if n == 1 {
        return mat[0][0].clone();
    }
    let mut acc = Rat::zero();
    for (j, pivot) in mat[0].iter().enumerate() {
        if pivot.is_zero() {
            continue;
        }
        let minor: Vec<Vec<Rat>> = mat[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let term = pivot * &det(&minor);
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// The monic order-`N` operator annihilating the chains, via the Casorati
/// (discrete Wronskian) formula, with coefficients on `iv`.
pub fn casorati_q(chains: &[ChainFn], iv: Interval) -> Result<BandedOperator> {
    let n_ord = chains.len();
    if n_ord == 0 {
        return Ok(BandedOperator::identity(iv));
    }
    // forward differences of each chain at n: rows i = 0..N
    let diff_table = |n: i64| -> Vec<Vec<Rat>> {
        (0..=n_ord)
            .map(|i| {
                chains
                    .iter()
                    .map(|f| {
                        let mut acc = Rat::zero();
                        for r in 0..=i {
                            let c = crate::rational::binomial(i as i64, r as i64);
                            let sign = if (i - r) % 2 == 0 { Rat::one() } else { -Rat::one() };
                            acc += sign * c * f.eval(n + r as i64);
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    };
    let mut coeffs: Vec<Vec<Rat>> = vec![Vec::with_capacity(iv.len()); n_ord + 1];
    for n in iv.iter() {
        let rows = diff_table(n);
        let denom = det(&rows[..n_ord].to_vec());
        if denom.is_zero() {
            return Err(Error::SingularCasorati { n });
        }
        // cofactor expansion along the (virtual) last column holding
        // Delta^i f: Q = sum_i (-1)^{i+N} minor_i / denom * Delta^i
        let mut delta_coeffs = Vec::with_capacity(n_ord + 1);
        for i in 0..=n_ord {
            let minor: Vec<Vec<Rat>> = rows
                .iter()
                .enumerate()
                .filter(|(r, _)| *r != i)
                .map(|(_, row)| row.clone())
                .collect();
            let sign = if (i + n_ord) % 2 == 0 { Rat::one() } else { -Rat::one() };
            delta_coeffs.push(sign * det(&minor) / denom.clone());
        }
        // convert sum_i c_i Delta^i to shift coefficients
        for r in 0..=n_ord {
            let mut acc = Rat::zero();
            for (i, ci) in delta_coeffs.iter().enumerate().skip(r) {
                let sign = if (i - r) % 2 == 0 { Rat::one() } else { -Rat::one() };
                acc += sign * crate::rational::binomial(i as i64, r as i64) * ci.clone();
            }
            coeffs[r].push(acc);
        }
    }
    debug_assert!(coeffs[n_ord].iter().all(Rat::is_one), "Q must be monic");
    Ok(BandedOperator::from_offsets(
        coeffs
            .into_iter()
            .enumerate()
            .map(|(r, vals)| (r as i64, Seq::new(iv.lo, vals))),
    ))
}

/// A constructed Darboux operator: the annihilator `Q` (on a padded
/// interval) and the transformed window.
#[derive(Clone, Debug)]
pub struct Darboux {
    pub spec: DarbouxSpec,
    pub q: BandedOperator,
    pub window: Window,
}

/// Build `Q` and extract `L` with `Q L0 = L Q` on `iv`.
pub fn extract_l(spec: &DarbouxSpec, iv: Interval) -> Result<Darboux> {
    let n_ord = spec.order();
    let q_iv = Interval::new(iv.lo - 2, iv.hi + 2);
    let chains = chain_functions(spec);
    let q = casorati_q(&chains, q_iv)?;
    let wide = Interval::new(q_iv.lo - 2, q_iv.hi + n_ord as i64 + 2);
    let l0 = BandedOperator::from_window(&Window::free(wide));
    let rhs = q.compose(&l0)?;
    let x = solve_intertwining(&q, &rhs, (-1, 1))?;
    let b = x
        .coeff(0)
        .ok_or_else(|| Error::EmptyInterior("extracted diagonal".into()))?
        .restrict(iv);
    let a = x
        .coeff(-1)
        .ok_or_else(|| Error::EmptyInterior("extracted lower band".into()))?
        .restrict(iv);
    let window = Window::from_seqs(a, b)?;
    Ok(Darboux {
        spec: spec.clone(),
        q,
        window,
    })
}

/// Exact rational Baker function data: per-site numerator polynomials
/// `B_n(x) = sum_j q_j(n) x^j`, so `Psi_n(x) = x^n B_n(x) / ((x-1)^{N1}
/// (x+1)^{N2})`.
#[derive(Clone, Debug)]
pub struct BakerFunction {
    pub n1: usize,
    pub n2: usize,
    nums: BTreeMap<i64, LaurentPoly>,
    interval: Interval,
}

impl BakerFunction {
    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn numerator(&self, n: i64) -> &LaurentPoly {
        &self.nums[&n]
    }

    /// The denominator `(x-1)^{N1} (x+1)^{N2}` as a polynomial.
    pub fn denominator(&self) -> LaurentPoly {
        let xm1 = LaurentPoly::from_terms([(1, Rat::one()), (0, -Rat::one())]);
        let xp1 = LaurentPoly::from_terms([(1, Rat::one()), (0, Rat::one())]);
        &xm1.pow(self.n1 as u32) * &xp1.pow(self.n2 as u32)
    }

    /// The adjoint-relation constant: `Psi_n(1/x) = c_n x Psi*_{n+1}(x)`
    /// with `c_n = (-1)^{N1} q_0(n)`.
    pub fn c_constant(&self, n: i64) -> Result<Rat> {
        let q0 = self.nums[&n].coeff(0);
        if q0.is_zero() {
            return Err(Error::InvalidArgument(format!(
                "degenerate Baker data: q_0({n}) = 0"
            )));
        }
        Ok(if self.n1 % 2 == 0 { q0 } else { -q0 })
    }

    /// Expand the reduced wave and adjoint-wave series of the Baker function
    /// to `depth`, as an exact wave table. The adjoint rows come from the
    /// reflection relation, not from series inversion.
    pub fn wave_table(&self, depth: usize) -> Result<WaveTable> {
        let iv = self.interval;
        let dpoly = {
            // (1 - w)^{N1} (1 + w)^{N2}, constant term 1
            let a = LaurentPoly::from_terms([(0, Rat::one()), (1, -Rat::one())]);
            let b = LaurentPoly::from_terms([(0, Rat::one()), (1, Rat::one())]);
            &a.pow(self.n1 as u32) * &b.pow(self.n2 as u32)
        };
        let den = PowerSeries::from_poly(&dpoly, depth + 1);
        let den_inv = den.reciprocal()?;
        let n_ord = (self.n1 + self.n2) as i64;
        let mut psi_rows: Vec<Vec<Rat>> = vec![Vec::new(); depth + 1];
        let mut star_rows: Vec<Vec<Rat>> = vec![Vec::new(); depth + 1];
        for n in iv.iter() {
            let bpoly = &self.nums[&n];
            // psi: reversed numerator  w^{N} B_n(1/w)
            let rev = bpoly.reflect().shift(n_ord);
            let psi = PowerSeries::from_poly(&rev, depth + 1).mul(&den_inv);
            // psi* at n+1: B_n(w) / q_0(n), same denominator
            let q0 = bpoly.coeff(0);
            if q0.is_zero() {
                return Err(Error::InvalidArgument(format!(
                    "degenerate Baker data: q_0({n}) = 0"
                )));
            }
            let star = PowerSeries::from_poly(bpoly, depth + 1)
                .mul(&den_inv)
                .mul(&PowerSeries::constant(q0.recip(), depth + 1));
            for k in 0..=depth {
                psi_rows[k].push(psi.coeff(k));
                star_rows[k].push(star.coeff(k));
            }
        }
        let psi: Vec<Seq> = psi_rows.into_iter().map(|v| Seq::new(iv.lo, v)).collect();
        let star: Vec<Seq> = star_rows
            .into_iter()
            .map(|v| Seq::new(iv.lo + 1, v))
            .collect();
        Ok(WaveTable::from_rows(0, psi, star, Provenance::DarbouxExact))
    }

    /// Pairing numerator `B_n(x) x^{N} B_m(1/x)` and scale `1/q_0(m)`:
    /// `Psi_n Psi*_{m+1} = x^{n-m-1} P(x) / (q_0(m) D(x)^2)` with `P`
    /// an ordinary polynomial of degree `2N`.
    fn pairing_numerator(&self, n: i64, m: i64) -> Result<(LaurentPoly, Rat)> {
        let n_ord = (self.n1 + self.n2) as i64;
        let q0 = self.nums[&m].coeff(0);
        if q0.is_zero() {
            return Err(Error::InvalidArgument(format!(
                "degenerate Baker data: q_0({m}) = 0"
            )));
        }
        let p = &self.nums[&n] * &self.nums[&m].reflect().shift(n_ord);
        Ok((p, q0))
    }

    /// Series of `P(x) / (q_0(m) D(x)^2)` to `depth` coefficients.
    fn pairing_series(&self, n: i64, m: i64, depth: usize) -> Result<PowerSeries> {
        let (p, q0) = self.pairing_numerator(n, m)?;
        let d = self.denominator();
        let d2 = PowerSeries::from_poly(&(&d * &d), depth).reciprocal()?;
        Ok(PowerSeries::from_poly(&p, depth)
            .mul(&d2)
            .mul(&PowerSeries::constant(q0.recip(), depth)))
    }

    /// Residue at the origin of `Psi_n Psi*_{m+1}`: the orthogonality
    /// pairing, which must be `delta_{n,m}`.
    pub fn orthogonality_entry(&self, n: i64, m: i64) -> Result<Rat> {
        if n > m {
            return Ok(Rat::zero()); // valuation n - m - 1 >= 0: no residue
        }
        let depth = (m - n) as usize + 1;
        let series = self.pairing_series(n, m, depth)?;
        Ok(series.coeff((m - n) as usize))
    }

    /// Residues of `Psi_n Psi*_{m+1} dx` at `x = 1` and `x = -1`; both must
    /// vanish (the spectral curve has cusps there).
    pub fn endpoint_residues(&self, n: i64, m: i64) -> Result<(Rat, Rat)> {
        let (p, q0) = self.pairing_numerator(n, m)?;
        let scale = q0.recip();
        let mut out = Vec::with_capacity(2);
        for root in [1i64, -1] {
            let mult = if root == 1 { 2 * self.n1 } else { 2 * self.n2 };
            if mult == 0 {
                out.push(Rat::zero());
                continue;
            }
            // residue of x^{n-m-1} P(x) / (q0 (x-1)^{2N1} (x+1)^{2N2})
            // at x = root: coefficient of y^{mult-1} in the regular part
            // expanded around root.
            let other_mult = if root == 1 { 2 * self.n2 } else { 2 * self.n1 };
            let other_root = -root;
            let shift_p = p.taylor_shift(&Rat::from_int(root));
            let mut series = PowerSeries::from_poly(&shift_p, mult);
            // multiply by (root + y)^{n-m-1}
            let e = n - m - 1;
            let base = LaurentPoly::from_terms([(0, Rat::from_int(root)), (1, Rat::one())]);
            if e >= 0 {
                series = series.mul(&PowerSeries::from_poly(&base.pow(e as u32), mult));
            } else {
                let inv = PowerSeries::from_poly(&base.pow((-e) as u32), mult).reciprocal()?;
                series = series.mul(&inv);
            }
            // divide by (y + root - other_root)^{other_mult}
            let offset = LaurentPoly::from_terms([
                (0, Rat::from_int(root - other_root)),
                (1, Rat::one()),
            ]);
            let inv = PowerSeries::from_poly(&offset.pow(other_mult as u32), mult).reciprocal()?;
            series = series.mul(&inv);
            out.push(series.coeff(mult - 1) * scale.clone());
        }
        Ok((out[0].clone(), out[1].clone()))
    }

    /// Residue-zone contour coefficient: the residue at 0 of
    /// `x^{n-m-k} Psi_n Psi*_{m+1}`, i.e. the coefficient of `x^{k-2(n-m)}`
    /// in the pairing series.
    fn contour_raw(&self, k: i64, n: i64, m: i64) -> Result<Rat> {
        let idx = k - 2 * (n - m);
        if idx < 0 {
            return Ok(Rat::zero());
        }
        let series = self.pairing_series(n, m, idx as usize + 1)?;
        Ok(series.coeff(idx as usize))
    }

    /// Heat coefficient by the contour route (see module docs for the
    /// below-diagonal completion).
    pub fn alpha_contour(&self, k: usize, n: i64, m: i64) -> Result<Rat> {
        if k == 0 {
            return Ok(Rat::one());
        }
        let k = k as i64;
        let d = n - m;
        if d <= 0 {
            return self.contour_raw(k, n, m);
        }
        if k == d {
            return Ok(Rat::zero());
        }
        if k > 2 * d {
            return self.contour_raw(k, n, m);
        }
        if k == 2 * d {
            return Ok(self.contour_raw(k, n, m)? - Rat::one());
        }
        // interior band 0 < k < 2d, k != d: evaluate the odd class
        // polynomial fitted through residue-zone values
        let n_fit = self.n1.max(self.n2);
        if n_fit == 0 {
            return Ok(Rat::zero());
        }
        // fit points: orders kk > 2d with kk = k mod 2
        let mut pts = Vec::with_capacity(n_fit);
        let mut kk = 2 * d + 1;
        if (kk - k).rem_euclid(2) == 1 {
            kk += 1;
        }
        while pts.len() < n_fit {
            let val = self.contour_raw(kk, n, m)?;
            pts.push((Rat::from_int(d - kk), val));
            kk += 2;
        }
        let coeffs = fit_odd_polynomial(&pts)?;
        Ok(eval_odd_polynomial(&coeffs, &Rat::from_int(d - k)))
    }
}

/// Solve for the odd polynomial `sum_r c_r t^{2r+1}` through the given
/// `(t, value)` points; the `|t|` must be distinct and nonzero.
pub fn fit_odd_polynomial(pts: &[(Rat, Rat)]) -> Result<Vec<Rat>> {
    let n = pts.len();
    let mut mat: Vec<Vec<Rat>> = Vec::with_capacity(n);
    let mut rhs: Vec<Rat> = Vec::with_capacity(n);
    for (t, v) in pts {
        let mut row = Vec::with_capacity(n);
        let t2 = t * t;
        let mut p = t.clone();
        for _ in 0..n {
            row.push(p.clone());
            p = p * t2.clone();
        }
        mat.push(row);
        rhs.push(v.clone());
    }
    solve_linear(mat, rhs).ok_or_else(|| Error::InvalidArgument(
        "odd-polynomial fit points are degenerate".into(),
    ))
}

pub fn eval_odd_polynomial(coeffs: &[Rat], t: &Rat) -> Rat {
    let t2 = t * t;
    let mut acc = Rat::zero();
    for c in coeffs.iter().rev() {
        acc = acc * t2.clone() + c.clone();
    }
    acc * t.clone()
}

/// Gaussian elimination over the rationals; `None` on a singular system.
fn solve_linear(mut mat: Vec<Vec<Rat>>, mut rhs: Vec<Rat>) -> Option<Vec<Rat>> {
    let n = mat.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !mat[r][col].is_zero())?;
        mat.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = mat[col][col].recip();
        for r in col + 1..n {
            if mat[r][col].is_zero() {
                continue;
            }
            let f = &mat[r][col] * &inv;
            for c in col..n {
                let sub = &f * &mat[col][c];
                mat[r][c] = &mat[r][c] - &sub;
            }
            let sub = &f * &rhs[col];
            rhs[r] = &rhs[r] - &sub;
        }
    }
    let mut out = vec![Rat::zero(); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row].clone();
        for c in row + 1..n {
            acc -= &mat[row][c] * &out[c];
        }
        out[row] = acc / mat[row][row].clone();
    }
    Some(out)
}

/// Build the Baker numerators on `iv` from a constructed Darboux operator.
pub fn baker(dx: &Darboux, iv: Interval) -> Result<BakerFunction> {
    let n_ord = dx.spec.order() as i64;
    let mut nums = BTreeMap::new();
    for n in iv.iter() {
        let mut p = LaurentPoly::zero();
        for j in 0..=n_ord {
            let c = match dx.q.coeff(j) {
                Some(s) => s.get(n).cloned().ok_or_else(|| Error::IntervalInsufficient {
                    what: format!("Baker numerator at n = {n}"),
                    need_lo: n,
                    need_hi: n,
                    have_lo: s.interval().lo,
                    have_hi: s.interval().hi,
                })?,
                None => Rat::zero(),
            };
            p.set(j, c);
        }
        nums.insert(n, p);
    }
    Ok(BakerFunction {
        n1: dx.spec.n1,
        n2: dx.spec.n2,
        nums,
        interval: iv,
    })
}

/// Verify `L Psi_n = (x + 1/x) Psi_n` as a cleared-denominator polynomial
/// identity at every interior site of the Baker data.
pub fn eigen_identity_holds(dx: &Darboux, bk: &BakerFunction) -> bool {
    let iv = bk.interval();
    let x2 = LaurentPoly::monomial(2, Rat::one());
    let x2p1 = LaurentPoly::from_terms([(2, Rat::one()), (0, Rat::one())]);
    for n in iv.lo + 1..iv.hi {
        let (a_n, b_n) = match (dx.window.a(n), dx.window.b(n)) {
            (Some(a), Some(b)) => (a, b),
            _ => continue,
        };
        // x^2 B_{n+1} + b_n x B_n + a_n B_{n-1} = (x^2 + 1) B_n
        let lhs = &(&(&x2 * bk.numerator(n + 1))
            + &bk.numerator(n).shift(1).scale(b_n))
            + &bk.numerator(n - 1).scale(a_n);
        let rhs = &x2p1 * bk.numerator(n);
        if lhs != rhs {
            return false;
        }
    }
    true
}

/// Orthogonality over index ranges: residues at 0 must form the identity
/// matrix, and the endpoint residues must vanish.
pub fn orthogonality_check(bk: &BakerFunction, n_range: Interval, m_range: Interval) -> Result<bool> {
    for n in n_range.iter() {
        for m in m_range.iter() {
            let entry = bk.orthogonality_entry(n, m)?;
            let expect = if n == m { Rat::one() } else { Rat::zero() };
            if entry != expect {
                return Ok(false);
            }
            let (r1, r2) = bk.endpoint_residues(n, m)?;
            if !r1.is_zero() || !r2.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The spectral symbol `f(x) = (x-1)^{2N1+1} (x+1)^{2N2+1} / x^{N1+N2+1}`.
pub fn f_symbol(n1: usize, n2: usize) -> LaurentPoly {
    let xm1 = LaurentPoly::from_terms([(1, Rat::one()), (0, -Rat::one())]);
    let xp1 = LaurentPoly::from_terms([(1, Rat::one()), (0, Rat::one())]);
    let num = &xm1.pow(2 * n1 as u32 + 1) * &xp1.pow(2 * n2 as u32 + 1);
    num.shift(-(n1 as i64 + n2 as i64 + 1))
}

/// Decide membership in the ring generated by `x + 1/x` and the spectral
/// symbol; on success returns the witness `(P, R)` with
/// `h = P(u) + R(u) f`.
pub fn ring_membership(h: &LaurentPoly, n1: usize, n2: usize) -> (bool, Option<(UPoly, UPoly)>) {
    let (p, anti) = h.symmetric_decompose();
    if anti.is_zero() {
        return (true, Some((p, UPoly::zero())));
    }
    let f = f_symbol(n1, n2);
    match anti.div_exact(&f) {
        None => (false, None),
        Some(q) => match UPoly::from_symmetric(&q) {
            None => (false, None),
            Some(r) => (true, Some((p, r))),
        },
    }
}

/// The commuting partner `M` with `M Q = Q f(E)`, together with its
/// certification on the interior.
#[derive(Clone, Debug)]
pub struct CommutingPair {
    pub m_op: BandedOperator,
    pub commutes: bool,
    pub curve_matches: bool,
}

pub fn commuting_pair(spec: &DarbouxSpec, iv: Interval) -> Result<CommutingPair> {
    let n_ord = spec.order() as i64;
    let pad = 2 * n_ord + 6;
    let big = Interval::new(iv.lo - pad, iv.hi + pad);
    let dx = extract_l(spec, big)?;
    let f = f_symbol(spec.n1, spec.n2);
    let wide = Interval::new(big.lo - 2 * n_ord - 4, big.hi + 2 * n_ord + 4);
    let f_e = BandedOperator::from_symbol(&f, wide);
    let rhs = dx.q.compose(&f_e)?;
    let m_op = solve_intertwining(&dx.q, &rhs, (-(n_ord + 1), n_ord + 1))?;
    let l = BandedOperator::from_window(&dx.window);
    let commutes = m_op.commutator(&l)?.is_zero_on_interior();
    // M^2 = (L - 2)^{2N1+1} (L + 2)^{2N2+1}
    let m2 = m_op.compose(&m_op)?;
    let ident = BandedOperator::identity(dx.window.interval());
    let lm2 = l.sub(&ident.scale(&Rat::from_int(2)));
    let lp2 = l.add(&ident.scale(&Rat::from_int(2)));
    let mut curve = lm2.clone();
    for _ in 0..2 * spec.n1 {
        curve = curve.compose(&lm2)?;
    }
    for _ in 0..2 * spec.n2 + 1 {
        curve = curve.compose(&lp2)?;
    }
    let (curve_matches, common) = m2.eq_on_interior(&curve);
    let curve_matches = curve_matches && !common.is_empty();
    Ok(CommutingPair {
        m_op,
        commutes,
        curve_matches,
    })
}
