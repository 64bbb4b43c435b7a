//! Truncated Laurent series over `Z/p^m` or `W(F_q)/p^m` with the operators
//! `phi`, `psi` and `sigma_a` of `R((X))`.
//!
//! A series is known modulo `X^prec`. Coefficients are stored densely from the
//! lowest nonzero exponent up to `prec - 1`.

use crate::padic_core::{binomial_row, ilog, ArithError, Coeff, Ring, RingElement};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("pole of order {got} exceeds the tail bound {bound}")]
    TailBound { got: i64, bound: i64 },
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("series rings differ: {0} vs {1}")]
    RingMismatch(String, String),
    #[error("leading coefficient is not a unit")]
    NotInvertible,
}

pub type Result<T> = std::result::Result<T, SeriesError>;

/// Most negative exponent any operator may produce unless told otherwise.
pub const DEFAULT_TAIL_BOUND: i64 = 1 << 16;

/// Precision used for exact Laurent polynomials.
pub const EXACT: i64 = 1 << 50;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedLaurentSeries {
    ring: Ring,
    val: i64,
    coeffs: Vec<Coeff>,
    prec: i64,
}

fn floor_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

impl TruncatedLaurentSeries {
    /// Build from coefficients of `X^val, X^(val+1), ...`, known modulo `X^prec`.
    /// Coefficients at exponents `>= prec` are dropped.
    pub fn new(ring: Ring, val: i64, coeffs: Vec<Coeff>, prec: i64) -> Self {
        let mut s = TruncatedLaurentSeries { ring, val, coeffs, prec };
        s.normalize();
        s
    }

    pub fn from_ints(ring: Ring, val: i64, coeffs: &[i64], prec: i64) -> Self {
        Self::new(ring, val, coeffs.iter().map(|&c| ring.from_int(c)).collect(), prec)
    }

    pub fn zero(ring: Ring, prec: i64) -> Self {
        TruncatedLaurentSeries { ring, val: prec, coeffs: Vec::new(), prec }
    }

    pub fn one(ring: Ring, prec: i64) -> Self {
        Self::monomial(ring, ring.one(), 0, prec)
    }

    pub fn monomial(ring: Ring, c: Coeff, e: i64, prec: i64) -> Self {
        Self::new(ring, e, vec![c], prec)
    }

    /// `(1 + X)^i` for `i >= 0`.
    pub fn one_plus_x_pow(ring: Ring, i: u64, prec: i64) -> Self {
        let row = binomial_row(i as i128, (i + 1) as usize, &ring);
        Self::new(ring, 0, row.into_iter().map(|c| Coeff([c, 0])).collect(), prec)
    }

    fn normalize(&mut self) {
        let keep = (self.prec - self.val).max(0) as usize;
        self.coeffs.truncate(keep);
        let lead = self.coeffs.iter().position(|c| !self.ring.is_zero(*c));
        match lead {
            Some(k) => {
                self.coeffs.drain(..k);
                self.val += k as i64;
            }
            None => {
                self.coeffs.clear();
                self.val = self.prec;
            }
        }
        while let Some(c) = self.coeffs.last() {
            if self.ring.is_zero(*c) {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }
    /// Lowest exponent with nonzero coefficient (`prec` for the certified-zero series).
    pub fn valuation(&self) -> i64 {
        self.val
    }
    pub fn precision(&self) -> i64 {
        self.prec
    }
    pub fn coefficient_precision(&self) -> u32 {
        self.ring.m()
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    /// Coefficient of `X^e`, `None` beyond the precision.
    pub fn get(&self, e: i64) -> Option<Coeff> {
        if e >= self.prec {
            return None;
        }
        if e < self.val {
            return Some(self.ring.zero());
        }
        Some(self.coeffs.get((e - self.val) as usize).copied().unwrap_or(self.ring.zero()))
    }
    /// Coefficient of `X^e` (zero beyond the stored range).
    pub fn coeff(&self, e: i64) -> Coeff {
        self.get(e).unwrap_or(self.ring.zero())
    }
    /// Highest exponent with a stored nonzero coefficient.
    pub fn degree(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.val + self.coeffs.len() as i64 - 1)
        }
    }
    /// `(exponent, coefficient)` pairs of nonzero terms.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Coeff)> + '_ {
        let r = self.ring;
        self.coeffs.iter().enumerate().filter(move |(_, c)| !r.is_zero(**c)).map(move |(i, c)| (self.val + i as i64, *c))
    }

    pub fn truncate(&self, prec: i64) -> Self {
        Self::new(self.ring, self.val, self.coeffs.clone(), prec.min(self.prec))
    }
    /// Same coefficients with a declared precision (used for exact polynomials).
    pub fn with_precision(&self, prec: i64) -> Self {
        Self::new(self.ring, self.val, self.coeffs.clone(), prec)
    }

    /// Equality of all coefficients below `prec`.
    pub fn agrees_with(&self, other: &Self, prec: i64) -> bool {
        let lo = self.val.min(other.val);
        (lo..prec).all(|e| self.coeff(e) == other.coeff(e))
    }

    /// Common ring after dropping to the smaller coefficient precision.
    fn common(&self, other: &Self) -> Result<(Self, Self)> {
        if self.ring == other.ring {
            return Ok((self.clone(), other.clone()));
        }
        let (a, b) = (self.ring, other.ring);
        if a.p() != b.p() || a.f() != b.f() {
            return Err(SeriesError::RingMismatch(a.to_string(), b.to_string()));
        }
        let m = a.m().min(b.m());
        Ok((self.reduce(m)?, other.reduce(m)?))
    }

    /// Reduce coefficients to precision `m`.
    pub fn reduce(&self, m: u32) -> Result<Self> {
        let target = self.ring.with_precision(m)?;
        let coeffs = self.coeffs.iter().map(|&c| self.ring.reduce_into(c, &target)).collect();
        Ok(Self::new(target, self.val, coeffs, self.prec))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.common(other)?;
        let prec = a.prec.min(b.prec);
        let lo = a.val.min(b.val).min(prec);
        let top = a.degree().unwrap_or(lo).max(b.degree().unwrap_or(lo)) + 1;
        let hi = top.min(prec);
        let r = a.ring;
        let coeffs = (lo..hi).map(|e| r.add(a.coeff(e), b.coeff(e))).collect();
        Ok(Self::new(r, lo, coeffs, prec))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let r = self.ring;
        Self::new(r, self.val, self.coeffs.iter().map(|&c| r.neg(c)).collect(), self.prec)
    }

    pub fn scale(&self, c: Coeff) -> Self {
        let r = self.ring;
        Self::new(r, self.val, self.coeffs.iter().map(|&x| r.mul(x, c)).collect(), self.prec)
    }

    /// Multiplication by `X^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self::new(self.ring, self.val + k, self.coeffs.clone(), self.prec + k)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.common(other)?;
        let prec = (a.val + b.prec).min(b.val + a.prec);
        Ok(a.mul_truncated(&b, prec))
    }

    /// Product computed only below `prec` (caller guarantees certification).
    fn mul_truncated(&self, b: &Self, prec: i64) -> Self {
        let r = self.ring;
        let lo = self.val + b.val;
        if prec <= lo || self.is_zero() || b.is_zero() {
            return Self::zero(r, prec);
        }
        let len = ((prec - lo) as usize).min(self.coeffs.len() + b.coeffs.len() - 1);
        let mut out = vec![r.zero(); len];
        for (i, &x) in self.coeffs.iter().enumerate() {
            if i >= len || r.is_zero(x) {
                continue;
            }
            for (j, &y) in b.coeffs.iter().take(len - i).enumerate() {
                out[i + j] = r.add(out[i + j], r.mul(x, y));
            }
        }
        Self::new(r, lo, out, prec)
    }

    /// Multiplicative inverse; the leading coefficient must be a unit.
    pub fn inverse(&self) -> Result<Self> {
        let r = self.ring;
        let lead = self.coeffs.first().copied().ok_or(SeriesError::NotInvertible)?;
        let lead_inv = r.inv(lead).ok_or(SeriesError::NotInvertible)?;
        if self.prec - self.val > 1 << 24 {
            return Err(SeriesError::PrecisionExhausted("inverse of an exact series needs a finite precision".into()));
        }
        let rel = (self.prec - self.val) as usize;
        let mut inv = vec![r.zero(); rel];
        inv[0] = lead_inv;
        for n in 1..rel {
            let mut s = r.zero();
            for k in 1..=n.min(self.coeffs.len() - 1) {
                s = r.add(s, r.mul(self.coeffs[k], inv[n - k]));
            }
            inv[n] = r.neg(r.mul(s, lead_inv));
        }
        Ok(Self::new(r, -self.val, inv, -self.val + rel as i64))
    }

    /// Integer power (negative exponents need a unit leading coefficient).
    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut acc = Self::one(self.ring, EXACT);
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base)?;
        }
        Ok(acc)
    }

    /// `phi(X) = (1+X)^p - 1`.
    pub fn phi(&self) -> Result<Self> {
        self.phi_bounded(DEFAULT_TAIL_BOUND)
    }

    /// `phi`, refusing outputs with exponents below `-tail_bound`.
    pub fn phi_bounded(&self, tail_bound: i64) -> Result<Self> {
        let r = self.ring;
        let p = r.p() as i64;
        let m = r.m() as i64;
        let n = self.prec;
        let loss = (p - 1) * if n >= 0 { n.min(m - 1) } else { m - 1 };
        let out_prec = if n >= EXACT { EXACT } else { p * n - loss };
        let lowest = if self.is_zero() { out_prec } else if self.val >= 0 { self.val } else { p * self.val - (m - 1) * (p - 1) };
        if lowest < -tail_bound {
            return Err(SeriesError::TailBound { got: -lowest, bound: tail_bound });
        }
        if m == 1 {
            let span = self.degree().map_or(0, |d| p * (d - self.val) + 1);
            let mut out = vec![r.zero(); span as usize];
            for (e, c) in self.terms() {
                out[(p * (e - self.val)) as usize] = c;
            }
            return Ok(Self::new(r, p * self.val, out, out_prec));
        }
        let mut acc = Self::zero(r, out_prec);
        // nonnegative part by Horner in phi(X)
        if let Some(deg) = self.degree() {
            if deg >= 0 {
                let phx = phi_of_x(&r, out_prec);
                let mut h = Self::zero(r, out_prec);
                for e in (0..=deg).rev() {
                    h = h.mul_truncated(&phx, out_prec).add(&Self::monomial(r, self.coeff(e), 0, out_prec))?;
                }
                acc = acc.add(&h)?;
            }
        }
        // polar part by Horner in phi(X^-1), an exact Laurent polynomial
        if self.val < 0 {
            let z = phi_of_x_inverse(&r);
            let mut h = Self::zero(r, EXACT);
            // Horner over j = |e| descending: Q = z (c_{-1} + z (c_{-2} + ...))
            for j in (1..=(-self.val)).rev() {
                h = h.add(&Self::monomial(r, self.coeff(-j), 0, EXACT))?;
                h = h.mul(&z)?;
            }
            acc = acc.add(&h.with_precision(out_prec))?;
        }
        Ok(acc)
    }

    /// `psi`: the `x_0` component of `x = sum_i (1+X)^i phi(x_i)`.
    ///
    /// Output precision `floor(N/p) - (m - 1)`.
    pub fn psi(&self) -> Result<Self> {
        let r = self.ring;
        let p = r.p() as i64;
        let m = r.m() as i64;
        let out_prec = floor_div(self.prec, p) - (m - 1);
        if !self.is_zero() && out_prec <= floor_div(self.val, p) - (m - 1) {
            return Err(SeriesError::PrecisionExhausted(format!(
                "psi of a series known mod X^{} has nothing certified",
                self.prec
            )));
        }
        if m == 1 {
            return Ok(psi_mod_p(self, out_prec));
        }
        let comps = decompose_lifted(self)?;
        Ok(comps.into_iter().next().expect("p components").with_precision(out_prec))
    }

    /// All components `x_0, ..., x_{p-1}` of `x = sum_i (1+X)^i phi(x_i)`.
    pub fn frobenius_components(&self) -> Result<Vec<Self>> {
        let r = self.ring;
        let p = r.p() as i64;
        let out_prec = floor_div(self.prec, p) - (r.m() as i64 - 1);
        if r.m() == 1 {
            return Ok(decompose_mod_p(self).into_iter().map(|c| c.with_precision(out_prec)).collect());
        }
        Ok(decompose_lifted(self)?.into_iter().map(|c| c.with_precision(out_prec)).collect())
    }

    /// `sigma_a`: `X -> (1+X)^a - 1`, for `a` a p-adic unit given to finite precision.
    pub fn sigma(&self, a: &RingElement) -> Result<Self> {
        let table = SigmaTable::new(self.ring, a, self.val.min(0), self.prec)?;
        table.apply(self)
    }

    /// `sigma_a` for an exact integer `a` prime to `p`.
    pub fn sigma_int(&self, a: i64) -> Result<Self> {
        let table = SigmaTable::from_int(self.ring, a, self.val.min(0), self.prec)?;
        table.apply(self)
    }

    /// Same as [`sigma_int`](Self::sigma_int) by splitting the input in halves,
    /// which avoids building the full power table. Needs finite precision
    /// when the series has a pole.
    pub fn sigma_int_split(&self, a: i64) -> Result<Self> {
        let r = self.ring;
        if a.rem_euclid(r.p() as i64) == 0 {
            return Err(ArithError::NotUnit.into());
        }
        if self.is_zero() {
            return Ok(self.clone());
        }
        let pole = (-self.val).max(0);
        let (n, exact) = if self.prec >= EXACT {
            if pole > 0 {
                return Err(SeriesError::PrecisionExhausted("sigma of an exact polar series".into()));
            }
            let deg = self.degree().unwrap_or(0);
            // (1+X)^a - 1 has degree a for a > 0; otherwise the image is a series
            if a < 0 {
                return Err(SeriesError::PrecisionExhausted("sigma_a with a < 0 on an exact series".into()));
            }
            (deg * a + 1, true)
        } else {
            (self.prec + pole, false)
        };
        let glen = (n + pole + 2) as usize;
        let row = binomial_row(a as i128, glen + 1, &r);
        let g = TruncatedLaurentSeries::new(r, 1, row[1..].iter().map(|&c| Coeff([c, 0])).collect(), glen as i64 + 1);
        let lifted = self.shift(pole);
        let coeffs: Vec<Coeff> = (0..n.min(lifted.degree().unwrap_or(-1) + 1)).map(|e| lifted.coeff(e)).collect();
        let mut cache = std::collections::HashMap::new();
        let composed = compose_split(&r, &coeffs, &g, n, &mut cache);
        let out = if pole > 0 {
            let ginv = g.inverse()?;
            composed.mul(&ginv.pow(pole)?)?.truncate(self.prec)
        } else {
            composed.truncate(self.prec)
        };
        Ok(if exact { out.with_precision(EXACT) } else { out })
    }
}

/// `sum_k c_k g^k` modulo `X^n`, for `g` of valuation 1.
fn compose_split(
    r: &Ring,
    c: &[Coeff],
    g: &TruncatedLaurentSeries,
    n: i64,
    cache: &mut std::collections::HashMap<usize, TruncatedLaurentSeries>,
) -> TruncatedLaurentSeries {
    if c.len() <= 8 {
        let mut acc = TruncatedLaurentSeries::zero(*r, n);
        for &ck in c.iter().rev() {
            acc = acc.mul_truncated(g, n);
            acc = acc.add(&TruncatedLaurentSeries::monomial(*r, ck, 0, n)).expect("same ring");
        }
        return acc;
    }
    let half = c.len() / 2;
    let lo = compose_split(r, &c[..half], g, n, cache);
    if half as i64 >= n {
        return lo;
    }
    let hi = compose_split(r, &c[half..], g, n - half as i64, cache);
    let stale = cache.get(&half).is_none_or(|s| s.precision() < n);
    if stale {
        let mut acc = TruncatedLaurentSeries::one(*r, n);
        let mut base = g.truncate(n);
        let mut e = half;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_truncated(&base, n);
            }
            base = base.mul_truncated(&base, n);
            e >>= 1;
        }
        cache.insert(half, acc);
    }
    lo.add(&cache[&half].mul_truncated(&hi, n)).expect("same ring")
}

impl fmt::Display for TruncatedLaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}*X^{}", self.ring.fmt_coeff(c), e)?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(X^{}) over {}", self.prec, self.ring)
    }
}

/// `phi(X) = (1+X)^p - 1` as a polynomial.
fn phi_of_x(r: &Ring, prec: i64) -> TruncatedLaurentSeries {
    let p = r.p();
    let row = binomial_row(p as i128, (p + 1) as usize, r);
    let coeffs: Vec<Coeff> = row.into_iter().skip(1).map(|c| Coeff([c, 0])).collect();
    TruncatedLaurentSeries::new(*r, 1, coeffs, prec)
}

/// `phi(X^-1) = X^-p (1 + p u)^-1` with `u = (phi(X) - X^p) / (p X^p)`,
/// a finite Laurent polynomial modulo `p^m`.
fn phi_of_x_inverse(r: &Ring) -> TruncatedLaurentSeries {
    let p = r.p() as i64;
    let m = r.m() as i64;
    let big = EXACT;
    let row = binomial_row(p as i128, p as usize + 1, r);
    // p u = sum_{k=1}^{p-1} C(p,k) X^(k-p)
    let pu = TruncatedLaurentSeries::new(*r, 1 - p, row[1..p as usize].iter().map(|&c| Coeff([c, 0])).collect(), big);
    let mut inv = TruncatedLaurentSeries::one(*r, big);
    let mut term = TruncatedLaurentSeries::one(*r, big);
    let neg_pu = pu.neg();
    for _ in 1..m {
        term = term.mul(&neg_pu).expect("same ring");
        inv = inv.add(&term).expect("same ring");
    }
    inv.shift(-p)
}

fn psi_mod_p(x: &TruncatedLaurentSeries, out_prec: i64) -> TruncatedLaurentSeries {
    let r = x.ring;
    let p = r.p() as i64;
    if x.is_zero() {
        return TruncatedLaurentSeries::zero(r, out_prec);
    }
    let lo = floor_div(x.val, p);
    let top = floor_div(x.degree().unwrap(), p) + 1;
    let len = (out_prec.min(top) - lo).max(0) as usize;
    let mut out = vec![r.zero(); len];
    for (e, c) in x.terms() {
        let q = floor_div(e, p);
        if q >= out_prec {
            break;
        }
        let j = e - q * p;
        let idx = (q - lo) as usize;
        out[idx] = if j % 2 == 0 { r.add(out[idx], c) } else { r.sub(out[idx], c) };
    }
    TruncatedLaurentSeries::new(r, lo, out, out_prec)
}

/// Mod-p decomposition of an exact Laurent polynomial: for `X^(pq+j)` the
/// component `x_i` receives `C(j,i) (-1)^(j-i) X^q`.
fn decompose_mod_p(x: &TruncatedLaurentSeries) -> Vec<TruncatedLaurentSeries> {
    let r = x.ring;
    let p = r.p() as i64;
    let big = EXACT;
    if x.is_zero() {
        return vec![TruncatedLaurentSeries::zero(r, big); p as usize];
    }
    let lo = floor_div(x.val, p);
    let hi = floor_div(x.degree().unwrap(), p);
    let len = (hi - lo + 1) as usize;
    let mut comps = vec![vec![r.zero(); len]; p as usize];
    // signed binomials C(j,i)(-1)^(j-i) mod p
    let mut tab = vec![vec![0i64; p as usize]; p as usize];
    for j in 0..p as usize {
        for i in 0..=j {
            let mut c = 1i64;
            for t in 0..i {
                c = c * (j - t) as i64 / (t + 1) as i64;
            }
            tab[j][i] = if (j - i) % 2 == 0 { c } else { -c };
        }
    }
    for (e, c) in x.terms() {
        let q = floor_div(e, p);
        let j = (e - q * p) as usize;
        let idx = (q - lo) as usize;
        for i in 0..=j {
            let t = r.mul(c, r.from_int(tab[j][i]));
            comps[i][idx] = r.add(comps[i][idx], t);
        }
    }
    comps.into_iter().map(|v| TruncatedLaurentSeries::new(r, lo, v, big)).collect()
}

/// `sum_i (1+X)^i phi(x_i)` for exact Laurent polynomials.
pub(crate) fn recombine(comps: &[TruncatedLaurentSeries]) -> Result<TruncatedLaurentSeries> {
    let r = comps[0].ring;
    let big = EXACT;
    let mut acc = TruncatedLaurentSeries::zero(r, big);
    for (i, c) in comps.iter().enumerate() {
        let exact = c.with_precision(EXACT);
        let f = exact.phi_bounded(EXACT)?;
        let t = TruncatedLaurentSeries::one_plus_x_pow(r, i as u64, big).mul(&f)?;
        acc = acc.add(&t)?;
    }
    Ok(acc.with_precision(big))
}

/// Hensel lifting of the mod-p decomposition through `p^m`. The input is
/// treated as an exact Laurent polynomial.
fn decompose_lifted(x: &TruncatedLaurentSeries) -> Result<Vec<TruncatedLaurentSeries>> {
    let r = x.ring;
    let m = r.m();
    let p = r.p() as usize;
    let big = EXACT;
    let mut result = vec![TruncatedLaurentSeries::zero(r, big); p];
    let mut residual = x.with_precision(big);
    for k in 0..m {
        let rk = residual.ring;
        let base = decompose_mod_p(&residual.reduce(1)?);
        // representatives in [0, p) viewed in the current ring
        let lifted: Vec<TruncatedLaurentSeries> = base
            .iter()
            .map(|c| TruncatedLaurentSeries::new(rk, c.val, c.coeffs.iter().map(|&z| Coeff([z.0[0], z.0[1]])).collect(), big))
            .collect();
        for i in 0..p {
            let up = TruncatedLaurentSeries::new(
                r,
                lifted[i].val,
                lifted[i].coeffs.iter().map(|&z| r.lift_times_pk(z, k)).collect(),
                big,
            );
            result[i] = result[i].add(&up)?;
        }
        if k + 1 == m {
            break;
        }
        let s = recombine(&lifted)?;
        let diff = residual.sub(&s)?;
        let next_ring = rk.with_precision(rk.m() - 1)?;
        let mut coeffs = Vec::with_capacity(diff.coeffs.len());
        for &c in &diff.coeffs {
            let q = rk.div_p(c).ok_or_else(|| SeriesError::PrecisionExhausted("Hensel residual not divisible by p".into()))?;
            coeffs.push(q);
        }
        residual = TruncatedLaurentSeries::new(next_ring, diff.val, coeffs, big);
    }
    Ok(result)
}

/// Cached powers of `g = (1+X)^a - 1` for applying `sigma_a` on a window.
#[derive(Clone, Debug)]
pub struct SigmaTable {
    ring: Ring,
    lo: i64,
    prec: i64,
    /// `powers[k] = g^(lo + k)` modulo `X^prec`.
    powers: Vec<TruncatedLaurentSeries>,
}

impl SigmaTable {
    /// Table for exponents `lo..prec`; `a` must be a unit known to enough digits.
    pub fn new(ring: Ring, a: &RingElement, lo: i64, prec: i64) -> Result<Self> {
        let ar = a.ring();
        if ar.p() != ring.p() || ar.f() != 1 {
            return Err(SeriesError::RingMismatch(ar.to_string(), ring.to_string()));
        }
        if !a.is_unit() {
            return Err(ArithError::NotUnit.into());
        }
        let span = (prec - lo).max(2) as u64;
        let need = ilog(span, ring.p());
        let m_out = (ar.m() as i64 - need as i64).min(ring.m() as i64);
        if m_out <= 0 {
            return Err(SeriesError::PrecisionExhausted(format!(
                "sigma_a on a window of length {span} needs more than {} digits of a",
                ar.m()
            )));
        }
        let out_ring = ring.with_precision(m_out as u32)?;
        Self::build(out_ring, a.value() as i128, lo, prec)
    }

    pub fn from_int(ring: Ring, a: i64, lo: i64, prec: i64) -> Result<Self> {
        if a.rem_euclid(ring.p() as i64) == 0 {
            return Err(ArithError::NotUnit.into());
        }
        Self::build(ring, a as i128, lo, prec)
    }

    fn build(ring: Ring, a: i128, lo: i64, prec: i64) -> Result<Self> {
        let span = (prec - lo.min(0)).max(1) as usize + 1;
        let row = binomial_row(a, span + 1, &ring);
        let g = TruncatedLaurentSeries::new(ring, 1, row[1..].iter().map(|&c| Coeff([c, 0])).collect(), span as i64 + 1);
        let count = (prec - lo).max(0) as usize;
        let mut powers = Vec::with_capacity(count);
        if lo < 0 {
            // g^-1 to absolute precision prec - lo - 1 suffices for every power
            let ginv = g.inverse()?.truncate(prec - lo);
            let mut neg = Vec::new();
            let mut cur = TruncatedLaurentSeries::one(ring, prec - lo + 1);
            for _ in 0..(-lo) {
                cur = cur.mul(&ginv)?;
                neg.push(cur.truncate(prec));
            }
            neg.reverse();
            powers.extend(neg.into_iter().take(count));
        }
        let start = lo.max(0);
        let gt = g.truncate(prec.max(1));
        let mut cur = gt.pow(start)?.truncate(prec);
        for _ in start..prec {
            powers.push(cur.clone());
            cur = cur.mul_truncated(&gt, prec);
        }
        Ok(SigmaTable { ring, lo, prec, powers })
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    /// `g^e` modulo `X^prec`, for `lo <= e < prec`.
    pub fn power(&self, e: i64) -> &TruncatedLaurentSeries {
        &self.powers[(e - self.lo) as usize]
    }

    pub fn apply(&self, f: &TruncatedLaurentSeries) -> Result<TruncatedLaurentSeries> {
        let f = f.reduce(f.ring().m().min(self.ring.m()))?;
        if !f.is_zero() && f.val < self.lo {
            return Err(SeriesError::TailBound { got: -f.val, bound: -self.lo });
        }
        let prec = f.prec.min(self.prec);
        let r = self.ring;
        let mut acc = vec![r.zero(); (prec - f.val.min(prec)).max(0) as usize];
        let base = f.val.min(prec);
        for (e, c) in f.terms() {
            if e >= prec {
                break;
            }
            let pw = self.power(e);
            for (k, t) in pw.terms() {
                if k >= prec {
                    break;
                }
                let idx = (k - base) as usize;
                acc[idx] = r.add(acc[idx], r.mul(c, t));
            }
        }
        Ok(TruncatedLaurentSeries::new(r, base, acc, prec))
    }
}

/// `(1+X)^a = sum_k C(a,k) X^k` for `k < n`, with `a` known modulo `p^M`.
///
/// Coefficient `k` is determined modulo `p^(M - floor(log_p k))`; the result
/// carries the minimum of these over `k < n`.
pub fn binom_series(a: &RingElement, n: usize) -> Result<TruncatedLaurentSeries> {
    let ar = a.ring();
    if ar.f() != 1 {
        return Err(SeriesError::RingMismatch(ar.to_string(), "Z/p^m".into()));
    }
    let loss = if n >= 2 { ilog(n as u64 - 1, ar.p()) } else { 0 };
    if loss >= ar.m() {
        return Err(SeriesError::PrecisionExhausted(format!(
            "(1+X)^a to X^{n} needs more than {} digits of a",
            ar.m()
        )));
    }
    let ring = ar.with_precision(ar.m() - loss)?;
    let row = binomial_row(a.value() as i128, n, &ring);
    Ok(TruncatedLaurentSeries::new(ring, 0, row.into_iter().map(|c| Coeff([c, 0])).collect(), n as i64))
}

/// `(1+X)^a` for an exact integer `a`, full coefficient precision.
pub fn binom_series_int(ring: Ring, a: i64, n: usize) -> TruncatedLaurentSeries {
    let row = binomial_row(a as i128, n, &ring);
    TruncatedLaurentSeries::new(ring, 0, row.into_iter().map(|c| Coeff([c, 0])).collect(), n as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(p: u64) -> Ring {
        Ring::field(p, 1).unwrap()
    }

    #[test]
    fn phi_of_x_is_binomial() {
        for (p, m) in [(3u64, 1u32), (5, 1), (3, 3), (5, 2)] {
            let r = Ring::residue(p, m).unwrap();
            let x = TruncatedLaurentSeries::monomial(r, r.one(), 1, 20);
            let got = x.phi().unwrap();
            let expect = binom_series_int(r, p as i64, 200).sub(&TruncatedLaurentSeries::one(r, 200)).unwrap();
            assert!(got.agrees_with(&expect, got.precision()));
            assert!(got.precision() >= 20);
        }
    }

    #[test]
    fn phi_mod_p_scales_exponents() {
        let r = fp(5);
        let f = TruncatedLaurentSeries::from_ints(r, -2, &[1, 2, 3, 4], 6);
        let g = f.phi().unwrap();
        assert_eq!(g.precision(), 30);
        for e in -10..30 {
            let expect = if e % 5 == 0 { f.coeff(e / 5) } else { r.zero() };
            assert_eq!(g.coeff(e), expect);
        }
    }

    #[test]
    fn phi_of_one_and_pole() {
        let r = Ring::residue(3, 3).unwrap();
        let one = TruncatedLaurentSeries::one(r, 10);
        assert!(one.phi().unwrap().agrees_with(&one, 10));
        // phi(X^-1) * phi(X) = 1
        let xi = TruncatedLaurentSeries::monomial(r, r.one(), -1, 12);
        let x = TruncatedLaurentSeries::monomial(r, r.one(), 1, 12);
        let prod = xi.phi().unwrap().mul(&x.phi().unwrap()).unwrap();
        assert!(prod.agrees_with(&TruncatedLaurentSeries::one(r, 100), prod.precision()));
        assert!(prod.precision() > 10);
    }

    #[test]
    fn psi_examples() {
        for (p, m) in [(3u64, 1u32), (5, 1), (3, 2), (5, 3)] {
            let r = Ring::residue(p, m).unwrap();
            let one = TruncatedLaurentSeries::one(r, 40);
            assert!(one.psi().unwrap().agrees_with(&TruncatedLaurentSeries::one(r, 100), 40 / p as i64 - (m as i64 - 1)));
            for i in 1..p {
                let t = TruncatedLaurentSeries::one_plus_x_pow(r, i, 40);
                let s = t.psi().unwrap();
                assert!(s.is_zero() || s.valuation() >= s.precision(), "psi((1+X)^{i}) = {s}");
            }
        }
    }

    #[test]
    fn psi_precision_error() {
        let r = fp(3);
        let f = TruncatedLaurentSeries::from_ints(r, 0, &[1, 1], 2);
        assert!(f.psi().is_err());
    }

    #[test]
    fn sigma_identity_and_linear_term() {
        let r = fp(7);
        let f = TruncatedLaurentSeries::from_ints(r, -1, &[1, 3, 0, 5, 6], 10);
        assert_eq!(f.sigma_int(1).unwrap(), f);
        let x = TruncatedLaurentSeries::monomial(r, r.one(), 1, 8);
        let a = crate::padic_core::teichmuller(3, 7, 3).unwrap();
        let s = x.sigma(&a).unwrap();
        assert_eq!(s.coeff(1), r.from_int(3));
        let c2 = crate::padic_core::padic_binomial(&a, 2).unwrap();
        assert_eq!(s.coeff(2), r.from_int(c2.value() as i64));
    }

    #[test]
    fn split_sigma_matches_table() {
        for (p, a) in [(3u64, 2i64), (5, 2), (5, 13), (7, 3), (3, 725)] {
            let r = fp(p);
            for val in [-3i64, 0, 2] {
                let coeffs: Vec<i64> = (0..40).map(|i| (i * i + 3 * i + 1) % p as i64).collect();
                let f = TruncatedLaurentSeries::from_ints(r, val, &coeffs, 37);
                let slow = f.sigma_int(a).unwrap();
                let fast = f.sigma_int_split(a).unwrap();
                assert_eq!(slow.precision(), fast.precision());
                assert!(slow.agrees_with(&fast, slow.precision()), "p={p} a={a} val={val}");
            }
        }
    }

    #[test]
    fn binom_series_examples() {
        let r = Ring::residue(3, 4).unwrap();
        let a = r.element(r.from_int(3));
        let s = binom_series(&a, 10).unwrap();
        assert!(s.agrees_with(&binom_series_int(s.ring(), 3, 10), 10));
        let m1 = r.element(r.from_int(-1));
        let s = binom_series(&m1, 9).unwrap();
        for k in 0..9 {
            assert_eq!(s.ring().signed(s.coeff(k)), if k % 2 == 0 { 1 } else { -1 });
        }
        let half = RingElement::residue(3, 2, 5).unwrap();
        let s = binom_series(&half, 3).unwrap();
        assert_eq!(s.ring().m(), 2);
        assert_eq!(s.coeff(1).0[0], 5);
        // C(1/2, 2) = -1/8, and 8 * 1 = 8 = -1 mod 9
        assert_eq!(s.coeff(2).0[0], 1);
        let short = RingElement::residue(3, 1, 2).unwrap();
        assert!(binom_series(&short, 4).is_err());
    }
}
