//! Exact arithmetic substrates: `Z/p^m`, `F_q` and `W(F_q)/p^m` for `q = p^f`
//! with `f <= 2`, cyclotomic integers `Z[zeta_{p^n}]`, Legendre symbols,
//! Teichmuller lifts and p-adic binomial coefficients.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("modulus {p}^{m} does not fit in 62 bits")]
    ModulusTooLarge { p: u64, m: u32 },
    #[error("no defining polynomial stored for degree {f} over F_{p}")]
    UnsupportedDegree { p: u64, f: u32 },
    #[error("element is not a unit")]
    NotUnit,
    #[error("operands live in different rings")]
    RingMismatch,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("inexact division by {0}")]
    InexactDivision(i64),
}

pub type Result<T> = std::result::Result<T, ArithError>;

const MODULUS_BITS: u32 = 62;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn check_odd_prime(p: u64) -> Result<()> {
    if p % 2 == 1 && is_prime(p) {
        Ok(())
    } else {
        Err(ArithError::NotOddPrime(p))
    }
}

/// `p^e`, or `None` on overflow.
pub fn checked_pow(p: u64, e: u32) -> Option<u64> {
    p.checked_pow(e)
}

/// p-adic valuation of a nonzero integer.
pub fn vp(mut n: i128, p: u64) -> u32 {
    assert!(n != 0, "valuation of zero");
    let p = p as i128;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// `v_p(k!)` by Legendre's formula.
pub fn vp_factorial(k: u64, p: u64) -> u64 {
    let mut v = 0;
    let mut q = k / p;
    while q > 0 {
        v += q;
        q /= p;
    }
    v
}

/// Largest `e` with `p^e <= n` (0 for n < p).
pub fn ilog(n: u64, p: u64) -> u32 {
    let mut e = 0;
    let mut q = n;
    while q >= p {
        q /= p;
        e += 1;
    }
    e
}

pub fn mulmod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

pub fn powmod(mut a: u64, mut e: u64, n: u64) -> u64 {
    let mut r = 1 % n;
    a %= n;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, n);
        }
        a = mulmod(a, a, n);
        e >>= 1;
    }
    r
}

/// Inverse of `a` modulo `n`, if it exists.
pub fn invmod(a: u64, n: u64) -> Option<u64> {
    let (mut r0, mut r1) = (n as i128, (a % n) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(n as i128) as u64)
}

pub fn reduce_i128(a: i128, n: u64) -> u64 {
    a.rem_euclid(n as i128) as u64
}

/// Legendre symbol `(a/p)` for an odd prime `p`.
pub fn legendre(a: i64, p: u64) -> Result<i32> {
    check_odd_prime(p)?;
    let r = reduce_i128(a as i128, p);
    if r == 0 {
        return Ok(0);
    }
    Ok(if powmod(r, (p - 1) / 2, p) == 1 { 1 } else { -1 })
}

/// `p* = (-1/p) p`.
pub fn p_star(p: u64) -> i64 {
    if p % 4 == 1 {
        p as i64
    } else {
        -(p as i64)
    }
}

/// Smallest quadratic non-residue modulo `p`.
pub fn least_nonresidue(p: u64) -> u64 {
    (2..p).find(|&a| powmod(a, (p - 1) / 2, p) == p - 1).expect("odd prime has a non-residue")
}

/// Smallest primitive root modulo `p^2` (hence modulo every `p^m`).
pub fn least_primitive_root_p2(p: u64) -> u64 {
    let factors = prime_factors(p - 1);
    (2..p)
        .find(|&g| {
            factors.iter().all(|&q| powmod(g, (p - 1) / q, p) != 1) && powmod(g, p - 1, p * p) != 1
        })
        .expect("primitive root exists")
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Conway polynomial `x^2 + c1 x + c0` for `F_{p^2}`, as `(c0, c1)`.
fn conway_quadratic(p: u64) -> Option<(u64, u64)> {
    match p {
        3 => Some((2, 2)),
        5 => Some((2, 4)),
        7 => Some((3, 6)),
        11 => Some((2, 7)),
        13 => Some((2, 12)),
        _ => None,
    }
}

/// Raw coordinates of a ring element: `c[0] + c[1] t`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coeff(pub [u64; 2]);

/// `(Z/p^m)[t] / (t^f + c1 t + c0)`: residue rings for `f = 1`,
/// finite fields for `m = 1`, truncated Witt vectors of `F_{p^2}` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ring {
    p: u64,
    m: u32,
    f: u32,
    modulus: u64,
    c0: u64,
    c1: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingSpec {
    pub p: u64,
    pub m: u32,
    pub f: u32,
}

impl Ring {
    pub fn new(p: u64, m: u32, f: u32) -> Result<Ring> {
        check_odd_prime(p)?;
        if m == 0 {
            return Err(ArithError::PrecisionExhausted("ring precision 0".into()));
        }
        let modulus = match checked_pow(p, m) {
            Some(q) if q < (1u64 << MODULUS_BITS) => q,
            _ => return Err(ArithError::ModulusTooLarge { p, m }),
        };
        let (c0, c1) = match f {
            1 => (0, 0),
            2 => conway_quadratic(p).ok_or(ArithError::UnsupportedDegree { p, f })?,
            _ => return Err(ArithError::UnsupportedDegree { p, f }),
        };
        Ok(Ring { p, m, f, modulus, c0, c1 })
    }

    pub fn residue(p: u64, m: u32) -> Result<Ring> {
        Ring::new(p, m, 1)
    }

    pub fn field(p: u64, f: u32) -> Result<Ring> {
        Ring::new(p, 1, f)
    }

    pub fn from_spec(s: RingSpec) -> Result<Ring> {
        Ring::new(s.p, s.m, s.f)
    }

    pub fn spec(&self) -> RingSpec {
        RingSpec { p: self.p, m: self.m, f: self.f }
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn f(&self) -> u32 {
        self.f
    }
    pub fn modulus(&self) -> u64 {
        self.modulus
    }
    pub fn is_field(&self) -> bool {
        self.m == 1
    }
    /// Size of the residue field.
    pub fn residue_size(&self) -> u64 {
        self.p.pow(self.f)
    }
    /// Number of elements.
    pub fn size(&self) -> u64 {
        self.modulus.pow(self.f)
    }
    /// `(c0, c1)` of the defining polynomial.
    pub fn defining_poly(&self) -> (u64, u64) {
        (self.c0, self.c1)
    }

    /// The same ring at lower precision.
    pub fn with_precision(&self, m: u32) -> Result<Ring> {
        Ring::new(self.p, m, self.f)
    }

    pub fn zero(&self) -> Coeff {
        Coeff([0, 0])
    }
    pub fn one(&self) -> Coeff {
        Coeff([1 % self.modulus, 0])
    }
    pub fn from_int(&self, a: i64) -> Coeff {
        Coeff([reduce_i128(a as i128, self.modulus), 0])
    }
    pub fn from_i128(&self, a: i128) -> Coeff {
        Coeff([reduce_i128(a, self.modulus), 0])
    }
    pub fn from_pair(&self, a: i64, b: i64) -> Coeff {
        let b = if self.f == 1 { 0 } else { b };
        Coeff([reduce_i128(a as i128, self.modulus), reduce_i128(b as i128, self.modulus)])
    }
    /// The generator `t` of `F_{p^2}` (only for `f = 2`).
    pub fn gen(&self) -> Coeff {
        assert_eq!(self.f, 2, "generator only for quadratic extensions");
        Coeff([0, 1])
    }

    pub fn is_zero(&self, a: Coeff) -> bool {
        a.0 == [0, 0]
    }

    pub fn add(&self, a: Coeff, b: Coeff) -> Coeff {
        let n = self.modulus;
        Coeff([(a.0[0] + b.0[0]) % n, (a.0[1] + b.0[1]) % n])
    }
    pub fn sub(&self, a: Coeff, b: Coeff) -> Coeff {
        let n = self.modulus;
        Coeff([(a.0[0] + n - b.0[0]) % n, (a.0[1] + n - b.0[1]) % n])
    }
    pub fn neg(&self, a: Coeff) -> Coeff {
        let n = self.modulus;
        Coeff([(n - a.0[0]) % n, (n - a.0[1]) % n])
    }
    pub fn mul(&self, a: Coeff, b: Coeff) -> Coeff {
        let n = self.modulus;
        if self.f == 1 {
            return Coeff([mulmod(a.0[0], b.0[0], n), 0]);
        }
        let n128 = n as u128;
        let (a0, a1, b0, b1) = (a.0[0] as u128, a.0[1] as u128, b.0[0] as u128, b.0[1] as u128);
        let hh = (a1 * b1) % n128;
        let lo = (a0 * b0 + (n128 - (self.c0 as u128 * hh) % n128)) % n128;
        let mid = ((a0 * b1) % n128 + (a1 * b0) % n128 + (n128 - (self.c1 as u128 * hh) % n128)) % n128;
        Coeff([lo as u64, mid as u64])
    }
    pub fn mul_int(&self, a: Coeff, k: i64) -> Coeff {
        self.mul(a, self.from_int(k))
    }
    pub fn pow(&self, mut a: Coeff, mut e: u64) -> Coeff {
        let mut r = self.one();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }
    /// Norm to `Z/p^m` (identity for `f = 1`).
    pub fn norm(&self, a: Coeff) -> u64 {
        if self.f == 1 {
            return a.0[0];
        }
        let n = self.modulus;
        let (x, y) = (a.0[0], a.0[1]);
        let xx = mulmod(x, x, n);
        let xy = mulmod(mulmod(x, y, n), self.c1, n);
        let yy = mulmod(mulmod(y, y, n), self.c0, n);
        (xx + n - xy + yy) % n
    }
    pub fn is_unit(&self, a: Coeff) -> bool {
        !self.norm(a).is_multiple_of(self.p)
    }
    pub fn inv(&self, a: Coeff) -> Option<Coeff> {
        let nrm_inv = invmod(self.norm(a), self.modulus)?;
        if self.f == 1 {
            return Some(Coeff([nrm_inv, 0]));
        }
        let n = self.modulus;
        // conjugate of x + y t is (x - c1 y) - y t
        let conj = Coeff([(a.0[0] + n - mulmod(self.c1, a.0[1], n)) % n, (n - a.0[1]) % n]);
        Some(self.mul(conj, Coeff([nrm_inv, 0])))
    }
    /// p-adic valuation (`m` for zero).
    pub fn valuation(&self, a: Coeff) -> u32 {
        let mut v = 0;
        let mut pk = 1u64;
        while v < self.m {
            pk *= self.p;
            if !a.0[0].is_multiple_of(pk) || !a.0[1].is_multiple_of(pk) {
                return v;
            }
            v += 1;
        }
        self.m
    }
    /// Exact division by `p`: the result lives in the ring of precision `m - 1`.
    pub fn div_p(&self, a: Coeff) -> Option<Coeff> {
        if !a.0[0].is_multiple_of(self.p) || !a.0[1].is_multiple_of(self.p) {
            return None;
        }
        Some(Coeff([a.0[0] / self.p, a.0[1] / self.p]))
    }
    /// Reduction into the ring `target` (same `p`, `f`, precision `<= m`).
    pub fn reduce_into(&self, a: Coeff, target: &Ring) -> Coeff {
        debug_assert!(target.p == self.p && target.f == self.f && target.m <= self.m);
        Coeff([a.0[0] % target.modulus, a.0[1] % target.modulus])
    }
    /// Multiplication by `p^k` as a map from `Z/p^(m-k)` into this ring.
    pub fn lift_times_pk(&self, a: Coeff, k: u32) -> Coeff {
        let pk = self.p.pow(k);
        Coeff([mulmod(a.0[0], pk, self.modulus), mulmod(a.0[1], pk, self.modulus)])
    }
    /// Signed representative of the first coordinate in `(-p^m/2, p^m/2]`.
    pub fn signed(&self, a: Coeff) -> i64 {
        let r = a.0[0];
        if r > self.modulus / 2 {
            r as i64 - self.modulus as i64
        } else {
            r as i64
        }
    }
    /// All elements, in a fixed order (only sensible for tiny rings).
    pub fn elements(&self) -> Vec<Coeff> {
        let n = self.modulus;
        let mut out = Vec::new();
        let top = if self.f == 2 { n } else { 1 };
        for b in 0..top {
            for a in 0..n {
                out.push(Coeff([a, b]));
            }
        }
        out
    }
    /// Map to an index in `0..size()`.
    pub fn index(&self, a: Coeff) -> u64 {
        a.0[0] + a.0[1] * self.modulus
    }
    pub fn from_index(&self, i: u64) -> Coeff {
        Coeff([i % self.modulus, if self.f == 2 { i / self.modulus } else { 0 }])
    }
    pub fn element(&self, c: Coeff) -> RingElement {
        RingElement { ring: *self, c }
    }
    pub fn fmt_coeff(&self, c: Coeff) -> String {
        if self.f == 1 {
            format!("{}", c.0[0])
        } else {
            format!("{}+{}t", c.0[0], c.0[1])
        }
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.m, self.f) {
            (_, 1) => write!(f, "Z/{}^{}", self.p, self.m),
            (1, _) => write!(f, "F_{}^{}", self.p, self.f),
            _ => write!(f, "W(F_{}^{})/{}^{}", self.p, self.f, self.p, self.m),
        }
    }
}

/// An element of a [`Ring`]. Doubles as the residue-ring element of `Z/p^m`
/// and the finite-field element of `F_q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RingElement {
    ring: Ring,
    c: Coeff,
}

impl RingElement {
    pub fn new(ring: Ring, c: Coeff) -> RingElement {
        RingElement { ring, c }
    }
    /// `value mod p^m`.
    pub fn residue(p: u64, m: u32, value: i64) -> Result<RingElement> {
        let ring = Ring::residue(p, m)?;
        Ok(RingElement { ring, c: ring.from_int(value) })
    }
    pub fn ring(&self) -> Ring {
        self.ring
    }
    pub fn coeff(&self) -> Coeff {
        self.c
    }
    /// First coordinate as a representative in `[0, p^m)`.
    pub fn value(&self) -> u64 {
        self.c.0[0]
    }
    pub fn precision(&self) -> u32 {
        self.ring.m
    }
    pub fn is_zero(&self) -> bool {
        self.ring.is_zero(self.c)
    }
    pub fn is_unit(&self) -> bool {
        self.ring.is_unit(self.c)
    }
    pub fn inv(&self) -> Result<RingElement> {
        let c = self.ring.inv(self.c).ok_or(ArithError::NotUnit)?;
        Ok(RingElement { ring: self.ring, c })
    }
    pub fn pow(&self, e: u64) -> RingElement {
        RingElement { ring: self.ring, c: self.ring.pow(self.c, e) }
    }
    pub fn valuation(&self) -> u32 {
        self.ring.valuation(self.c)
    }
    /// Reduce to precision `m <= self.precision()`.
    pub fn reduce(&self, m: u32) -> Result<RingElement> {
        let target = self.ring.with_precision(m)?;
        Ok(RingElement { ring: target, c: self.ring.reduce_into(self.c, &target) })
    }
    fn check(&self, other: &RingElement) {
        assert_eq!(self.ring, other.ring, "ring mismatch: {} vs {}", self.ring, other.ring);
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.ring.fmt_coeff(self.c), self.ring)
    }
}

impl Add for RingElement {
    type Output = RingElement;
    fn add(self, o: RingElement) -> RingElement {
        self.check(&o);
        RingElement { ring: self.ring, c: self.ring.add(self.c, o.c) }
    }
}
impl Sub for RingElement {
    type Output = RingElement;
    fn sub(self, o: RingElement) -> RingElement {
        self.check(&o);
        RingElement { ring: self.ring, c: self.ring.sub(self.c, o.c) }
    }
}
impl Mul for RingElement {
    type Output = RingElement;
    fn mul(self, o: RingElement) -> RingElement {
        self.check(&o);
        RingElement { ring: self.ring, c: self.ring.mul(self.c, o.c) }
    }
}
impl Neg for RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        RingElement { ring: self.ring, c: self.ring.neg(self.c) }
    }
}

/// Binomial coefficient `C(a, k)` for `a` given modulo `p^m`.
///
/// The result carries precision `m - v_p(k!)`.
pub fn padic_binomial(a: &RingElement, k: u64) -> Result<RingElement> {
    let ring = a.ring;
    if ring.f != 1 {
        return Err(ArithError::RingMismatch);
    }
    let p = ring.p;
    let v = vp_factorial(k, p);
    if v >= ring.m as u64 {
        return Err(ArithError::PrecisionExhausted(format!(
            "C(a, {k}) needs more than {} p-adic digits of a",
            ring.m
        )));
    }
    let n = ring.modulus;
    let a0 = a.c.0[0];
    let mut num = 1 % n;
    let mut unit_den = 1u64;
    for i in 0..k {
        num = mulmod(num, (a0 + n - i % n) % n, n);
        let mut j = i + 1;
        while j % p == 0 {
            j /= p;
        }
        unit_den = mulmod(unit_den, j % n, n);
    }
    let pv = p.pow(v as u32);
    debug_assert_eq!(num % pv, 0);
    let out_m = ring.m - v as u32;
    let out = Ring::residue(p, out_m)?;
    let q = (num / pv) % out.modulus;
    let inv = invmod(unit_den % out.modulus, out.modulus).expect("unit part of k! is a unit");
    Ok(RingElement { ring: out, c: Coeff([mulmod(q, inv, out.modulus), 0]) })
}

/// Coefficients `C(a, k) mod p^m_out` for `k < len`, for an exact integer `a`.
///
/// Uses the recurrence `C(a, k) = C(a, k-1) (a-k+1)/k` with exact valuation
/// bookkeeping, so no precision is lost.
pub fn binomial_row(a: i128, len: usize, ring: &Ring) -> Vec<u64> {
    let p = ring.p;
    let n = ring.modulus;
    let mut out = Vec::with_capacity(len);
    let mut unit = 1 % n;
    let mut val: i64 = 0;
    let mut dead = false;
    for k in 0..len as i128 {
        if k > 0 {
            let num = a - k + 1;
            if num == 0 {
                dead = true;
            }
            if !dead {
                let vn = vp(num, p);
                let un = num / (p as i128).pow(vn);
                let vk = vp(k, p);
                let uk = k / (p as i128).pow(vk);
                val += vn as i64 - vk as i64;
                unit = mulmod(unit, reduce_i128(un, n), n);
                unit = mulmod(unit, invmod(reduce_i128(uk, n), n).expect("unit"), n);
            }
        }
        if dead || val >= ring.m as i64 {
            out.push(0);
        } else {
            out.push(mulmod(unit, p.pow(val as u32), n));
        }
    }
    out
}

/// Teichmuller representative of `a` modulo `p^m`.
pub fn teichmuller(a: i64, p: u64, m: u32) -> Result<RingElement> {
    let ring = Ring::residue(p, m)?;
    let mut x = ring.from_int(a);
    if x.0[0] % p == 0 {
        return Err(ArithError::NotUnit);
    }
    for _ in 0..m {
        x = ring.pow(x, p);
    }
    Ok(RingElement { ring, c: x })
}

/// Teichmuller representative of a unit of `W(F_q)/p^m`.
pub fn teichmuller_in(ring: &Ring, a: Coeff) -> Result<Coeff> {
    if !ring.is_unit(a) {
        return Err(ArithError::NotUnit);
    }
    let q = ring.residue_size();
    let mut x = a;
    for _ in 0..ring.m {
        x = ring.pow(x, q);
    }
    Ok(x)
}

/// An element of `Z[zeta_{p^n}]` in the power basis `1, zeta, ..., zeta^(phi(p^n)-1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CyclotomicInt {
    p: u64,
    n: u32,
    coeffs: Vec<i64>,
}

impl CyclotomicInt {
    fn order(p: u64, n: u32) -> usize {
        p.pow(n) as usize
    }
    fn degree(p: u64, n: u32) -> usize {
        if n == 0 {
            1
        } else {
            ((p - 1) * p.pow(n - 1)) as usize
        }
    }

    pub fn zero(p: u64, n: u32) -> CyclotomicInt {
        CyclotomicInt { p, n, coeffs: vec![0; Self::degree(p, n)] }
    }
    pub fn from_int(p: u64, n: u32, a: i64) -> CyclotomicInt {
        let mut z = Self::zero(p, n);
        z.coeffs[0] = a;
        z
    }
    pub fn one(p: u64, n: u32) -> CyclotomicInt {
        Self::from_int(p, n, 1)
    }
    /// `zeta_{p^n}^e`.
    pub fn zeta_pow(p: u64, n: u32, e: i64) -> CyclotomicInt {
        let ord = Self::order(p, n);
        let mut full = vec![0i64; ord];
        full[e.rem_euclid(ord as i64) as usize] = 1;
        Self::from_full(p, n, full)
    }
    /// Build from coefficients indexed by exponents `0..p^n`.
    fn from_full(p: u64, n: u32, mut full: Vec<i64>) -> CyclotomicInt {
        let deg = Self::degree(p, n);
        if n > 0 {
            let step = p.pow(n - 1) as usize;
            for e in deg..full.len() {
                let c = full[e];
                if c == 0 {
                    continue;
                }
                let r = e - deg;
                for k in 0..(p as usize - 1) {
                    full[k * step + r] -= c;
                }
                full[e] = 0;
            }
        } else {
            let s: i64 = full.iter().sum();
            full = vec![s];
        }
        full.truncate(deg);
        CyclotomicInt { p, n, coeffs: full }
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn level(&self) -> u32 {
        self.n
    }
    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// The same element viewed in `Z[zeta_{p^n'}]`, `n' >= n`.
    pub fn lift_to(&self, n2: u32) -> CyclotomicInt {
        assert!(n2 >= self.n);
        if n2 == self.n {
            return self.clone();
        }
        let scale = self.p.pow(n2 - self.n) as usize;
        let mut full = vec![0i64; Self::order(self.p, n2)];
        for (e, &c) in self.coeffs.iter().enumerate() {
            full[e * scale] += c;
        }
        Self::from_full(self.p, n2, full)
    }

    fn common(a: &CyclotomicInt, b: &CyclotomicInt) -> (CyclotomicInt, CyclotomicInt) {
        assert_eq!(a.p, b.p, "cyclotomic rings for different primes");
        let n = a.n.max(b.n);
        (a.lift_to(n), b.lift_to(n))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// The rational integer this element equals, if any.
    pub fn as_integer(&self) -> Option<i64> {
        if self.coeffs[1..].iter().all(|&c| c == 0) {
            Some(self.coeffs[0])
        } else {
            None
        }
    }

    /// `Some(e)` with `self = zeta_{p^n}^e`, if it is such a root of unity.
    pub fn as_root_of_unity(&self) -> Option<u64> {
        let ord = Self::order(self.p, self.n) as i64;
        (0..ord).find(|&e| *self == Self::zeta_pow(self.p, self.n, e)).map(|e| e as u64)
    }

    pub fn scale(&self, k: i64) -> CyclotomicInt {
        CyclotomicInt { p: self.p, n: self.n, coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    /// Exact division by a nonzero integer.
    pub fn exact_div(&self, d: i64) -> Result<CyclotomicInt> {
        if d == 0 || self.coeffs.iter().any(|c| c % d != 0) {
            return Err(ArithError::InexactDivision(d));
        }
        Ok(CyclotomicInt { p: self.p, n: self.n, coeffs: self.coeffs.iter().map(|c| c / d).collect() })
    }

    /// The Galois automorphism `zeta -> zeta^b` for `b` prime to `p`.
    pub fn galois(&self, b: i64) -> CyclotomicInt {
        assert!(b.rem_euclid(self.p as i64) != 0, "galois exponent must be prime to p");
        let ord = Self::order(self.p, self.n);
        let mut full = vec![0i64; ord];
        for (e, &c) in self.coeffs.iter().enumerate() {
            let t = (e as i64 * b).rem_euclid(ord as i64) as usize;
            full[t] += c;
        }
        Self::from_full(self.p, self.n, full)
    }
}

impl<'a> Add<&'a CyclotomicInt> for &'a CyclotomicInt {
    type Output = CyclotomicInt;
    fn add(self, o: &CyclotomicInt) -> CyclotomicInt {
        let (a, b) = CyclotomicInt::common(self, o);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect();
        CyclotomicInt { p: a.p, n: a.n, coeffs }
    }
}
impl<'a> Sub<&'a CyclotomicInt> for &'a CyclotomicInt {
    type Output = CyclotomicInt;
    fn sub(self, o: &CyclotomicInt) -> CyclotomicInt {
        let (a, b) = CyclotomicInt::common(self, o);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect();
        CyclotomicInt { p: a.p, n: a.n, coeffs }
    }
}
impl<'a> Mul<&'a CyclotomicInt> for &'a CyclotomicInt {
    type Output = CyclotomicInt;
    fn mul(self, o: &CyclotomicInt) -> CyclotomicInt {
        let (a, b) = CyclotomicInt::common(self, o);
        let ord = CyclotomicInt::order(a.p, a.n);
        let mut full = vec![0i64; ord];
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                full[(i + j) % ord] += x * y;
            }
        }
        CyclotomicInt::from_full(a.p, a.n, full)
    }
}
impl Neg for &CyclotomicInt {
    type Output = CyclotomicInt;
    fn neg(self) -> CyclotomicInt {
        self.scale(-1)
    }
}

impl fmt::Display for CyclotomicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match e {
                0 => write!(f, "{c}")?,
                _ => write!(f, "{c}*z^{e}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `g = sum_{a in F_p^x} (a/p) zeta_p^a`.
pub fn quadratic_gauss_sum(p: u64) -> Result<CyclotomicInt> {
    check_odd_prime(p)?;
    let mut g = CyclotomicInt::zero(p, 1);
    for a in 1..p {
        let z = CyclotomicInt::zeta_pow(p, 1, a as i64);
        g = if legendre(a as i64, p)? == 1 { &g + &z } else { &g - &z };
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre(2, 7).unwrap(), 1);
        assert_eq!(legendre(5, 7).unwrap(), -1);
        assert_eq!(legendre(14, 7).unwrap(), 0);
        assert!(legendre(2, 9).is_err());
        assert!(legendre(2, 2).is_err());
    }

    #[test]
    fn legendre_against_square_table() {
        for p in [3u64, 5, 7, 11, 13] {
            let squares: Vec<u64> = (1..p).map(|x| x * x % p).collect();
            for a in 0..p {
                let expect = if a == 0 {
                    0
                } else if squares.contains(&a) {
                    1
                } else {
                    -1
                };
                assert_eq!(legendre(a as i64, p).unwrap(), expect);
            }
        }
    }

    #[test]
    fn legendre_multiplicative() {
        for p in [3u64, 5, 7, 11, 13] {
            for a in 0..p as i64 {
                for b in 0..p as i64 {
                    assert_eq!(
                        legendre(a * b, p).unwrap(),
                        legendre(a, p).unwrap() * legendre(b, p).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn conway_polys_are_primitive() {
        for p in [3u64, 5, 7, 11, 13] {
            let f = Ring::field(p, 2).unwrap();
            let t = f.gen();
            let q1 = p * p - 1;
            assert_eq!(f.pow(t, q1), f.one());
            for l in prime_factors(q1) {
                assert_ne!(f.pow(t, q1 / l), f.one(), "t not primitive for p={p}");
            }
        }
        assert!(Ring::field(17, 2).is_err());
    }

    #[test]
    fn field_inverse_exhaustive() {
        for p in [3u64, 5, 7] {
            let f = Ring::field(p, 2).unwrap();
            for a in f.elements() {
                match f.inv(a) {
                    Some(b) => assert_eq!(f.mul(a, b), f.one()),
                    None => assert!(f.is_zero(a)),
                }
            }
        }
    }

    #[test]
    fn witt_inverse() {
        let r = Ring::new(5, 3, 2).unwrap();
        let a = r.from_pair(7, 11);
        let b = r.inv(a).unwrap();
        assert_eq!(r.mul(a, b), r.one());
        assert!(r.inv(r.from_pair(5, 10)).is_none());
    }

    #[test]
    fn binomial_examples() {
        let a = RingElement::residue(7, 3, 12).unwrap();
        assert_eq!(padic_binomial(&a, 0).unwrap().value(), 1);
        // C(p, k) for k <= p is the integer binomial coefficient
        for p in [3u64, 5, 7] {
            let a = RingElement::residue(p, 4, p as i64).unwrap();
            let mut c = 1u64;
            for k in 0..=p {
                let b = padic_binomial(&a, k).unwrap();
                assert_eq!(b.value(), c % b.ring().modulus());
                c = c * (p - k) / (k + 1);
            }
        }
        let half = RingElement::residue(3, 2, 5).unwrap();
        assert_eq!(padic_binomial(&half, 1).unwrap().value(), 5);
        assert_eq!(padic_binomial(&half, 1).unwrap().precision(), 2);
        let short = RingElement::residue(3, 1, 2).unwrap();
        assert!(matches!(padic_binomial(&short, 3), Err(ArithError::PrecisionExhausted(_))));
    }

    #[test]
    fn binomial_row_matches_integers() {
        let r = Ring::residue(5, 3).unwrap();
        let row = binomial_row(-1, 6, &r);
        for (k, &c) in row.iter().enumerate() {
            assert_eq!(r.signed(Coeff([c, 0])), if k % 2 == 0 { 1 } else { -1 });
        }
        let row = binomial_row(10, 12, &r);
        let expect = [1, 10, 45, 120, 210, 252, 210, 120, 45, 10, 1, 0];
        for k in 0..12 {
            assert_eq!(row[k], expect[k] % 125);
        }
    }

    #[test]
    fn teichmuller_examples() {
        assert_eq!(teichmuller(2, 5, 2).unwrap().value(), 7);
        assert_eq!(teichmuller(1, 7, 3).unwrap().value(), 1);
        for p in [3u64, 5, 7, 11] {
            for a in 1..p as i64 {
                let w = teichmuller(a, p, 4).unwrap();
                assert_eq!(w.pow(p - 1).value(), 1);
                assert_eq!(w.value() % p, a as u64);
            }
        }
        assert!(teichmuller(5, 5, 2).is_err());
    }

    #[test]
    fn gauss_sum_squares() {
        let g3 = quadratic_gauss_sum(3).unwrap();
        let expect = &CyclotomicInt::zeta_pow(3, 1, 1) - &CyclotomicInt::zeta_pow(3, 1, 2);
        assert_eq!(g3, expect);
        for p in [3u64, 5, 7, 11, 13] {
            let g = quadratic_gauss_sum(p).unwrap();
            assert_eq!((&g * &g).as_integer(), Some(p_star(p)));
            let conj = g.galois(-1);
            assert_eq!((&g * &conj).as_integer(), Some(p as i64));
        }
    }

    #[test]
    fn cyclotomic_reduction_consistent() {
        // zeta^(p^n) = 1 and sum of p-th roots of unity vanishes
        for (p, n) in [(3u64, 2u32), (5, 2), (3, 3)] {
            let z = CyclotomicInt::zeta_pow(p, n, 1);
            let mut acc = CyclotomicInt::one(p, n);
            for _ in 0..p.pow(n) {
                acc = &acc * &z;
            }
            assert_eq!(acc, CyclotomicInt::one(p, n));
            let step = p.pow(n - 1) as i64;
            let mut s = CyclotomicInt::zero(p, n);
            for k in 0..p as i64 {
                s = &s + &CyclotomicInt::zeta_pow(p, n, k * step);
            }
            assert!(s.is_zero());
        }
        let a = CyclotomicInt::zeta_pow(5, 1, 2);
        assert_eq!(a.lift_to(2), CyclotomicInt::zeta_pow(5, 2, 10));
        assert_eq!(CyclotomicInt::zeta_pow(7, 2, 9).as_root_of_unity(), Some(9));
    }
}
