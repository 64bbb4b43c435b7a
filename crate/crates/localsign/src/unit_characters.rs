//! Unit groups of quadratic extensions `K = Q_p(delta)` modulo powers of the
//! maximal ideal, and finite-order anticyclotomic characters of `K^x`.
//!
//! Units are handled in coordinates `a + b delta` modulo `p^M`. The group
//! `(O_K / varpi^N)^x` is presented by a Teichmuller generator, one shallow
//! generator `1 + delta` when `p = 3` and `K` is ramified (the logarithm is not
//! an isomorphism on `1 + varpi O_K` there), and two logarithmic generators
//! `exp(b_1), exp(b_2)` for a `Z_p`-basis of the layer where `log` is bijective.

use crate::padic_core::{
    check_odd_prime, ilog, invmod, least_nonresidue, least_primitive_root_p2, mulmod, powmod, prime_factors,
    reduce_i128, vp, ArithError, CyclotomicInt,
};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UnitError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("modulus exponent {0} is too small to separate the filtration layers (need >= 2)")]
    ModulusTooSmall(u32),
    #[error("modulus exponent {have} is below the conductor bound {need} for characters of order p^{n}")]
    InsufficientModulus { have: u32, need: u32, n: u32 },
    #[error("element is not a unit")]
    NotUnit,
    #[error("discrete log failed: {0}")]
    DiscreteLog(String),
    #[error("inconsistent presentation: {0}")]
    Presentation(String),
    #[error("unknown extension kind {0:?}")]
    UnknownKind(String),
}

pub type Result<T> = std::result::Result<T, UnitError>;

/// Canonical choices of `delta^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExtensionKind {
    /// `delta^2 = u`, the least quadratic non-residue mod `p`.
    #[serde(rename = "unram")]
    Unramified,
    /// `delta^2 = -p`.
    #[serde(rename = "ram-minus-p")]
    RamifiedMinusP,
    /// `delta^2 = -p u`.
    #[serde(rename = "ram-minus-pu")]
    RamifiedMinusPu,
}

impl ExtensionKind {
    pub fn label(&self) -> &'static str {
        match self {
            ExtensionKind::Unramified => "unram",
            ExtensionKind::RamifiedMinusP => "ram-minus-p",
            ExtensionKind::RamifiedMinusPu => "ram-minus-pu",
        }
    }

    pub fn parse(s: &str) -> Result<ExtensionKind> {
        match s {
            "unram" => Ok(ExtensionKind::Unramified),
            "ram-minus-p" => Ok(ExtensionKind::RamifiedMinusP),
            "ram-minus-pu" => Ok(ExtensionKind::RamifiedMinusPu),
            _ => Err(UnitError::UnknownKind(s.to_string())),
        }
    }

    pub fn is_ramified(&self) -> bool {
        !matches!(self, ExtensionKind::Unramified)
    }
}

impl fmt::Display for ExtensionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// `K = Q_p(delta)` with `delta^2` in `Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadExtension {
    pub p: u64,
    pub kind: ExtensionKind,
    pub delta_sq: i64,
}

impl QuadExtension {
    pub fn new(p: u64, kind: ExtensionKind) -> Result<QuadExtension> {
        check_odd_prime(p)?;
        let u = least_nonresidue(p) as i64;
        let delta_sq = match kind {
            ExtensionKind::Unramified => u,
            ExtensionKind::RamifiedMinusP => -(p as i64),
            ExtensionKind::RamifiedMinusPu => -(p as i64) * u,
        };
        Ok(QuadExtension { p, kind, delta_sq })
    }

    pub fn unramified(p: u64) -> Result<QuadExtension> {
        Self::new(p, ExtensionKind::Unramified)
    }

    pub fn ramified_minus_p(p: u64) -> Result<QuadExtension> {
        Self::new(p, ExtensionKind::RamifiedMinusP)
    }

    pub fn ramified_minus_pu(p: u64) -> Result<QuadExtension> {
        Self::new(p, ExtensionKind::RamifiedMinusPu)
    }

    pub fn is_ramified(&self) -> bool {
        self.kind.is_ramified()
    }

    pub fn ramification_index(&self) -> u32 {
        if self.is_ramified() {
            2
        } else {
            1
        }
    }

    /// `p`-adic valuation of `delta^2` (0 or 1).
    pub fn delta_sq_valuation(&self) -> i64 {
        i64::from(self.is_ramified())
    }

    /// The unit part of `delta^2`.
    pub fn delta_sq_unit(&self) -> i64 {
        if self.is_ramified() {
            self.delta_sq / self.p as i64
        } else {
            self.delta_sq
        }
    }

    /// Residue field size.
    pub fn residue_size(&self) -> u64 {
        if self.is_ramified() {
            self.p
        } else {
            self.p * self.p
        }
    }
}

impl fmt::Display for QuadExtension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q_{}(sqrt({}))", self.p, self.delta_sq)
    }
}

/// An element `a + b delta` of `O_K` with integer coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadInt {
    pub a: i64,
    pub b: i64,
}

impl QuadInt {
    pub fn new(a: i64, b: i64) -> QuadInt {
        QuadInt { a, b }
    }
}

type Pair = (u64, u64);

/// `O_K / p^prec` in coordinates.
#[derive(Clone, Copy, Debug)]
struct Coords {
    p: u64,
    e: u32,
    d: u64,
    prec: u32,
    modulus: u64,
}

impl Coords {
    fn new(ext: &QuadExtension, prec: u32) -> Result<Coords> {
        let modulus = ext
            .p
            .checked_pow(prec)
            .filter(|&m| m < 1 << 62)
            .ok_or(ArithError::ModulusTooLarge { p: ext.p, m: prec })?;
        Ok(Coords {
            p: ext.p,
            e: ext.ramification_index(),
            d: reduce_i128(ext.delta_sq as i128, modulus),
            prec,
            modulus,
        })
    }

    fn pair(&self, a: i128, b: i128) -> Pair {
        (reduce_i128(a, self.modulus), reduce_i128(b, self.modulus))
    }

    fn one(&self) -> Pair {
        (1 % self.modulus, 0)
    }

    fn add(&self, x: Pair, y: Pair) -> Pair {
        ((x.0 + y.0) % self.modulus, (x.1 + y.1) % self.modulus)
    }

    fn sub(&self, x: Pair, y: Pair) -> Pair {
        ((x.0 + self.modulus - y.0) % self.modulus, (x.1 + self.modulus - y.1) % self.modulus)
    }

    fn mul(&self, x: Pair, y: Pair) -> Pair {
        let n = self.modulus;
        let bb = mulmod(mulmod(x.1, y.1, n), self.d, n);
        ((mulmod(x.0, y.0, n) + bb) % n, (mulmod(x.0, y.1, n) + mulmod(x.1, y.0, n)) % n)
    }

    fn scale(&self, x: Pair, c: u64) -> Pair {
        (mulmod(x.0, c, self.modulus), mulmod(x.1, c, self.modulus))
    }

    fn pow(&self, mut x: Pair, mut e: u64) -> Pair {
        let mut r = self.one();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, x);
            }
            x = self.mul(x, x);
            e >>= 1;
        }
        r
    }

    fn norm(&self, x: Pair) -> u64 {
        let n = self.modulus;
        (mulmod(x.0, x.0, n) + n - mulmod(mulmod(x.1, x.1, n), self.d, n)) % n
    }

    fn inv(&self, x: Pair) -> Option<Pair> {
        let ni = invmod(self.norm(x), self.modulus)?;
        Some(self.scale((x.0, (self.modulus - x.1) % self.modulus), ni))
    }

    fn vp_coord(&self, a: u64) -> u32 {
        if a == 0 {
            self.prec
        } else {
            vp(a as i128, self.p).min(self.prec)
        }
    }

    /// Valuation in powers of the uniformizer (capped by the precision).
    fn vpi(&self, x: Pair) -> u32 {
        let (va, vb) = (self.vp_coord(x.0), self.vp_coord(x.1));
        if self.e == 1 {
            va.min(vb)
        } else {
            (2 * va).min(2 * vb + 1)
        }
    }

    fn is_unit(&self, x: Pair) -> bool {
        self.vpi(x) == 0
    }

    /// `x / p^k` on representatives; the result is meaningful mod `p^(prec-k)`.
    fn div_pk(&self, x: Pair, k: u32) -> Option<Pair> {
        let q = self.p.pow(k);
        if !x.0.is_multiple_of(q) || !x.1.is_multiple_of(q) {
            return None;
        }
        Some((x.0 / q, x.1 / q))
    }

    fn reduce(&self, x: Pair, prec: u32) -> Pair {
        let m = self.p.pow(prec);
        (x.0 % m, x.1 % m)
    }

    /// `varpi^k` with `varpi = delta` (ramified) or `p` (unramified).
    fn uniformizer_pow(&self, k: u32) -> Pair {
        if self.e == 1 {
            (powmod(self.p, k as u64, self.modulus), 0)
        } else {
            let half = powmod(self.d, (k / 2) as u64, self.modulus);
            if k.is_multiple_of(2) {
                (half, 0)
            } else {
                (0, half)
            }
        }
    }

    /// Is `x` zero mod `varpi^n`?
    fn vanishes_mod(&self, x: Pair, n: u32) -> bool {
        self.vpi(x) >= n
    }
}

/// `log(1 + z)` for `v_varpi(z) >= 1`, correct modulo `p^out_prec`.
fn log1p(ext: &QuadExtension, z: (i128, i128), out_prec: u32) -> Result<Pair> {
    let e = ext.ramification_index();
    let p = ext.p;
    let probe = Coords::new(ext, out_prec)?;
    let zp = probe.pair(z.0, z.1);
    let vz = probe.vpi(zp).max(1);
    if probe.vpi(zp) == 0 {
        return Err(UnitError::DiscreteLog("log of a non-principal unit".into()));
    }
    // stop once k vz - e log_p(k) >= e out_prec
    let mut k_max = 1u64;
    while (k_max as i64) * vz as i64 - (e * ilog(k_max, p)) as i64 <= (e * out_prec) as i64 {
        k_max += 1;
    }
    let guard = ilog(k_max, p) + 1;
    let c = Coords::new(ext, out_prec + guard)?;
    let zc = c.pair(z.0, z.1);
    let mut sum = (0u64, 0u64);
    let mut pow = zc;
    for k in 1..=k_max {
        let t = vp(k as i128, p);
        let term = c
            .div_pk(pow, t)
            .ok_or_else(|| UnitError::DiscreteLog(format!("log term {k} not divisible by p^{t}")))?;
        let unit = k / p.pow(t);
        let term = c.scale(term, invmod(unit, c.modulus).expect("unit"));
        sum = if k % 2 == 1 { c.add(sum, term) } else { c.sub(sum, term) };
        pow = c.mul(pow, zc);
    }
    Ok(c.reduce(sum, out_prec))
}

/// Label of a generator of the presentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    /// Teichmuller lift of a generator of the residue field's unit group.
    Teichmuller,
    /// `1 + delta`, only for `p = 3` ramified.
    OnePlusDelta,
    /// `exp(p)`.
    ExpP,
    /// `exp(delta)`.
    ExpDelta,
    /// `exp(p delta)`.
    ExpPDelta,
}

impl Generator {
    pub fn label(&self) -> &'static str {
        match self {
            Generator::Teichmuller => "tau",
            Generator::OnePlusDelta => "1+delta",
            Generator::ExpP => "exp(p)",
            Generator::ExpDelta => "exp(delta)",
            Generator::ExpPDelta => "exp(p*delta)",
        }
    }
}

/// A presentation of `(O_K / varpi^N)^x` (`varpi = p` for unramified `K`).
#[derive(Clone, Debug)]
pub struct UnitGroupPresentation {
    ext: QuadExtension,
    modulus_exp: u32,
    coords: Coords,
    generators: Vec<Generator>,
    /// Upper triangular relation matrix, already in Hermite normal form.
    relations: Vec<Vec<i128>>,
    invariant_factors: Vec<u64>,
    residue_order: u64,
    residue_log: HashMap<Pair, u64>,
    teich: Pair,
    shallow: Option<Pair>,
    /// Exponents of `p` in the `log`-coordinates of `b_1, b_2`.
    basis_shift: [u32; 2],
    zp_image: Vec<Vec<i128>>,
    /// `v_p` normalisation `s` of the anticyclotomic logarithm.
    ell_shift: u32,
    /// `ell` on each generator, mod `p^(prec - s)`.
    ell_on_gens: Vec<u64>,
}

/// Build the presentation of `(O_K / varpi^N)^x`.
pub fn build_unit_group(ext: &QuadExtension, n: u32) -> Result<UnitGroupPresentation> {
    if n < 2 {
        return Err(UnitError::ModulusTooSmall(n));
    }
    let p = ext.p;
    let e = ext.ramification_index();
    let prec = n.div_ceil(e) + 3;
    let c = Coords::new(ext, prec)?;
    let ramified = ext.is_ramified();
    let three_ram = ramified && p == 3;

    // residue field generator and discrete-log table
    let q = ext.residue_size();
    let residue = Coords::new(ext, 1)?;
    let residue_order = q - 1;
    let factors = prime_factors(residue_order);
    let candidates: Vec<Pair> = if ramified {
        (1..p).map(|a| (a, 0)).collect()
    } else {
        (0..p).flat_map(|b| (0..p).map(move |a| (a, b))).filter(|&x| x != (0, 0)).collect()
    };
    let gen = candidates
        .into_iter()
        .find(|&x| factors.iter().all(|&l| residue.pow(x, residue_order / l) != residue.one()))
        .ok_or_else(|| UnitError::Presentation("no residue generator".into()))?;
    let mut residue_log = HashMap::new();
    let mut cur = residue.one();
    for k in 0..residue_order {
        residue_log.insert(cur, k);
        cur = residue.mul(cur, gen);
    }
    let mut teich = gen;
    for _ in 0..=prec {
        teich = c.pow(teich, q);
    }
    if c.pow(teich, residue_order) != c.one() {
        return Err(UnitError::Presentation("Teichmuller lift has wrong order".into()));
    }

    let mut generators = vec![Generator::Teichmuller];
    let shallow = if three_ram {
        generators.push(Generator::OnePlusDelta);
        Some(c.pair(1, 1))
    } else {
        None
    };
    let (b1, b2, basis_shift) = if ramified && !three_ram {
        (Generator::ExpP, Generator::ExpDelta, [1, 0])
    } else {
        (Generator::ExpP, Generator::ExpPDelta, [1, 1])
    };
    generators.push(b1);
    generators.push(b2);

    // orders of exp(b_j) modulo varpi^N
    let t = if !ramified {
        [n - 1, n - 1]
    } else if three_ram {
        [n.div_ceil(2) - 1, n.saturating_sub(3).div_ceil(2)]
    } else {
        [n.div_ceil(2) - 1, (n - 1).div_ceil(2)]
    };

    let r = generators.len();
    let mut relations = vec![vec![0i128; r]; r];
    relations[0][0] = residue_order as i128;
    let bcol = r - 2;
    for j in 0..2 {
        relations[bcol + j][bcol + j] = p.pow(t[j]) as i128;
    }
    let mut pres = UnitGroupPresentation {
        ext: *ext,
        modulus_exp: n,
        coords: c,
        generators,
        relations: vec![],
        invariant_factors: vec![],
        residue_order,
        residue_log,
        teich,
        shallow,
        basis_shift,
        zp_image: vec![],
        ell_shift: 0,
        ell_on_gens: vec![],
    };
    if let Some(h) = shallow {
        // h^p lies in 1 + varpi^2 O_K; record its log-coordinates
        let hp = c.pow(h, p);
        let x = pres.log_coordinates(hp)?;
        relations[1][1] = p as i128;
        for j in 0..2 {
            let ord = p.pow(t[j]) as i128;
            relations[1][bcol + j] = (-x[j]).rem_euclid(ord);
        }
    }
    pres.relations = relations;
    pres.invariant_factors = smith_invariants(&pres.relations);

    let expected = if ramified {
        (p - 1) * p.pow(n - 1)
    } else {
        (p * p - 1) * p.pow(2 * n - 2)
    };
    if pres.order() != expected {
        return Err(UnitError::Presentation(format!("group order {} != {}", pres.order(), expected)));
    }

    // closure of the image of Z_p^x
    let g = least_primitive_root_p2(p) as i64;
    let tg = {
        let mut x = c.pair(g as i128, 0);
        for _ in 0..=prec {
            x = c.pow(x, p);
        }
        x
    };
    pres.zp_image = vec![pres.dlog_pair(tg)?, pres.dlog_pair(c.pair(1 + p as i128, 0))?];

    // anticyclotomic logarithm: ell(u) = beta(log u) / p^s
    let mut betas: Vec<u64> = vec![0];
    if let Some(h) = shallow {
        let lh = log1p(ext, (h.0 as i128 - 1, h.1 as i128), prec)?;
        betas.push(lh.1);
    }
    // beta(b_j) with b_1 = p and b_2 = delta or p delta
    betas.push(0);
    betas.push(if basis_shift[1] == 0 { 1 } else { p % c.modulus });
    let s = betas.iter().map(|&b| c.vp_coord(b)).min().unwrap_or(0);
    pres.ell_shift = s;
    pres.ell_on_gens = betas.iter().map(|&b| b / p.pow(s)).collect();
    Ok(pres)
}

/// Invariant factors (`> 1`) of a nonsingular integer matrix via determinantal divisors.
fn smith_invariants(m: &[Vec<i128>]) -> Vec<u64> {
    let n = m.len();
    let mut divisors = vec![1i128];
    for k in 1..=n {
        let mut g = 0i128;
        for rows in subsets(n, k) {
            for cols in subsets(n, k) {
                let minor: Vec<Vec<i128>> = rows.iter().map(|&i| cols.iter().map(|&j| m[i][j]).collect()).collect();
                g = gcd(g, det(&minor));
            }
        }
        divisors.push(g.abs());
    }
    let mut out = Vec::new();
    for k in 1..=n {
        let s = divisors[k] / divisors[k - 1];
        if s > 1 {
            out.push(s as u64);
        }
    }
    out
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 0..n {
        for rest in subsets(n, k - 1) {
            if rest.first().is_none_or(|&r| r > first) {
                let mut v = vec![first];
                v.extend(rest);
                out.push(v);
            }
        }
    }
    out
}

fn det(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i128>> =
                m[1..].iter().map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect()).collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * m[0][j] * det(&minor)
        })
        .sum()
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl UnitGroupPresentation {
    pub fn extension(&self) -> &QuadExtension {
        &self.ext
    }

    pub fn modulus_exp(&self) -> u32 {
        self.modulus_exp
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn relations(&self) -> &[Vec<i128>] {
        &self.relations
    }

    /// Invariant factors greater than one, ascending by divisibility.
    pub fn invariant_factors(&self) -> &[u64] {
        &self.invariant_factors
    }

    /// Invariant factors of the principal-unit part (everything but the Teichmuller generator).
    pub fn principal_invariant_factors(&self) -> Vec<u64> {
        let sub: Vec<Vec<i128>> = self.relations[1..].iter().map(|r| r[1..].to_vec()).collect();
        smith_invariants(&sub)
    }

    pub fn order(&self) -> u64 {
        self.relations.iter().enumerate().map(|(i, r)| r[i] as u64).product()
    }

    /// Dlog vectors of the generators of the image of `Z_p^x`.
    pub fn zp_image(&self) -> &[Vec<i128>] {
        &self.zp_image
    }

    pub fn ell_shift(&self) -> u32 {
        self.ell_shift
    }

    /// Canonical representative of `v` modulo the relation lattice.
    pub fn reduce(&self, v: &[i128]) -> Vec<i128> {
        let mut v = v.to_vec();
        for (i, row) in self.relations.iter().enumerate() {
            let q = v[i].div_euclid(row[i]);
            if q != 0 {
                for (x, &r) in v.iter_mut().zip(row) {
                    *x -= q * r;
                }
            }
        }
        v
    }

    /// Is `x` congruent to `y` modulo `varpi^N`?
    pub fn congruent(&self, x: QuadInt, y: QuadInt) -> bool {
        let c = &self.coords;
        let d = c.sub(c.pair(x.a as i128, x.b as i128), c.pair(y.a as i128, y.b as i128));
        c.vanishes_mod(d, self.modulus_exp * (2 / c.e))
    }

    fn to_pair(&self, x: QuadInt) -> Pair {
        self.coords.pair(x.a as i128, x.b as i128)
    }

    /// Coordinates of `log(w)` in the basis `b_1, b_2`, for `w` in the log layer.
    fn log_coordinates(&self, w: Pair) -> Result<[i128; 2]> {
        let c = &self.coords;
        let z = c.sub(w, c.one());
        let l = log1p(&self.ext, (z.0 as i128, z.1 as i128), c.prec)?;
        let mut out = [0i128; 2];
        for (j, &comp) in [l.0, l.1].iter().enumerate() {
            let k = self.basis_shift[j];
            let v = c
                .div_pk((comp, 0), k)
                .ok_or_else(|| UnitError::DiscreteLog("log outside the expected lattice".into()))?;
            out[j] = v.0 as i128;
        }
        Ok(out)
    }

    fn dlog_pair(&self, x: Pair) -> Result<Vec<i128>> {
        let c = &self.coords;
        if !c.is_unit(x) {
            return Err(UnitError::NotUnit);
        }
        let res = if self.ext.is_ramified() { (x.0 % self.ext.p, 0) } else { (x.0 % self.ext.p, x.1 % self.ext.p) };
        let e_tau = *self
            .residue_log
            .get(&res)
            .ok_or_else(|| UnitError::DiscreteLog(format!("residue {res:?} missing from table")))?;
        let mut w = c.mul(x, c.pow(self.teich, (self.residue_order - e_tau) % self.residue_order));
        let mut out = vec![e_tau as i128];
        if let Some(h) = self.shallow {
            let p = self.ext.p;
            let k = w.1 % p;
            let hinv = c.inv(h).expect("1 + delta is a unit");
            w = c.mul(w, c.pow(hinv, k));
            if !w.1.is_multiple_of(p) || !(w.0 + c.modulus - 1).is_multiple_of(p) {
                return Err(UnitError::DiscreteLog("shallow layer not cleared".into()));
            }
            out.push(k as i128);
        }
        let lc = self.log_coordinates(w)?;
        out.extend_from_slice(&lc);
        Ok(self.reduce(&out))
    }

    /// Discrete logarithm of a unit, reduced modulo the relations.
    pub fn dlog(&self, x: QuadInt) -> Result<Vec<i128>> {
        self.dlog_pair(self.to_pair(x))
    }

    /// `ell(x)` mod `p^k`, computed straight from the logarithm of `x^T` (not via
    /// the presentation), for cross-checking.
    pub fn ell_direct(&self, x: QuadInt, k: u32) -> Result<u64> {
        let c = &self.coords;
        let xp = self.to_pair(x);
        if !c.is_unit(xp) {
            return Err(UnitError::NotUnit);
        }
        let tt = self.residue_order;
        let y = c.pow(xp, tt);
        let z = c.sub(y, c.one());
        let l = log1p(&self.ext, (z.0 as i128, z.1 as i128), c.prec)?;
        let s = self.ell_shift;
        let beta = c.div_pk((l.1, 0), s).ok_or_else(|| UnitError::DiscreteLog("beta below p^s".into()))?.0;
        let m = self.ext.p.pow(k);
        let tinv = invmod(tt % m, m).expect("T prime to p");
        Ok(mulmod(beta % m, tinv, m))
    }

    /// Units `1 + varpi^m c` for `c` running over nonzero residue representatives.
    fn layer_elements(&self, m: u32) -> Vec<Pair> {
        let c = &self.coords;
        let p = self.ext.p;
        let pi = c.uniformizer_pow(m);
        let reps: Vec<Pair> = if self.ext.is_ramified() {
            (1..p).map(|a| (a, 0)).collect()
        } else {
            (0..p).flat_map(|b| (0..p).map(move |a| (a, b))).filter(|&x| x != (0, 0)).collect()
        };
        reps.into_iter().map(|r| c.add(c.one(), c.mul(pi, r))).collect()
    }

    fn modulus_exp_in_uniformizer(&self) -> u32 {
        self.modulus_exp
    }
}

/// Identifier of a character as serialized in reports.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CharacterId {
    pub p: u64,
    pub kind: ExtensionKind,
    pub order: u64,
    pub exponents: Vec<u64>,
}

impl PartialOrd for ExtensionKind {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtensionKind {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.label().cmp(other.label())
    }
}

/// A character of `K^x` of `p`-power order, trivial on `Q_p^x`, with values in
/// `mu_{p^level}`: `chi(u) = zeta^(index * ell(u))` on units and `chi(delta) = 1`.
#[derive(Clone, Debug)]
pub struct PadicCharacter {
    group: Arc<UnitGroupPresentation>,
    level: u32,
    index: u64,
    exponents: Vec<u64>,
    conductor: u32,
}

impl PartialEq for PadicCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.level == other.level && self.exponents == other.exponents && self.group.ext == other.group.ext
    }
}

impl PadicCharacter {
    fn build(group: Arc<UnitGroupPresentation>, level: u32, index: u64) -> Result<PadicCharacter> {
        let p = group.ext.p;
        let m = p.pow(level);
        let prec_avail = group.coords.prec - group.ell_shift;
        if level > prec_avail {
            return Err(UnitError::InsufficientModulus { have: group.modulus_exp, need: level, n: level });
        }
        let exponents: Vec<u64> = group.ell_on_gens.iter().map(|&l| mulmod(l % m, index % m, m)).collect();
        // the exponent vector must kill every relation
        for row in &group.relations {
            let s: i128 = row.iter().zip(&exponents).map(|(&r, &x)| r * x as i128).sum();
            if s.rem_euclid(m as i128) != 0 {
                return Err(UnitError::InsufficientModulus { have: group.modulus_exp, need: 0, n: level });
            }
        }
        let mut chi = PadicCharacter { group, level, index: index % m, exponents, conductor: 0 };
        chi.conductor = chi.compute_conductor()?;
        Ok(chi)
    }

    pub fn group(&self) -> &Arc<UnitGroupPresentation> {
        &self.group
    }

    pub fn extension(&self) -> &QuadExtension {
        &self.group.ext
    }

    /// Values lie in `mu_{p^level}`.
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn order(&self) -> u64 {
        let p = self.group.ext.p;
        if self.index == 0 {
            return 1;
        }
        let v = vp(self.index as i128, p).min(self.level);
        p.pow(self.level - v)
    }

    pub fn is_trivial(&self) -> bool {
        self.index == 0
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn id(&self) -> CharacterId {
        CharacterId { p: self.group.ext.p, kind: self.group.ext.kind, order: self.order(), exponents: self.exponents.clone() }
    }

    /// `chi^b` for an integer (or `p`-adic integer given mod `p^level`) `b`.
    pub fn pow(&self, b: i64) -> Result<PadicCharacter> {
        let m = self.group.ext.p.pow(self.level);
        let j = mulmod(self.index, reduce_i128(b as i128, m), m);
        PadicCharacter::build(self.group.clone(), self.level, j)
    }

    pub fn inverse(&self) -> Result<PadicCharacter> {
        self.pow(-1)
    }

    /// `chi^(-delta^2)`.
    pub fn pow_minus_delta_sq(&self) -> Result<PadicCharacter> {
        self.pow(-self.group.ext.delta_sq)
    }

    /// Exponent `t` with `chi(x) = zeta_{p^level}^t`.
    pub fn exponent_at(&self, x: QuadInt) -> Result<u64> {
        self.exponent_at_pair(self.group.to_pair(x))
    }

    fn exponent_at_pair(&self, x: Pair) -> Result<u64> {
        let m = self.group.ext.p.pow(self.level) as i128;
        let v = self.group.dlog_pair(x)?;
        let s: i128 = v.iter().zip(&self.exponents).map(|(&a, &b)| a * b as i128).sum();
        Ok(s.rem_euclid(m) as u64)
    }

    /// `chi(x)` as an exact element of `Z[zeta_{p^level}]`.
    pub fn evaluate(&self, x: QuadInt) -> Result<CyclotomicInt> {
        let t = self.exponent_at(x)?;
        Ok(CyclotomicInt::zeta_pow(self.group.ext.p, self.level, t as i64))
    }

    /// Exponent of `chi(delta)`; always 0 for `p`-power order.
    pub fn delta_exponent(&self) -> u64 {
        if self.group.ext.is_ramified() {
            0
        } else {
            self.exponent_at(QuadInt::new(0, 1)).expect("delta is a unit")
        }
    }

    /// `chi(1 + varpi^m)` exponent (ramified: `varpi = delta`).
    pub fn exponent_at_layer(&self, m: u32, c: i64) -> Result<u64> {
        let co = &self.group.coords;
        let x = co.add(co.one(), co.mul(co.uniformizer_pow(m), co.pair(c as i128, 0)));
        self.exponent_at_pair(x)
    }

    fn trivial_from_layer(&self, m: u32) -> Result<bool> {
        for k in m..self.group.modulus_exp_in_uniformizer() {
            for x in self.group.layer_elements(k) {
                if self.exponent_at_pair(x)? != 0 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn compute_conductor(&self) -> Result<u32> {
        if self.index == 0 {
            return Ok(0);
        }
        let n = self.group.modulus_exp;
        let mut a = n;
        for m in (1..=n).rev() {
            if self.trivial_from_layer(m)? {
                a = m;
            } else {
                break;
            }
        }
        if a == 1 {
            // trivial on principal units; check the Teichmuller part
            let t = self.exponents[0];
            if t == 0 {
                return Ok(0);
            }
        }
        Ok(a)
    }
}

impl fmt::Display for PadicCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi[{} j={} mod {}^{}]", self.group.ext, self.index, self.group.ext.p, self.level)
    }
}

/// A-priori conductor bound for characters of order `p^n`.
pub fn conductor_bound(ext: &QuadExtension, n: u32) -> u32 {
    if ext.is_ramified() {
        2 * n + 2
    } else {
        n + 1
    }
}

/// All anticyclotomic characters of exact order `p^n`, sorted by index.
pub fn anticyclotomic_characters(group: &Arc<UnitGroupPresentation>, n: u32) -> Result<Vec<PadicCharacter>> {
    let need = conductor_bound(&group.ext, n);
    if n > 0 && group.modulus_exp < need {
        return Err(UnitError::InsufficientModulus { have: group.modulus_exp, need, n });
    }
    let p = group.ext.p;
    if n == 0 {
        return Ok(vec![PadicCharacter::build(group.clone(), 0, 0)?]);
    }
    (1..p.pow(n)).filter(|j| j % p != 0).map(|j| PadicCharacter::build(group.clone(), n, j)).collect()
}

/// Conductor of `chi` (cached at construction).
pub fn conductor(chi: &PadicCharacter) -> u32 {
    chi.conductor()
}

/// Build a presentation large enough for characters of order up to `p^n_max`.
pub fn unit_group_for_order(ext: &QuadExtension, n_max: u32) -> Result<Arc<UnitGroupPresentation>> {
    Ok(Arc::new(build_unit_group(ext, conductor_bound(ext, n_max).max(2))?))
}
