//! Epsilon, Gamma and completed epsilon constants of the rank-two
//! representations `Ind_K^{Q_p}(phi_K psi^k chi)`, and the sign partition of
//! anticyclotomic characters they induce.

use crate::oracles::{hilbert_symbol_tame, PadicNumber};
use crate::padic_core::{legendre, p_star, quadratic_gauss_sum, ArithError, CyclotomicInt};
use crate::unit_characters::{
    anticyclotomic_characters, unit_group_for_order, CharacterId, PadicCharacter, QuadExtension, UnitError,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EpsilonError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Unit(#[from] UnitError),
    #[error("operation needs a ramified extension")]
    NeedsRamified,
    #[error("operation needs an unramified extension")]
    NeedsUnramified,
    #[error("operation needs a ramified character")]
    UnramifiedCharacter,
    #[error("value {0} is not a sign")]
    NotSign(String),
    #[error("rational overflow while evaluating the Gamma constant")]
    Overflow,
}

pub type Result<T> = std::result::Result<T, EpsilonError>;

/// Hodge-Tate weights with multiplicities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HodgeTateProfile {
    weights: BTreeMap<i64, u32>,
}

impl HodgeTateProfile {
    pub fn new(pairs: &[(i64, u32)]) -> HodgeTateProfile {
        let mut weights = BTreeMap::new();
        for &(w, m) in pairs {
            if m > 0 {
                *weights.entry(w).or_insert(0) += m;
            }
        }
        HodgeTateProfile { weights }
    }

    /// Weights `(k+1, -k)` of the induced representations.
    pub fn induced(k: u32) -> HodgeTateProfile {
        HodgeTateProfile::new(&[(k as i64 + 1, 1), (-(k as i64), 1)])
    }

    pub fn rank(&self) -> u32 {
        self.weights.values().sum()
    }

    pub fn weights(&self) -> impl Iterator<Item = (i64, u32)> + '_ {
        self.weights.iter().map(|(&w, &m)| (w, m))
    }

    /// `w` and `1 - w` occur with equal multiplicity.
    pub fn is_symplectic_self_dual(&self) -> bool {
        self.weights.iter().all(|(&w, &m)| self.weights.get(&(1 - w)).copied().unwrap_or(0) == m)
    }
}

/// An exact rational `num / den`, `den > 0`, in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub num: i128,
    pub den: i128,
}

impl Rational {
    fn new(num: i128, den: i128) -> Rational {
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Rational { num: s * num / g, den: s * den / g }
    }

    fn mul(self, o: Rational) -> Option<Rational> {
        let g1 = gcd(self.num, o.den).max(1);
        let g2 = gcd(o.num, self.den).max(1);
        let num = (self.num / g1).checked_mul(o.num / g2)?;
        let den = (self.den / g2).checked_mul(o.den / g1)?;
        Some(Rational::new(num, den))
    }

    fn inv(self) -> Rational {
        Rational::new(self.den, self.num)
    }

    pub fn as_sign(&self) -> Option<i32> {
        match (self.num, self.den) {
            (1, 1) => Some(1),
            (-1, 1) => Some(-1),
            _ => None,
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `Gamma^*(r)`: `(r-1)!` for `r >= 1`, `(-1)^r / (-r)!` for `r <= 0`.
fn gamma_star(r: i64) -> Option<Rational> {
    let fact = |n: i64| (1..=n as i128).try_fold(1i128, |acc, x| acc.checked_mul(x));
    if r >= 1 {
        Some(Rational::new(fact(r - 1)?, 1))
    } else {
        let s = if r % 2 == 0 { 1 } else { -1 };
        Some(Rational::new(s, fact(-r)?))
    }
}

/// `prod_w Gamma^*(w)^(-mult(w))`.
pub fn gamma_constant(profile: &HodgeTateProfile) -> Result<Rational> {
    let mut acc = Rational::new(1, 1);
    // interleave w and 1-w so self-dual profiles stay small
    let mut order: Vec<(i64, u32)> = profile.weights().collect();
    order.sort_by_key(|&(w, _)| (w.min(1 - w), w));
    for (w, m) in order {
        let f = gamma_star(w).ok_or(EpsilonError::Overflow)?.inv();
        for _ in 0..m {
            acc = acc.mul(f).ok_or(EpsilonError::Overflow)?;
        }
    }
    Ok(acc)
}

/// `(-1)^(sum_{w <= 0} w mult(w))`, the closed form on symplectic self-dual profiles.
pub fn gamma_parity(profile: &HodgeTateProfile) -> i32 {
    let s: i64 = profile.weights().filter(|&(w, _)| w <= 0).map(|(w, m)| w * m as i64).sum();
    if s.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Choice of `sqrt(p*)` entering `phi_K(delta)`; `Plus` is the quadratic Gauss sum
/// built from the same `zeta_p` as the character values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SqrtChoice {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl SqrtChoice {
    pub fn sign(&self) -> i32 {
        match self {
            SqrtChoice::Plus => 1,
            SqrtChoice::Minus => -1,
        }
    }

    pub fn parse(s: &str) -> Option<SqrtChoice> {
        match s {
            "+" | "plus" => Some(SqrtChoice::Plus),
            "-" | "minus" => Some(SqrtChoice::Minus),
            _ => None,
        }
    }

    pub fn flip(&self) -> SqrtChoice {
        match self {
            SqrtChoice::Plus => SqrtChoice::Minus,
            SqrtChoice::Minus => SqrtChoice::Plus,
        }
    }
}

impl fmt::Display for SqrtChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if *self == SqrtChoice::Plus { "+" } else { "-" })
    }
}

/// `Ind_K^{Q_p}(phi_K psi^k chi)` with Hodge-Tate weights `(k+1, -k)`.
#[derive(Clone, Debug)]
pub struct InducedSelfDualSpec {
    pub k: u32,
    pub sqrt_choice: SqrtChoice,
    pub chi: PadicCharacter,
}

impl InducedSelfDualSpec {
    pub fn new(chi: PadicCharacter, k: u32, sqrt_choice: SqrtChoice) -> InducedSelfDualSpec {
        InducedSelfDualSpec { k, sqrt_choice, chi }
    }

    pub fn extension(&self) -> &QuadExtension {
        self.chi.extension()
    }

    pub fn with_character(&self, chi: PadicCharacter) -> InducedSelfDualSpec {
        InducedSelfDualSpec { chi, ..self.clone() }
    }
}

/// `omega_{K/Q_p}(a) = (a, delta^2)_p`.
pub fn omega_k(ext: &QuadExtension, a: i64) -> Result<i32> {
    let d = PadicNumber::new(ext.delta_sq_valuation(), ext.delta_sq_unit());
    Ok(hilbert_symbol_tame(PadicNumber::from_int(a, ext.p), d, ext.p)?)
}

/// `chi(delta) (-1)^a(chi)` for unramified `K`.
pub fn epsilon_induced_unramified(chi: &PadicCharacter) -> Result<i32> {
    if chi.extension().is_ramified() {
        return Err(EpsilonError::NeedsUnramified);
    }
    let chi_delta = match chi.delta_exponent() {
        0 => 1,
        e => return Err(EpsilonError::NotSign(format!("chi(delta) = zeta^{e}"))),
    };
    let parity = if chi.conductor().is_multiple_of(2) { 1 } else { -1 };
    Ok(chi_delta * parity)
}

/// `G_{chi,delta} = sum_{t in F_p^x} (t/p) chi(1 + delta^(a-1))^t`.
pub fn gauss_like_sum(chi: &PadicCharacter) -> Result<CyclotomicInt> {
    let ext = chi.extension();
    if !ext.is_ramified() {
        return Err(EpsilonError::NeedsRamified);
    }
    let a = chi.conductor();
    if a == 0 {
        return Err(EpsilonError::UnramifiedCharacter);
    }
    let p = ext.p;
    let x = chi.exponent_at_layer(a - 1, 1)? as i64;
    let mut g = CyclotomicInt::zero(p, chi.level());
    for t in 1..p as i64 {
        let z = CyclotomicInt::zeta_pow(p, chi.level(), x * t);
        g = if legendre(t, p)? == 1 { &g + &z } else { &g - &z };
    }
    Ok(g)
}

/// `G g / p*`, certified to be a rational sign by exact division.
pub fn normalized_gauss_sign(chi: &PadicCharacter) -> Result<i32> {
    let p = chi.extension().p;
    let g = quadratic_gauss_sum(p)?.lift_to(chi.level().max(1));
    let big = gauss_like_sum(chi)?.lift_to(chi.level().max(1));
    let q = (&big * &g).exact_div(p_star(p))?;
    match q.as_integer() {
        Some(1) => Ok(1),
        Some(-1) => Ok(-1),
        _ => Err(EpsilonError::NotSign(q.to_string())),
    }
}

/// `epsilon(Ind phi_K chi)` for ramified `K`; the weight `k` is ignored.
pub fn epsilon_induced_ramified(spec: &InducedSelfDualSpec) -> Result<i32> {
    let ext = spec.extension();
    if !ext.is_ramified() {
        return Err(EpsilonError::NeedsRamified);
    }
    let w = omega_k(ext, -2)?;
    let chi = &spec.chi;
    if chi.conductor() == 0 {
        return Ok(w);
    }
    if chi.delta_exponent() != 0 {
        return Err(EpsilonError::NotSign("chi(delta) != 1".into()));
    }
    let a = chi.conductor();
    let minus_one = legendre(-1, ext.p)?;
    let m = if (a / 2).is_multiple_of(2) { 1 } else { minus_one };
    Ok(spec.sqrt_choice.sign() * w * m * normalized_gauss_sign(chi)?)
}

/// `epsilon` of the matching kind, for `k = 0`.
pub fn epsilon(spec: &InducedSelfDualSpec) -> Result<i32> {
    if spec.extension().is_ramified() {
        epsilon_induced_ramified(spec)
    } else {
        epsilon_induced_unramified(&spec.chi)
    }
}

/// Completed epsilon `Gamma * epsilon` including the `psi^k` twist.
pub fn completed_epsilon(spec: &InducedSelfDualSpec) -> Result<i32> {
    let gamma = gamma_constant(&HodgeTateProfile::induced(spec.k))?
        .as_sign()
        .ok_or_else(|| EpsilonError::NotSign("Gamma".into()))?;
    let ext = spec.extension();
    let eps = epsilon(spec)?;
    let twist = if ext.is_ramified() {
        // psi^k contributes (-1)^k (-1/p)^k at delta
        let per = -legendre(-1, ext.p)?;
        if spec.k.is_multiple_of(2) {
            1
        } else {
            per
        }
    } else {
        1
    };
    Ok(gamma * eps * twist)
}

/// A reducible lift `0 -> T1 -> T -> T2 -> 0` of a tame residual module,
/// with `T1 = chi_cyc^m omega^n mu`, `mu` unramified and `T2` its Tate dual.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducibleLift {
    /// Hodge-Tate weight `m` of `T1`; the quotient has weight `1 - m`.
    pub weight: i64,
    /// Exponent `n` of `omega` in `T1`, taken mod `p - 1`.
    pub omega_exponent: i64,
    /// Nonzero monodromy: only for `T1 = Z_p(1)`, `T2 = Z_p` (semistable, not crystalline).
    pub monodromy: bool,
}

impl ReducibleLift {
    /// `epsilon` of the Weil-Deligne representation: `omega^n(-1)` from the
    /// two tame characters, and a further `-1` from `det(-Frob | D / D^(N=0))`.
    pub fn wd_epsilon(&self) -> i32 {
        let chars = if self.omega_exponent.rem_euclid(2) == 0 { 1 } else { -1 };
        if self.monodromy {
            -chars
        } else {
            chars
        }
    }

    pub fn hodge_tate(&self) -> HodgeTateProfile {
        HodgeTateProfile::new(&[(self.weight, 1), (1 - self.weight, 1)])
    }

    pub fn completed_epsilon(&self) -> Result<i32> {
        let gamma = gamma_constant(&self.hodge_tate())?
            .as_sign()
            .ok_or_else(|| EpsilonError::NotSign("Gamma".into()))?;
        Ok(gamma * self.wd_epsilon())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Label {
    pub fn from_sign(s: i32) -> Label {
        if s > 0 {
            Label::Plus
        } else {
            Label::Minus
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if *self == Label::Plus { "+" } else { "-" })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignRecord {
    pub character: CharacterId,
    pub index: u64,
    pub order_exp: u32,
    pub conductor: u32,
    pub epsilon: i32,
    pub epsilon_hat: i32,
    pub label: Label,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableHeader {
    pub p: u64,
    pub kind: String,
    pub delta_sq: i64,
    pub k: u32,
    pub sqrt_choice: SqrtChoice,
    pub max_order_exp: u32,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConductorCount {
    pub conductor: u32,
    pub plus: usize,
    pub minus: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderCount {
    pub order_exp: u32,
    pub plus: usize,
    pub minus: usize,
}

/// The partition of anticyclotomic characters by the sign of `hat epsilon(chi^-1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignPartitionTable {
    pub header: TableHeader,
    pub records: Vec<SignRecord>,
    pub by_conductor: Vec<ConductorCount>,
    pub by_order: Vec<OrderCount>,
}

impl SignPartitionTable {
    /// `|Xi^+_n| = |Xi^-_n|` for every `n >= 1`.
    pub fn is_balanced(&self) -> bool {
        self.by_order.iter().filter(|c| c.order_exp >= 1).all(|c| c.plus == c.minus)
    }
}

fn record(spec: &InducedSelfDualSpec, order_exp: u32) -> Result<SignRecord> {
    let chi = &spec.chi;
    let inv = spec.with_character(chi.inverse()?);
    Ok(SignRecord {
        character: chi.id(),
        index: chi.index(),
        order_exp,
        conductor: chi.conductor(),
        epsilon: epsilon(spec)?,
        epsilon_hat: completed_epsilon(spec)?,
        label: Label::from_sign(completed_epsilon(&inv)?),
    })
}

/// Label every anticyclotomic character of order `p^n`, `n <= n_max`.
pub fn partition(ext: &QuadExtension, k: u32, sqrt_choice: SqrtChoice, n_max: u32) -> Result<SignPartitionTable> {
    let group = unit_group_for_order(ext, n_max)?;
    let mut chars = Vec::new();
    for n in 0..=n_max {
        for chi in anticyclotomic_characters(&group, n)? {
            chars.push((n, chi));
        }
    }
    let mut records: Vec<SignRecord> = chars
        .par_iter()
        .map(|(n, chi)| record(&InducedSelfDualSpec::new(chi.clone(), k, sqrt_choice), *n))
        .collect::<Result<_>>()?;
    records.sort_by(|a, b| (a.conductor, &a.character).cmp(&(b.conductor, &b.character)));

    let mut by_c: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    let mut by_o: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    for r in &records {
        for (map, key) in [(&mut by_c, r.conductor), (&mut by_o, r.order_exp)] {
            let e = map.entry(key).or_default();
            if r.label == Label::Plus {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    Ok(SignPartitionTable {
        header: TableHeader {
            p: ext.p,
            kind: ext.kind.label().to_string(),
            delta_sq: ext.delta_sq,
            k,
            sqrt_choice,
            max_order_exp: n_max,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        records,
        by_conductor: by_c.into_iter().map(|(conductor, (plus, minus))| ConductorCount { conductor, plus, minus }).collect(),
        by_order: by_o.into_iter().map(|(order_exp, (plus, minus))| OrderCount { order_exp, plus, minus }).collect(),
    })
}
