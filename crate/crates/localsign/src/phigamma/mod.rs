//! Étale (φ, Γ)-modules of rank one and two over `F_q((X))`, their Herr
//! cohomology with the cup-product pairing, Colmez's operator `w_*` and the
//! induced involution of `H^1`.
//!
//! Coefficients are a finite field (a [`Ring`] with `m = 1`). Rank-two
//! modules are upper triangular in a basis `e1, e2`:
//!
//! ```text
//! phi(e1) = l1 e1            phi(e2) = x e1 + l2 e2
//! sigma_a(e1) = c1 e1        sigma_a(e2) = y e1 + c2 e2
//! ```
//!
//! with `l_i, c_i` constants and `x, y` Laurent series. Elements are vectors
//! of [`TruncatedLaurentSeries`] in this basis.

mod cohomology;
mod involution;
mod lsd;
mod solve;
mod spec;

pub use cohomology::*;
pub use involution::*;
pub use lsd::*;
pub use solve::*;
pub use spec::*;

use crate::padic_core::{ilog, least_primitive_root_p2, powmod, ArithError, Coeff, Ring};
use crate::series::{SeriesError, TruncatedLaurentSeries, EXACT};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Series = TruncatedLaurentSeries;
/// Coordinates of a module element in the basis `e1, ..., er`.
pub type Vector = Vec<Series>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PhiGammaError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("coefficients must be a finite field (m = 1), got {0}")]
    NotAField(String),
    #[error("{0} must be a unit")]
    NotUnit(&'static str),
    #[error("value at the generator has order not dividing p - 1")]
    NotTame,
    #[error("{0} is not a primitive root modulo p^2")]
    BadGenerator(u64),
    #[error("modules do not match: {0}")]
    Mismatch(String),
    #[error("phi and sigma_a do not commute below X^{0}")]
    Commutation(i64),
    #[error("module is not symplectic self-dual: {0}")]
    NotSelfDual(String),
    #[error("module is not generic: {0}")]
    NotGeneric(String),
    #[error("precision exhausted: {0}")]
    Precision(String),
    #[error("ranks did not stabilize over the window schedule: {0}")]
    Stabilization(String),
    #[error("Euler characteristic check failed: {0}")]
    Euler(String),
    #[error("not in the image of 1 - phi: {0}")]
    NotInImage(String),
    #[error("linear system has no solution: {0}")]
    Unsolvable(String),
    #[error("w_* did not stabilize: {0}")]
    WLimit(String),
    #[error("certificate failed: {0}")]
    Certificate(String),
    #[error("path A and path B disagree: {0}")]
    PathDisagreement(String),
    #[error("invalid module spec: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, PhiGammaError>;

/// A character of `G_{Q_p}` with values in `F_q^x`, given by the action of
/// Frobenius (`phi`) and of the generator `sigma_a` on a basis vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RankOneData {
    pub at_p: Coeff,
    pub at_gen: Coeff,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Rank1,
    #[serde(rename = "sum")]
    DirectSum,
    Extension,
}

impl Construction {
    pub fn label(&self) -> &'static str {
        match self {
            Construction::Rank1 => "rank1",
            Construction::DirectSum => "sum",
            Construction::Extension => "extension",
        }
    }
}

/// The matrix of `sigma_c` for one unit `c`: diagonal constants plus the
/// off-diagonal series of a triangular module.
#[derive(Clone, Debug)]
pub struct GammaAction {
    /// `c` as an integer modulo `p^t`.
    pub c: i64,
    pub diag: Vec<Coeff>,
    pub off: Option<Series>,
}

#[derive(Clone, Debug)]
pub struct PhiGammaModule {
    ring: Ring,
    gamma_generator: u64,
    diag: Vec<RankOneData>,
    phi_off: Option<Series>,
    gamma_off: Option<Series>,
    construction: Construction,
    tail_bound: i64,
}

fn check_field(ring: &Ring) -> Result<()> {
    if ring.m() != 1 {
        return Err(PhiGammaError::NotAField(ring.to_string()));
    }
    Ok(())
}

fn check_generator(p: u64, a: u64) -> Result<()> {
    let pp = p * p;
    let order = (1..=pp).find(|&k| powmod(a % pp, k, pp) == 1);
    if a.is_multiple_of(p) || order != Some(p * (p - 1)) {
        return Err(PhiGammaError::BadGenerator(a));
    }
    Ok(())
}

/// `k` with `g^k = x` in `F_p^x`, for a primitive root `g`.
pub(crate) fn dlog_mod_p(g: u64, x: u64, p: u64) -> Option<u64> {
    let mut acc = 1 % p;
    for k in 0..p - 1 {
        if acc == x % p {
            return Some(k);
        }
        acc = acc * g % p;
    }
    None
}

impl PhiGammaModule {
    /// `E(delta)` with `phi(e) = at_p e` and `sigma_a(e) = at_gen e`, for the
    /// default generator `a` (least primitive root modulo `p^2`).
    pub fn rank1(ring: Ring, at_p: Coeff, at_gen: Coeff) -> Result<PhiGammaModule> {
        check_field(&ring)?;
        if !ring.is_unit(at_p) {
            return Err(PhiGammaError::NotUnit("value at p"));
        }
        if !ring.is_unit(at_gen) {
            return Err(PhiGammaError::NotUnit("value at the generator"));
        }
        if ring.pow(at_gen, ring.p() - 1) != ring.one() {
            return Err(PhiGammaError::NotTame);
        }
        Ok(PhiGammaModule {
            ring,
            gamma_generator: least_primitive_root_p2(ring.p()),
            diag: vec![RankOneData { at_p, at_gen }],
            phi_off: None,
            gamma_off: None,
            construction: Construction::Rank1,
            tail_bound: crate::series::DEFAULT_TAIL_BOUND,
        })
    }

    /// `E(omega^r mu_lambda)`: `omega` the mod-p cyclotomic character and
    /// `mu_lambda` unramified with Frobenius acting by `lambda`.
    pub fn tame(ring: Ring, r: i64, lambda: Coeff) -> Result<PhiGammaModule> {
        check_field(&ring)?;
        let p = ring.p();
        let a = least_primitive_root_p2(p);
        let at_gen = ring.from_int(powmod(a % p, r.rem_euclid(p as i64 - 1) as u64, p) as i64);
        PhiGammaModule::rank1(ring, lambda, at_gen)
    }

    /// Same as [`rank1`](Self::rank1) with `at_gen` the value at an explicit
    /// generator `a` of `Z_p^x`.
    pub fn rank1_with_generator(ring: Ring, at_p: Coeff, at_gen: Coeff, a: u64) -> Result<PhiGammaModule> {
        check_generator(ring.p(), a)?;
        let mut m = PhiGammaModule::rank1(ring, at_p, at_gen)?;
        m.gamma_generator = a;
        Ok(m)
    }

    /// Replace the generator `a` of `Z_p^x`. Only allowed on rank-one modules,
    /// whose value at `a` is then reinterpreted through `omega`.
    pub fn with_generator(mut self, a: u64) -> Result<PhiGammaModule> {
        let p = self.ring.p();
        check_generator(p, a)?;
        if self.rank() != 1 {
            return Err(PhiGammaError::Mismatch("generator can only be changed on rank-one modules".into()));
        }
        let r = self.tame_exponent(0).ok_or(PhiGammaError::NotTame)?;
        self.diag[0].at_gen = self.ring.from_int(powmod(a % p, r, p) as i64);
        self.gamma_generator = a;
        Ok(self)
    }

    pub fn direct_sum(d1: &PhiGammaModule, d2: &PhiGammaModule) -> Result<PhiGammaModule> {
        Self::check_pair(d1, d2)?;
        Ok(PhiGammaModule {
            ring: d1.ring,
            gamma_generator: d1.gamma_generator,
            diag: vec![d1.diag[0], d2.diag[0]],
            phi_off: None,
            gamma_off: None,
            construction: Construction::DirectSum,
            tail_bound: d1.tail_bound.min(d2.tail_bound),
        })
    }

    /// Extension `0 -> D1 -> D -> D2 -> 0` attached to a cocycle `(a, b)` of
    /// the twist `D1 (x) D2^-1`: `phi(e2) = l2 a e1 + l2 e2`,
    /// `sigma_a(e2) = c2 b e1 + c2 e2`.
    pub fn extension(d1: &PhiGammaModule, d2: &PhiGammaModule, cocycle: &Cocycle) -> Result<PhiGammaModule> {
        Self::check_pair(d1, d2)?;
        if cocycle.phi_part.len() != 1 || cocycle.gamma_part.len() != 1 {
            return Err(PhiGammaError::Mismatch("cocycle must live in a rank-one module".into()));
        }
        let r = d1.ring;
        let (l2, c2) = (d2.diag[0].at_p, d2.diag[0].at_gen);
        let d = PhiGammaModule {
            ring: r,
            gamma_generator: d1.gamma_generator,
            diag: vec![d1.diag[0], d2.diag[0]],
            phi_off: Some(cocycle.phi_part[0].scale(l2)),
            gamma_off: Some(cocycle.gamma_part[0].scale(c2)),
            construction: Construction::Extension,
            tail_bound: d1.tail_bound.min(d2.tail_bound),
        };
        d.check_commutation()?;
        Ok(d)
    }

    /// Extension from the `phi` component `a` of the cocycle alone; the
    /// `sigma_a` component is the solution of `(rho phi - 1) b = eta sigma_a(a) - a`
    /// with vanishing constant term when `rho = 1`, known modulo `X^prec`.
    pub fn extension_from_phi_part(d1: &PhiGammaModule, d2: &PhiGammaModule, a: &Series, prec: i64) -> Result<PhiGammaModule> {
        Self::check_pair(d1, d2)?;
        let tw = Self::twist(d1, d2)?;
        let r = tw.ring;
        let (rho, eta) = (tw.diag[0].at_p, tw.diag[0].at_gen);
        let at = a.truncate(prec);
        let sa = at.sigma_int_split(tw.gamma_generator as i64)?;
        // (1 - rho phi) b = a - eta sigma_a(a)
        let rhs = at.sub(&sa.scale(eta))?;
        let b = solve_rank1(r, rho, &rhs)?.particular;
        Self::extension(d1, d2, &Cocycle { phi_part: vec![a.clone()], gamma_part: vec![b] })
    }

    /// `E(delta1 / delta2)`.
    pub fn twist(d1: &PhiGammaModule, d2: &PhiGammaModule) -> Result<PhiGammaModule> {
        Self::check_pair(d1, d2)?;
        let r = d1.ring;
        let inv = |c: Coeff| r.inv(c).expect("unit");
        let mut t = PhiGammaModule::rank1(
            r,
            r.mul(d1.diag[0].at_p, inv(d2.diag[0].at_p)),
            r.mul(d1.diag[0].at_gen, inv(d2.diag[0].at_gen)),
        )?;
        t.gamma_generator = d1.gamma_generator;
        Ok(t)
    }

    fn check_pair(d1: &PhiGammaModule, d2: &PhiGammaModule) -> Result<()> {
        if d1.rank() != 1 || d2.rank() != 1 {
            return Err(PhiGammaError::Mismatch("both pieces must have rank one".into()));
        }
        if d1.ring != d2.ring || d1.gamma_generator != d2.gamma_generator {
            return Err(PhiGammaError::Mismatch("rings or generators differ".into()));
        }
        Ok(())
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }
    pub fn rank(&self) -> usize {
        self.diag.len()
    }
    pub fn gamma_generator(&self) -> u64 {
        self.gamma_generator
    }
    pub fn construction(&self) -> Construction {
        self.construction
    }
    pub fn characters(&self) -> &[RankOneData] {
        &self.diag
    }
    pub fn phi_off(&self) -> Option<&Series> {
        self.phi_off.as_ref()
    }
    pub fn gamma_off(&self) -> Option<&Series> {
        self.gamma_off.as_ref()
    }
    pub fn tail_bound(&self) -> i64 {
        self.tail_bound
    }
    pub fn with_tail_bound(mut self, b: i64) -> Result<PhiGammaModule> {
        if self.pole_shift() + 1 > b {
            return Err(PhiGammaError::Precision(format!("matrix entries have poles beyond the tail bound {b}")));
        }
        self.tail_bound = b;
        Ok(self)
    }

    /// Certified X-precision of the matrix entries.
    pub fn precision(&self) -> i64 {
        let a = self.phi_off.as_ref().map_or(EXACT, |s| s.precision());
        let b = self.gamma_off.as_ref().map_or(EXACT, |s| s.precision());
        a.min(b)
    }

    fn pole(s: &Option<Series>) -> i64 {
        s.as_ref().map_or(0, |s| if s.is_zero() { 0 } else { (-s.valuation()).max(0) })
    }

    /// Poles of `x` and `y`; the lattices used for cohomology are shifted by
    /// the larger one between the two components.
    pub fn pole_shift(&self) -> i64 {
        Self::pole(&self.phi_off).max(Self::pole(&self.gamma_off))
    }

    /// `r` with `delta_i(sigma_a) = omega(a)^r`.
    pub fn tame_exponent(&self, i: usize) -> Option<u64> {
        let p = self.ring.p();
        let c = self.diag[i].at_gen;
        if c.0[1] != 0 {
            return None;
        }
        dlog_mod_p(self.gamma_generator % p, c.0[0], p)
    }

    /// Determinant character `(value at p, value at the generator)`.
    pub fn determinant(&self) -> RankOneData {
        let r = self.ring;
        self.diag.iter().fold(RankOneData { at_p: r.one(), at_gen: r.one() }, |acc, d| RankOneData {
            at_p: r.mul(acc.at_p, d.at_p),
            at_gen: r.mul(acc.at_gen, d.at_gen),
        })
    }

    /// Rank two with determinant the mod-p cyclotomic character, so that
    /// `e1 ^ e2` gives a perfect alternating pairing into `E(omega)`.
    pub fn is_symplectic_self_dual(&self) -> bool {
        let det = self.determinant();
        let a = self.ring.from_int((self.gamma_generator % self.ring.p()) as i64);
        self.rank() == 2 && det.at_p == self.ring.one() && det.at_gen == a
    }

    pub fn sub_module(&self) -> PhiGammaModule {
        self.piece(0)
    }

    pub fn quotient_module(&self) -> PhiGammaModule {
        self.piece(self.rank() - 1)
    }

    fn piece(&self, i: usize) -> PhiGammaModule {
        PhiGammaModule {
            ring: self.ring,
            gamma_generator: self.gamma_generator,
            diag: vec![self.diag[i]],
            phi_off: None,
            gamma_off: None,
            construction: Construction::Rank1,
            tail_bound: self.tail_bound,
        }
    }

    /// `E(omega delta^-1)` for a rank-one module: the Tate dual twist.
    pub fn dual_twist(&self) -> Result<PhiGammaModule> {
        if self.rank() != 1 {
            return Err(PhiGammaError::Mismatch("dual twist of a rank-two module".into()));
        }
        let r = self.ring;
        let a = r.from_int((self.gamma_generator % r.p()) as i64);
        let d = self.diag[0];
        let mut t = PhiGammaModule::rank1(r, r.inv(d.at_p).expect("unit"), r.mul(a, r.inv(d.at_gen).expect("unit")))?;
        t.gamma_generator = self.gamma_generator;
        Ok(t)
    }

    pub fn zero_vector(&self, prec: i64) -> Vector {
        vec![Series::zero(self.ring, prec); self.rank()]
    }

    /// `X^e` in component `j`.
    pub fn monomial(&self, j: usize, e: i64, prec: i64) -> Vector {
        let mut v = self.zero_vector(prec);
        v[j] = Series::monomial(self.ring, self.ring.one(), e, prec);
        v
    }

    pub fn phi(&self, v: &[Series]) -> Result<Vector> {
        let fv: Vec<Series> = v.iter().map(|s| s.phi()).collect::<std::result::Result<_, _>>()?;
        let mut out: Vector = fv.iter().zip(&self.diag).map(|(s, d)| s.scale(d.at_p)).collect();
        if let Some(x) = &self.phi_off {
            out[0] = out[0].add(&x.mul(&fv[1])?)?;
        }
        Ok(out)
    }

    pub fn psi(&self, v: &[Series]) -> Result<Vector> {
        let r = self.ring;
        let inv: Vec<Coeff> = self.diag.iter().map(|d| r.inv(d.at_p).expect("unit")).collect();
        let mut g: Vector = v.iter().zip(&inv).map(|(s, &c)| s.scale(c)).collect();
        if let Some(x) = &self.phi_off {
            // e2 = phi(e1) (-x / (l1 l2)) + phi(e2) / l2
            let c = r.neg(r.mul(inv[0], inv[1]));
            g[0] = g[0].add(&x.mul(&v[1])?.scale(c))?;
        }
        Ok(g.iter().map(|s| s.psi()).collect::<std::result::Result<_, _>>()?)
    }

    /// `sigma_a` for the chosen generator.
    pub fn gamma(&self, v: &[Series]) -> Result<Vector> {
        self.apply_gamma(&self.generator_action(), v)
    }

    pub fn generator_action(&self) -> GammaAction {
        GammaAction {
            c: self.gamma_generator as i64,
            diag: self.diag.iter().map(|d| d.at_gen).collect(),
            off: self.gamma_off.clone(),
        }
    }

    pub fn apply_gamma(&self, g: &GammaAction, v: &[Series]) -> Result<Vector> {
        let sv: Vec<Series> = v.iter().map(|s| s.sigma_int_split(g.c)).collect::<std::result::Result<_, _>>()?;
        let mut out: Vector = sv.iter().zip(&g.diag).map(|(s, &c)| s.scale(c)).collect();
        if let Some(y) = &g.off {
            out[0] = out[0].add(&y.mul(&sv[1])?)?;
        }
        Ok(out)
    }

    /// The matrix of `sigma_c` for a unit `c`, correct modulo `X^prec` for
    /// inputs with poles of order at most `pole`.
    pub fn gamma_action(&self, c: i64, prec: i64, pole: i64) -> Result<GammaAction> {
        let p = self.ring.p();
        if c.rem_euclid(p as i64) == 0 {
            return Err(PhiGammaError::NotUnit("sigma_c argument"));
        }
        // sigma_c on F((X)) mod X^N only depends on c mod p^t once p^t > N + pole
        let span = (prec + pole + self.pole_shift() + 2).max(2) as u64;
        let t = ilog(span, p) + 1;
        let pt = p.pow(t) as i64;
        let c = c.rem_euclid(pt);
        let a = (self.gamma_generator as i64).rem_euclid(pt);
        let r = self.ring;
        let k = dlog_mod_p(a as u64 % p, c as u64 % p, p).expect("a is a primitive root");
        let diag = self.diag.iter().map(|d| r.pow(d.at_gen, k)).collect();
        if self.gamma_off.is_none() {
            return Ok(GammaAction { c, diag, off: None });
        }
        // full exponent of c as a power of a modulo p^t
        let order = (p - 1) as i64 * pt / p as i64;
        let mut acc = 1i64;
        let mut e = None;
        for j in 0..order {
            if acc == c {
                e = Some(j);
                break;
            }
            acc = acc * a % pt;
        }
        let e = e.ok_or(PhiGammaError::BadGenerator(self.gamma_generator))?;
        let need = self.precision().min(prec + pole + self.pole_shift() + 2);
        let mut result = GammaAction { c: 1, diag: vec![r.one(); 2], off: Some(Series::zero(r, need)) };
        let mut base = self.generator_action();
        base.c = a;
        base.off = base.off.map(|y| y.truncate(need));
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = self.compose_actions(&result, &base, pt)?;
            }
            base = self.compose_actions(&base, &base, pt)?;
            e >>= 1;
        }
        result.c = c;
        Ok(result)
    }

    /// `G_{cd} = G_c sigma_c(G_d)`.
    fn compose_actions(&self, g: &GammaAction, h: &GammaAction, pt: i64) -> Result<GammaAction> {
        let r = self.ring;
        let diag = vec![r.mul(g.diag[0], h.diag[0]), r.mul(g.diag[1], h.diag[1])];
        let go = g.off.as_ref().expect("triangular");
        let ho = h.off.as_ref().expect("triangular");
        let off = ho.sigma_int_split(g.c)?.scale(g.diag[0]).add(&go.scale(h.diag[1]))?;
        Ok(GammaAction { c: (g.c as i128 * h.c as i128).rem_euclid(pt as i128) as i64, diag, off: Some(off) })
    }

    /// `l1 phi(y) + c2 x - c1 sigma_a(x) - l2 y = 0` at the certified precision.
    pub fn check_commutation(&self) -> Result<i64> {
        let (Some(x), Some(y)) = (&self.phi_off, &self.gamma_off) else {
            return Ok(EXACT);
        };
        let r = self.ring;
        let (d1, d2) = (self.diag[0], self.diag[1]);
        let lhs = y
            .phi()?
            .scale(d1.at_p)
            .add(&x.scale(d2.at_gen))?
            .sub(&x.truncate(y.precision()).sigma_int_split(self.gamma_generator as i64)?.scale(d1.at_gen))?
            .sub(&y.scale(d2.at_p))?;
        if !lhs.is_zero() {
            return Err(PhiGammaError::Commutation(lhs.valuation()));
        }
        let _ = r;
        Ok(lhs.precision())
    }
}
