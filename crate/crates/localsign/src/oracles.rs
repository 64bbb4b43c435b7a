//! Class-field-theoretic oracles for tame characters of `G_{Q_p}` with
//! `F_p` coefficients. Nothing here touches the series engine.

use crate::padic_core::{check_odd_prime, legendre, powmod, ArithError};
use serde::{Deserialize, Serialize};

/// A nonzero p-adic number given as `p^valuation * unit`, the unit known mod `p`
/// (or mod `p^2` where the wild part matters).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicNumber {
    pub valuation: i64,
    pub unit: i64,
}

impl PadicNumber {
    pub fn new(valuation: i64, unit: i64) -> PadicNumber {
        PadicNumber { valuation, unit }
    }

    /// Split an integer into valuation and unit part.
    pub fn from_int(mut a: i64, p: u64) -> PadicNumber {
        assert!(a != 0);
        let mut v = 0;
        while a % p as i64 == 0 {
            a /= p as i64;
            v += 1;
        }
        PadicNumber { valuation: v, unit: a }
    }

    pub fn mul(&self, o: &PadicNumber) -> PadicNumber {
        PadicNumber { valuation: self.valuation + o.valuation, unit: self.unit * o.unit }
    }
}

/// Tame Hilbert symbol `(a, b)_p = (-1)^(v(a) v(b) (p-1)/2) (u/p)^v(b) (w/p)^v(a)`
/// for `a = p^v(a) u`, `b = p^v(b) w`.
pub fn hilbert_symbol_tame(a: PadicNumber, b: PadicNumber, p: u64) -> Result<i32, ArithError> {
    check_odd_prime(p)?;
    let lu = legendre(a.unit, p)?;
    let lw = legendre(b.unit, p)?;
    if lu == 0 || lw == 0 {
        return Err(ArithError::NotUnit);
    }
    let sign = if (a.valuation * b.valuation).rem_euclid(2) == 1 && p % 4 == 3 { -1 } else { 1 };
    let pu = if b.valuation.rem_euclid(2) == 1 { lu } else { 1 };
    let pw = if a.valuation.rem_euclid(2) == 1 { lw } else { 1 };
    Ok(sign * pu * pw)
}

/// A tame character `omega^r * mu_lambda` of `G_{Q_p}` with values in `F_p^x`:
/// `omega` the mod-p cyclotomic character, `mu_lambda` unramified with
/// arithmetic Frobenius acting by `lambda`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TameCharacter {
    pub p: u64,
    pub r: u64,
    pub lambda: u64,
}

impl TameCharacter {
    pub fn new(p: u64, r: i64, lambda: i64) -> Result<TameCharacter, ArithError> {
        check_odd_prime(p)?;
        let lambda = lambda.rem_euclid(p as i64) as u64;
        if lambda == 0 {
            return Err(ArithError::NotUnit);
        }
        Ok(TameCharacter { p, r: r.rem_euclid(p as i64 - 1) as u64, lambda })
    }

    pub fn is_trivial(&self) -> bool {
        self.r == 0 && self.lambda == 1
    }

    pub fn is_cyclotomic(&self) -> bool {
        self.r == 1 % (self.p - 1) && self.lambda == 1
    }

    /// `omega * self^-1`, the Tate dual twist.
    pub fn dual(&self) -> TameCharacter {
        let p = self.p;
        let inv = powmod(self.lambda, p - 2, p);
        TameCharacter { p, r: (1 + p - 1 - self.r) % (p - 1), lambda: inv }
    }

    pub fn mul(&self, o: &TameCharacter) -> TameCharacter {
        let p = self.p;
        TameCharacter { p, r: (self.r + o.r) % (p - 1), lambda: self.lambda * o.lambda % p }
    }

    /// Value on the image of `a` (a unit mod p) under the tame inertia quotient,
    /// normalised so that `omega(a) = a mod p`.
    pub fn inertia_value(&self, a: u64) -> u64 {
        powmod(a, self.r, self.p)
    }
}

/// Dimensions `(h0, h1, h2)` of `H^i(Q_p, F_p(eta))` for tame `eta`.
///
/// `eta` splits over `L = Q_p(mu_p)` composed with an unramified extension, of
/// degree prime to `p`, so inflation-restriction gives
/// `H^1 = Hom_G(L^x / (L^x)^p, F_p(eta))`. As a `G`-module,
/// `L^x/(L^x)^p = F_p (valuation) + F_p[G] (principal units mod mu_p) + F_p(omega) (mu_p)`,
/// hence `h1` is `1 + [eta = 1] + [eta = omega]`. `h0` is the invariants of
/// `eta` and `h2` follows from the Euler characteristic `h0 - h1 + h2 = -1`.
pub fn cft_h1_dims(eta: &TameCharacter) -> (usize, usize, usize) {
    let mult_trivial = usize::from(eta.is_trivial());
    let mult_regular = 1;
    let mult_mu = usize::from(eta.is_cyclotomic());
    let h1 = mult_trivial + mult_regular + mult_mu;
    let h0 = usize::from(eta.is_trivial());
    let h2 = h1 - h0 - 1;
    (h0, h1, h2)
}

/// Kummer classes of `Q_p^x / (Q_p^x)^p`: the uniformizer `p` and the unit `1 + p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KummerClass {
    Uniformizer,
    Unit,
}

/// Homomorphisms `Q_p^x -> F_p`: the valuation and the normalised unit logarithm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HomClass {
    Unramified,
    Ramified,
}

impl KummerClass {
    /// A representative, as `p^v * u` with `u` mod `p^2`.
    pub fn representative(&self, p: u64) -> PadicNumber {
        match self {
            KummerClass::Uniformizer => PadicNumber::new(1, 1),
            KummerClass::Unit => PadicNumber::new(0, 1 + p as i64),
        }
    }
}

impl HomClass {
    /// Evaluate on `p^v u` (`u` a unit known mod `p^2`).
    pub fn evaluate(&self, a: PadicNumber, p: u64) -> u64 {
        let pp = p * p;
        match self {
            HomClass::Unramified => a.valuation.rem_euclid(p as i64) as u64,
            HomClass::Ramified => {
                // (u^(p-1) - 1)/p is additive on units; it equals -1 on 1+p
                let u = a.unit.rem_euclid(pp as i64) as u64;
                let t = powmod(u, p - 1, pp);
                let l = ((t + pp - 1) % pp) / p;
                (p - l % p) % p
            }
        }
    }
}

/// `chi(a)` for `a` the representative of the Kummer class.
pub fn evaluation_pairing(k: KummerClass, h: HomClass, p: u64) -> u64 {
    h.evaluate(k.representative(p), p)
}

/// Basis data of the Kummer side with its evaluation table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KummerClassBasis {
    pub p: u64,
    pub classes: [KummerClass; 2],
    pub homs: [HomClass; 2],
    pub table: [[u64; 2]; 2],
}

pub fn kummer_basis(p: u64) -> Result<KummerClassBasis, ArithError> {
    check_odd_prime(p)?;
    let classes = [KummerClass::Uniformizer, KummerClass::Unit];
    let homs = [HomClass::Unramified, HomClass::Ramified];
    let mut table = [[0; 2]; 2];
    for (i, k) in classes.iter().enumerate() {
        for (j, h) in homs.iter().enumerate() {
            table[i][j] = evaluation_pairing(*k, *h, p);
        }
    }
    Ok(KummerClassBasis { p, classes, homs, table })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hilbert_examples() {
        let n = |v, u| PadicNumber::new(v, u);
        assert_eq!(hilbert_symbol_tame(n(0, 3), n(0, 5), 7).unwrap(), 1);
        assert_eq!(hilbert_symbol_tame(PadicNumber::from_int(-2, 7), PadicNumber::from_int(-7, 7), 7).unwrap(), -1);
        // (p, p) = (-1/p)
        assert_eq!(hilbert_symbol_tame(n(1, 1), n(1, 1), 3).unwrap(), -1);
        assert_eq!(hilbert_symbol_tame(n(1, 1), n(1, 1), 5).unwrap(), 1);
    }

    #[test]
    fn cft_examples() {
        for p in [3u64, 5, 7] {
            // H^2(F_p) is dual to mu_p(Q_p) = 0
            assert_eq!(cft_h1_dims(&TameCharacter::new(p, 0, 1).unwrap()), (1, 2, 0));
            assert_eq!(cft_h1_dims(&TameCharacter::new(p, 1, 1).unwrap()), (0, 2, 1));
        }
        assert_eq!(cft_h1_dims(&TameCharacter::new(5, 1, 2).unwrap()), (0, 1, 0));
        assert_eq!(cft_h1_dims(&TameCharacter::new(5, 2, 1).unwrap()), (0, 1, 0));
    }

    #[test]
    fn evaluation_table_is_identity() {
        for p in [3u64, 5, 7, 11] {
            let b = kummer_basis(p).unwrap();
            assert_eq!(b.table, [[1, 0], [0, 1]]);
        }
    }

    #[test]
    fn local_duality_of_dims() {
        for p in [3u64, 5, 7] {
            for r in 0..p as i64 - 1 {
                for l in 1..p as i64 {
                    let eta = TameCharacter::new(p, r, l).unwrap();
                    let (h0, h1, h2) = cft_h1_dims(&eta);
                    assert_eq!(h0, cft_h1_dims(&eta.dual()).2);
                    assert_eq!(h0 as i64 - h1 as i64 + h2 as i64, -1);
                }
            }
        }
    }

    #[test]
    fn ramified_hom_is_additive() {
        let p = 5;
        let h = HomClass::Ramified;
        for a in 1..25i64 {
            for b in 1..25i64 {
                if a % 5 == 0 || b % 5 == 0 {
                    continue;
                }
                let x = h.evaluate(PadicNumber::new(0, a), p);
                let y = h.evaluate(PadicNumber::new(0, b), p);
                let z = h.evaluate(PadicNumber::new(0, a * b), p);
                assert_eq!((x + y) % p, z);
            }
        }
    }
}
