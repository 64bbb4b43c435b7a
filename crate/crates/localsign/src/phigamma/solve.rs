//! Solving `(1 - phi) z = w`.

use super::{PhiGammaError, PhiGammaModule, Result, Series, Vector};
use crate::padic_core::{Coeff, Ring};
use crate::series::EXACT;

/// Solution of `u - lambda phi(u) = g` in `F((X))`.
#[derive(Clone, Debug)]
pub struct PhiSolution {
    pub particular: Series,
    /// `1` when `lambda = 1` (the constants), otherwise `None`.
    pub kernel: Option<Series>,
}

/// Coefficients `u_{-m}`, `1 <= m <= max_pole`, of the polar part along the
/// chains `m, pm, p^2 m, ...`.
fn polar_chains(ring: Ring, lambda: Coeff, g: &Series, max_pole: i64) -> Vec<Coeff> {
    let p = ring.p() as i64;
    let mut neg = vec![ring.zero(); max_pole.max(0) as usize + 1];
    for m in 1..=max_pole {
        let mut c = g.coeff(-m);
        if m % p == 0 {
            c = ring.add(c, ring.mul(lambda, neg[(m / p) as usize]));
        }
        neg[m as usize] = c;
    }
    neg
}

/// A solution `u` of `u - lambda phi(u) = g - r`, linear in `g`, where the
/// correction `r` is read off the returned obstruction vector (see
/// [`rank1_obstruction`]); `max_pole` must bound the pole of `g`.
pub fn particular_rank1(ring: Ring, lambda: Coeff, g: &Series, max_pole: i64) -> Result<(Series, Vec<Coeff>)> {
    let p = ring.p() as i64;
    let n = g.precision();
    let one = ring.one();
    if !g.is_zero() && -g.valuation() > max_pole {
        return Err(PhiGammaError::Mismatch(format!("pole {} exceeds the bound {max_pole}", -g.valuation())));
    }
    let has_positive = g.terms().any(|(e, _)| e > 0);
    if n >= EXACT && has_positive {
        return Err(PhiGammaError::Precision("solving 1 - phi on an exact series with positive terms".into()));
    }
    if g.get(0).is_none() {
        return Err(PhiGammaError::Precision("right-hand side has no certified constant term".into()));
    }

    // positive part
    let top = if has_positive { n } else { 1 };
    let mut pos = vec![ring.zero(); top.max(1) as usize];
    for e in 1..top {
        let mut c = g.coeff(e);
        if e % p == 0 {
            c = ring.add(c, ring.mul(lambda, pos[(e / p) as usize]));
        }
        pos[e as usize] = c;
    }
    let g0 = g.coeff(0);
    pos[0] = if lambda == one { ring.zero() } else { ring.mul(g0, ring.inv(ring.sub(one, lambda)).expect("field")) };

    let neg = polar_chains(ring, lambda, g, max_pole);
    let mut obstruction = Vec::new();
    if lambda == one {
        obstruction.push(g0);
    }
    obstruction.extend((1..=max_pole).filter(|m| p * m > max_pole).map(|m| neg[m as usize]));
    let mut coeffs: Vec<Coeff> = neg[1..].iter().rev().copied().collect();
    coeffs.extend(pos);
    let prec = if has_positive { n } else { n.min(EXACT) };
    Ok((Series::new(ring, -max_pole, coeffs, prec), obstruction))
}

/// Solve `u - lambda phi(u) = g` for `u` in `F((X))`.
///
/// Positive exponents are solved by iterating `u = g + lambda phi(u)`, the
/// constant term directly, and the polar part along the chains
/// `n, pn, p^2 n, ...`, whose tops past the pole of `g` must vanish.
pub fn solve_rank1(ring: Ring, lambda: Coeff, g: &Series) -> Result<PhiSolution> {
    let pole = if g.is_zero() { 0 } else { (-g.valuation()).max(0) };
    let (u, obstruction) = particular_rank1(ring, lambda, g, pole)?;
    let mut ob = obstruction.iter();
    if lambda == ring.one() && !ring.is_zero(*ob.next().expect("constant obstruction")) {
        return Err(PhiGammaError::NotInImage("constant term of the right-hand side is nonzero and lambda = 1".into()));
    }
    if ob.any(|&c| !ring.is_zero(c)) {
        return Err(PhiGammaError::NotInImage("a polar chain does not terminate".into()));
    }
    let kernel = (lambda == ring.one()).then(|| Series::one(ring, u.precision()));
    Ok(PhiSolution { particular: u, kernel })
}

/// Solution of `(1 - phi_D) z = w`, with a basis of `D^{phi=1}`.
#[derive(Clone, Debug)]
pub struct ModulePhiSolution {
    pub particular: Vector,
    pub kernel: Vec<Vector>,
}

/// Solve `(1 - phi) z = w` in a rank-one or triangular rank-two module:
/// the second component first, then the first with `w1 + x phi(z2)`.
pub fn solve_phi(d: &PhiGammaModule, w: &[Series]) -> Result<ModulePhiSolution> {
    let r = d.ring();
    let ch = d.characters();
    if w.len() != d.rank() {
        return Err(PhiGammaError::Mismatch("vector length differs from the rank".into()));
    }
    if d.rank() == 1 {
        let s = solve_rank1(r, ch[0].at_p, &w[0])?;
        return Ok(ModulePhiSolution { particular: vec![s.particular], kernel: s.kernel.into_iter().map(|k| vec![k]).collect() });
    }
    let s2 = solve_rank1(r, ch[1].at_p, &w[1])?;
    let mut z2 = s2.particular;
    let rhs = match d.phi_off() {
        Some(x) => w[0].add(&x.mul(&z2.phi()?)?)?,
        None => w[0].clone(),
    };
    let s1 = match (solve_rank1(r, ch[0].at_p, &rhs), d.phi_off(), &s2.kernel) {
        (Ok(s), _, _) => s,
        // adding c to z2 moves the first right-hand side by c x
        (Err(PhiGammaError::NotInImage(msg)), Some(x), Some(_)) => {
            let x = x.truncate(rhs.precision());
            let m = pole(&rhs).max(pole(&x));
            let ob = rank1_obstruction(r, ch[0].at_p, &rhs, m);
            let obx = rank1_obstruction(r, ch[0].at_p, &x, m);
            let c = shift_solving(r, &ob, &obx).ok_or(PhiGammaError::NotInImage(msg))?;
            z2 = z2.add(&Series::monomial(r, c, 0, EXACT))?;
            solve_rank1(r, ch[0].at_p, &rhs.add(&x.scale(c))?)?
        }
        (Err(e), _, _) => return Err(e),
    };
    let mut kernel = Vec::new();
    if let Some(k) = s1.kernel {
        kernel.push(vec![k, Series::zero(r, EXACT)]);
    }
    if let Some(k2) = s2.kernel {
        let lift = match d.phi_off() {
            Some(x) => match solve_rank1(r, ch[0].at_p, &x.truncate(z2.precision())) {
                Ok(s) => Some(s.particular),
                Err(PhiGammaError::NotInImage(_)) => None,
                Err(e) => return Err(e),
            },
            None => Some(Series::zero(r, EXACT)),
        };
        if let Some(z1) = lift {
            kernel.push(vec![z1, k2]);
        }
    }
    Ok(ModulePhiSolution { particular: vec![s1.particular, z2], kernel })
}

/// `c` with `ob + c obx = 0`, if any.
fn shift_solving(r: Ring, ob: &[Coeff], obx: &[Coeff]) -> Option<Coeff> {
    let i = obx.iter().position(|&t| !r.is_zero(t))?;
    let c = r.neg(r.mul(ob[i], r.inv(obx[i])?));
    ob.iter().zip(obx).all(|(&a, &b)| r.is_zero(r.add(a, r.mul(c, b)))).then_some(c)
}

/// Linear obstructions to solving `u - lambda phi(u) = g`: the constant
/// term of `g` when `lambda = 1`, then the tops of the polar chains up to
/// the pole `max_pole`. `g` is solvable exactly when all of them vanish.
pub fn rank1_obstruction(ring: Ring, lambda: Coeff, g: &Series, max_pole: i64) -> Vec<Coeff> {
    let p = ring.p() as i64;
    let mut out = Vec::new();
    if lambda == ring.one() {
        out.push(g.coeff(0));
    }
    let neg = polar_chains(ring, lambda, g, max_pole);
    out.extend((1..=max_pole).filter(|m| p * m > max_pole).map(|m| neg[m as usize]));
    out
}

fn pole(s: &Series) -> i64 {
    if s.is_zero() {
        0
    } else {
        (-s.valuation()).max(0)
    }
}

/// Obstruction to `(1 - phi) z = w`, linear in `w`: that of the second
/// component, then that of the first after substituting the particular
/// solution of the second. `max_pole` bounds the poles of `w`.
pub fn phi_obstruction(d: &PhiGammaModule, w: &[Series], max_pole: i64) -> Result<Vec<Coeff>> {
    let r = d.ring();
    let ch = d.characters();
    if d.rank() == 1 {
        return Ok(particular_rank1(r, ch[0].at_p, &w[0], max_pole)?.1);
    }
    let (u2, mut ob) = particular_rank1(r, ch[1].at_p, &w[1], max_pole)?;
    let s = d.pole_shift();
    let m1 = s + r.p() as i64 * max_pole;
    let rhs = match d.phi_off() {
        Some(x) => w[0].add(&x.mul(&u2.phi()?)?)?,
        None => w[0].clone(),
    };
    ob.extend(particular_rank1(r, ch[0].at_p, &rhs, m1)?.1);
    Ok(ob)
}

/// How adding the constant `1` to the second component of `z` moves
/// [`phi_obstruction`], when that constant lies in `ker(1 - phi)` there.
pub fn phi_shift_obstruction(d: &PhiGammaModule, max_pole: i64, prec: i64) -> Result<Option<Vec<Coeff>>> {
    let r = d.ring();
    let ch = d.characters();
    let (Some(x), true) = (d.phi_off(), d.rank() == 2 && ch[1].at_p == r.one()) else {
        return Ok(None);
    };
    let n2 = rank1_obstruction(r, ch[1].at_p, &Series::zero(r, prec), max_pole).len();
    let m1 = d.pole_shift() + r.p() as i64 * max_pole;
    let mut ob = vec![r.zero(); n2];
    ob.extend(particular_rank1(r, ch[0].at_p, &x.truncate(prec), m1)?.1);
    Ok(Some(ob))
}
