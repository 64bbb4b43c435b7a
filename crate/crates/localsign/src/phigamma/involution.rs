//! Colmez's `w_*` on `D^{psi=0}` and the involution it induces on the
//! `psi`-part of `H^1`.

use super::{
    phi_obstruction, phi_shift_obstruction, solve_phi, HerrCohomology, PhiGammaError, PhiGammaModule, Result, Series, Vector,
};
use crate::linalg::Matrix;
use crate::padic_core::{ilog, invmod, Coeff};
use crate::series::{binom_series_int, EXACT};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WStarCertificate {
    pub limit_index: u32,
    /// Exponent per component below which the last two partial sums agree.
    pub agreement: Vec<i64>,
}

fn pole_of(v: &[Series]) -> i64 {
    v.iter().filter(|s| !s.is_zero()).map(|s| (-s.valuation()).max(0)).max().unwrap_or(0)
}

fn min_precision(v: &[Series]) -> i64 {
    v.iter().map(|s| s.precision()).min().unwrap_or(EXACT)
}

/// Partial sum
/// `S_n(x) = sum_{i mod p^n, p !| i} (1+X)^{1/i} sigma_{-1/i^2}(phi^n psi^n((1+X)^{-i} x))`.
pub fn w_star_partial(d: &PhiGammaModule, x: &[Series], n: u32) -> Result<Vector> {
    let r = d.ring();
    let p = r.p();
    let prec = min_precision(x);
    if prec >= EXACT {
        return Err(PhiGammaError::Precision("w_* needs an input of finite precision".into()));
    }
    let pole = pole_of(x);
    let span = (prec + pole + d.pole_shift() + 2).max(2) as u64;
    let pt = p.pow(ilog(span, p) + 1);
    let len = (prec + pole + 1).max(1) as usize;
    let pn = p.pow(n);
    let mut acc = d.zero_vector(prec);
    for i in 1..pn {
        if i % p == 0 {
            continue;
        }
        let inv_i = invmod(i % pt, pt).expect("unit");
        let twist = binom_series_int(r, -(i as i64), len);
        let mut t: Vector = x.iter().map(|s| s.mul(&twist)).collect::<std::result::Result<_, _>>()?;
        for _ in 0..n {
            t = d.psi(&t)?;
        }
        // sigma_c commutes with phi; apply it on the short series
        let c = (pt - (inv_i as u128 * inv_i as u128 % pt as u128) as u64) as i64;
        let g = d.gamma_action(c, min_precision(&t), pole_of(&t))?;
        t = d.apply_gamma(&g, &t)?;
        for _ in 0..n {
            t = d.phi(&t)?;
        }
        let untwist = binom_series_int(r, inv_i as i64, len + pole_of(&t) as usize);
        for (a, s) in acc.iter_mut().zip(&t) {
            *a = a.add(&s.mul(&untwist)?)?;
        }
    }
    Ok(acc)
}

/// `w_*(x)` for `x` in `D^{psi=0}`, certified by the agreement of the partial
/// sums `S_{n-1}` and `S_n` up to `target` in each component.
pub fn w_star(d: &PhiGammaModule, x: &[Series], n: u32, target: &[i64]) -> Result<(Vector, WStarCertificate)> {
    if n < 2 {
        return Err(PhiGammaError::WLimit("limit index must be at least 2".into()));
    }
    let psi_x = d.psi(x)?;
    if psi_x.iter().any(|s| !s.is_zero()) {
        return Err(PhiGammaError::Certificate("w_* input is not in D^(psi=0)".into()));
    }
    let prev = w_star_partial(d, x, n - 1)?;
    let cur = w_star_partial(d, x, n)?;
    let mut agreement = Vec::with_capacity(cur.len());
    for (a, b) in prev.iter().zip(&cur) {
        let diff = a.sub(b)?;
        agreement.push(if diff.is_zero() { diff.precision() } else { diff.valuation() });
    }
    for (j, (&got, &want)) in agreement.iter().zip(target).enumerate() {
        if got < want {
            return Err(PhiGammaError::WLimit(format!(
                "S_{} and S_{} agree only below X^{got} in component {}, need X^{want}",
                n - 1,
                n,
                j + 1
            )));
        }
    }
    let out = cur.iter().zip(&agreement).map(|(s, &a)| s.truncate(a)).collect();
    Ok((out, WStarCertificate { limit_index: n, agreement }))
}

/// `sigma_a^{-j} w` for `j = 0..count`.
fn inverse_generator_orbit(d: &PhiGammaModule, w: &[Series], count: usize) -> Result<Vec<Vector>> {
    let p = d.ring().p();
    let prec = min_precision(w);
    let pole = pole_of(w);
    let span = (prec + pole + d.pole_shift() + 2).max(2) as u64;
    let big = p.pow(ilog(span, p) + 2);
    let a = d.gamma_generator() % big;
    let c = invmod(a, big).ok_or(PhiGammaError::BadGenerator(d.gamma_generator()))?;
    let g = d.gamma_action(c as i64, prec, pole)?;
    let mut out = vec![w.to_vec()];
    for _ in 1..count {
        let next = d.apply_gamma(&g, out.last().expect("nonempty"))?;
        out.push(next);
    }
    Ok(out)
}

/// Moves `w = w_*((1 - phi) y)` into `(1 - phi) D^{psi=1}` without changing
/// the class of `y`: for `y' = sum c_j sigma_a^j y` with `sum c_j = 1`,
/// anti-equivariance gives `w_*((1 - phi) y') = sum c_j sigma_a^{-j} w`.
/// Returns the new `w` and the number of translates used.
fn into_phi_image(d: &PhiGammaModule, w: &[Series]) -> Result<(Vector, usize)> {
    let r = d.ring();
    let m0 = pole_of(w);
    let ob = phi_obstruction(d, w, m0)?;
    if ob.iter().all(|&c| r.is_zero(c)) {
        return Ok((w.to_vec(), 1));
    }
    let count = ob.len() + 2;
    let orbit = inverse_generator_orbit(d, w, count)?;
    let m = orbit.iter().map(|v| pole_of(v)).max().unwrap_or(0);
    let prec = orbit.iter().map(|v| min_precision(v)).min().unwrap_or(EXACT);
    let mut cols: Vec<Vec<Coeff>> = orbit.iter().map(|v| phi_obstruction(d, v, m)).collect::<Result<_>>()?;
    for c in cols.iter_mut() {
        c.push(r.one());
    }
    if let Some(mut shift) = phi_shift_obstruction(d, m, prec)? {
        shift.push(r.zero());
        cols.push(shift);
    }
    let rows = cols[0].len();
    let mut rhs = vec![r.zero(); rows];
    rhs[rows - 1] = r.one();
    let c = Matrix::from_columns(r, rows, &cols).solve(&rhs).ok_or_else(|| {
        PhiGammaError::Certificate("w_* image is not in (1 - phi) D^(psi=1) modulo sigma_a - 1".into())
    })?;
    let mut acc = d.zero_vector(prec);
    for (cj, v) in c.iter().zip(&orbit) {
        for (a, s) in acc.iter_mut().zip(v) {
            *a = a.add(&s.scale(*cj))?;
        }
    }
    Ok((acc, count))
}

/// Matrix of the involution `w_T` on the `psi`-part of `H^1`, in the basis
/// [`HerrCohomology::psi_basis`]: `y -> (1 - phi)^{-1} w_*((1 - phi) y')`
/// for `y'` in the class of `y` chosen by [`into_phi_image`].
#[derive(Clone, Debug)]
pub struct Involution {
    pub matrix: Matrix,
    pub certificates: Vec<WStarCertificate>,
    /// Number of `sigma_a^{-1}`-translates combined for each basis vector
    /// (1 when `w_*((1 - phi) y)` was already in the image).
    pub translates: Vec<usize>,
}

pub fn w_involution(coh: &HerrCohomology, n: u32) -> Result<Involution> {
    let d = coh.module();
    let r = d.ring();
    let basis = coh.psi_basis();
    let target = super::Window::lattice(d, coh.shallow_depth()).hi;
    let mut cols: Vec<Vec<Coeff>> = Vec::with_capacity(basis.len());
    let mut certificates = Vec::new();
    let mut translates = Vec::new();
    for y in basis {
        let fy = d.phi(y)?;
        let v: Vector = y.iter().zip(&fy).map(|(a, b)| a.sub(b)).collect::<std::result::Result<_, _>>()?;
        let (w, cert) = w_star(d, &v, n, &target)?;
        let (w, used) = into_phi_image(d, &w)?;
        let z = solve_phi(d, &w)?.particular;
        let pz = d.psi(&z)?;
        for (a, b) in z.iter().zip(&pz) {
            let diff = a.sub(b)?;
            if !diff.is_zero() {
                return Err(PhiGammaError::Certificate(format!(
                    "image under w is not psi-invariant (differs at X^{})",
                    diff.valuation()
                )));
            }
        }
        cols.push(coh.class_coordinates(&z)?);
        certificates.push(cert);
        translates.push(used);
    }
    let matrix = if cols.is_empty() { Matrix::zeros(r, 0, 0) } else { Matrix::from_columns(r, basis.len(), &cols) };
    Ok(Involution { matrix, certificates, translates })
}
