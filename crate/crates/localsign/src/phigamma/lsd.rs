//! Local sign decomposition of `H^1` for generic symplectic self-dual
//! rank-two modules, by two routes: eigenlines of `w_T` (path A) and the
//! image of the sub-character's `H^1` with its isotropic complement (path B).

use super::{
    calibrate, cocycle_from_psi_invariant, herr_cohomology, rank1_obstruction, schedule_for_involution, default_w_limit,
    solve_rank1, tate_gram, w_involution, Calibration, Cocycle, Construction, HerrCohomology, PhiGammaError,
    PhiGammaModule, Result, Series, WStarCertificate, WindowReport, WindowSchedule,
};
use crate::lagrangian_mr::{construct_complement, SymmetricSpace};
use crate::linalg::{Matrix, SpanBuilder};
use crate::padic_core::Coeff;

/// Global sign `c` relating the two routes: on the line labelled `s` by
/// path B, `w_T` acts by `c * s`.
pub const W_SIGN_CONVENTION: i8 = 1;

#[derive(Clone, Debug)]
pub struct LsdOptions {
    pub schedule: WindowSchedule,
    pub w_limit_n: u32,
}

impl LsdOptions {
    pub fn for_module(d: &PhiGammaModule) -> LsdOptions {
        let n = default_w_limit(d);
        LsdOptions { schedule: schedule_for_involution(d, n), w_limit_n: n }
    }
}

/// Path B: the image of `H^1` of the sub-character, its label, and the
/// isotropic complement.
#[derive(Clone, Debug)]
pub struct ReducibleLines {
    pub sub_line: Vec<Coeff>,
    pub sub_label: i8,
    pub complement: Vec<Coeff>,
    /// `w_T` eigenvalue found on `sub_line`.
    pub eigenvalue_on_sub: i8,
}

#[derive(Clone, Debug)]
pub struct SignDecomposition {
    pub generator: u64,
    pub dims: (usize, usize, usize),
    pub classes: Vec<Cocycle>,
    pub gram: Matrix,
    pub w_matrix: Matrix,
    /// Bases of the `+1` and `-1` lines (labels after applying
    /// [`W_SIGN_CONVENTION`]).
    pub plus: Vec<Coeff>,
    pub minus: Vec<Coeff>,
    pub cross_pairing: Coeff,
    pub path_b: Option<ReducibleLines>,
    pub agreement: bool,
    pub certificates: Vec<WStarCertificate>,
    pub reports: Vec<WindowReport>,
    pub w_limit_n: u32,
}

fn pole_of(v: &[Series]) -> i64 {
    v.iter().filter(|s| !s.is_zero()).map(|s| (-s.valuation()).max(0)).max().unwrap_or(0)
}

/// Cocycles `(a, y)` for the `psi`-basis of `H^1`, with `a` certified far
/// enough for the cup product.
pub fn psi_class_cocycles(coh: &HerrCohomology) -> Result<Vec<Cocycle>> {
    let d = coh.module();
    let p = d.ring().p() as i64;
    let need = coh.psi_basis().iter().map(|y| p * (pole_of(y) + 1) + 2).max().unwrap_or(0);
    coh.psi_basis().iter().map(|y| cocycle_from_psi_invariant(d, y, need)).collect()
}

/// Label assigned by the reducible corollaries to the image of `H^1` of the
/// sub-character: `(-1)^r` for sub-character `omega^r mu`, except `+1` for a
/// nonsplit extension whose sub-character is exactly `omega`.
pub fn reducible_label(d: &PhiGammaModule) -> Result<i8> {
    let r = d.ring();
    let sub = d.characters()[0];
    let omega_at_gen = r.from_int((d.gamma_generator() % r.p()) as i64);
    if d.construction() == Construction::Extension && sub.at_p == r.one() && sub.at_gen == omega_at_gen {
        return Ok(1);
    }
    let k = d.tame_exponent(0).ok_or_else(|| PhiGammaError::NotGeneric("sub-character is not tame".into()))?;
    Ok(if k % 2 == 0 { 1 } else { -1 })
}

fn eigenvalue(w: &Matrix, v: &[Coeff]) -> Option<i8> {
    let r = w.ring();
    let wv = w.mul_vec(v);
    if wv == v {
        return Some(1);
    }
    let neg: Vec<Coeff> = v.iter().map(|&x| r.neg(x)).collect();
    (wv == neg).then_some(-1)
}

fn single_line(m: &Matrix, what: &str) -> Result<Vec<Coeff>> {
    let k = m.kernel();
    if k.len() != 1 {
        return Err(PhiGammaError::Certificate(format!("{what} has dimension {}, expected 1", k.len())));
    }
    Ok(k.into_iter().next().expect("one vector"))
}

/// `ker(H^1(D) -> H^1(D2))` for the quotient character `D2`, in the
/// coordinates of the `psi`-basis of `coh`.
pub fn sub_line(coh: &HerrCohomology, schedule: &WindowSchedule) -> Result<Vec<Coeff>> {
    let d = coh.module();
    let r = d.ring();
    let d2 = d.quotient_module();
    let coh2 = herr_cohomology(&d2, schedule)?;
    let cols: Vec<Vec<Coeff>> =
        coh.psi_basis().iter().map(|y| coh2.class_coordinates(&y[1..])).collect::<Result<_>>()?;
    let rows = coh2.psi_part_dim();
    if rows == 0 {
        return Err(PhiGammaError::Certificate("quotient has no psi-classes".into()));
    }
    single_line(&Matrix::from_columns(r, rows, &cols), "image of the sub-character's H^1")
}

pub fn lsd_decompose(d: &PhiGammaModule, opts: &LsdOptions) -> Result<SignDecomposition> {
    if !d.is_symplectic_self_dual() {
        return Err(PhiGammaError::NotSelfDual("rank two with determinant omega required".into()));
    }
    let coh = herr_cohomology(d, &opts.schedule)?;
    lsd_from_cohomology(&coh, opts)
}

/// [`lsd_decompose`] on already computed cohomology; coordinates refer to
/// `coh.psi_basis()`.
pub fn lsd_from_cohomology(coh: &HerrCohomology, opts: &LsdOptions) -> Result<SignDecomposition> {
    let d = coh.module();
    let r = d.ring();
    if !d.is_symplectic_self_dual() {
        return Err(PhiGammaError::NotSelfDual("rank two with determinant omega required".into()));
    }
    if coh.h0 != 0 || coh.h2 != 0 || coh.psi_part_dim() != 2 {
        return Err(PhiGammaError::NotGeneric(format!(
            "(h0, h1, h2) = {:?}; the residual module must have no invariants",
            coh.dims()
        )));
    }
    let cal = calibrate(r)?;
    let classes = psi_class_cocycles(coh)?;
    let gram = tate_gram(d, &classes, &cal)?;
    if gram.transpose() != gram {
        return Err(PhiGammaError::Certificate(format!("Gram matrix is not symmetric:\n{gram}")));
    }
    let space = SymmetricSpace::new(gram.clone()).map_err(|e| PhiGammaError::Certificate(e.to_string()))?;

    // path A
    let inv = w_involution(coh, opts.w_limit_n)?;
    let w = inv.matrix.clone();
    let id = Matrix::identity(r, 2);
    if w.mul(&w) != id {
        return Err(PhiGammaError::Certificate(format!("w_T is not an involution:\n{w}")));
    }
    let e_plus = single_line(&w.sub(&id), "(+1)-eigenspace of w_T")?;
    let e_minus = single_line(&w.add(&id), "(-1)-eigenspace of w_T")?;
    for v in [&e_plus, &e_minus] {
        if !r.is_zero(space.pair(v, v)) {
            return Err(PhiGammaError::Certificate("eigenline of w_T is not isotropic".into()));
        }
    }
    let cross = space.pair(&e_plus, &e_minus);
    if r.is_zero(cross) {
        return Err(PhiGammaError::Certificate("eigenlines of w_T do not pair perfectly".into()));
    }
    let (mut plus, mut minus) = (e_plus, e_minus);
    if W_SIGN_CONVENTION < 0 {
        std::mem::swap(&mut plus, &mut minus);
    }

    // path B
    let v1 = sub_line(coh, &opts.schedule)?;
    let label = reducible_label(d)?;
    let complement = construct_complement(&space, &v1).map_err(|e| PhiGammaError::Certificate(e.to_string()))?;
    let mu = eigenvalue(&w, &v1).unwrap_or(0);
    let mu2 = eigenvalue(&w, &complement).unwrap_or(0);
    let agreement = mu != 0 && mu2 == -mu && W_SIGN_CONVENTION * mu == label;
    let path_b = ReducibleLines { sub_line: v1, sub_label: label, complement, eigenvalue_on_sub: mu };
    if !agreement {
        return Err(PhiGammaError::PathDisagreement(format!(
            "sub-character line has label {label} but w_T acts on it by {mu} (complement {mu2})"
        )));
    }
    Ok(SignDecomposition {
        generator: d.gamma_generator(),
        dims: coh.dims(),
        classes,
        gram,
        w_matrix: w,
        plus,
        minus,
        cross_pairing: cross,
        path_b: Some(path_b),
        agreement,
        certificates: inv.certificates,
        reports: coh.reports.clone(),
        w_limit_n: opts.w_limit_n,
    })
}

/// A basis of the cocycles `(x, y)` of a rank-one module with `x` a Laurent
/// polynomial supported on `[lo, hi]`; `y` solves
/// `y - rho phi(y) = x - eta sigma_a(x)` modulo `X^prec`. Each basis element
/// has its lowest term at a distinct exponent.
pub fn polynomial_cocycles(d: &PhiGammaModule, lo: i64, hi: i64, prec: i64) -> Result<Vec<Cocycle>> {
    if d.rank() != 1 {
        return Err(PhiGammaError::Mismatch("polynomial cocycles are for rank-one modules".into()));
    }
    let r = d.ring();
    let ch = d.characters()[0];
    let a = d.gamma_generator() as i64;
    let mut rhs = Vec::new();
    for e in (lo..=hi).rev() {
        let x = Series::monomial(r, r.one(), e, prec);
        rhs.push(x.sub(&x.sigma_int_split(a)?.scale(ch.at_gen))?);
    }
    let max_pole = rhs.iter().map(|s| pole_of(std::slice::from_ref(s))).max().unwrap_or(0);
    let obs: Vec<Vec<Coeff>> = rhs.iter().map(|g| rank1_obstruction(r, ch.at_p, g, max_pole)).collect();
    let n_obs = obs[0].len();
    let combos = if n_obs == 0 {
        (0..rhs.len())
            .map(|i| {
                let mut v = vec![r.zero(); rhs.len()];
                v[i] = r.one();
                v
            })
            .collect::<Vec<_>>()
    } else {
        Matrix::from_columns(r, n_obs, &obs).kernel()
    };
    let mut out = Vec::new();
    for k in combos {
        let mut x = Series::zero(r, prec);
        let mut g = Series::zero(r, prec);
        for (i, &c) in k.iter().enumerate() {
            if r.is_zero(c) {
                continue;
            }
            x = x.add(&Series::monomial(r, c, hi - i as i64, prec))?;
            g = g.add(&rhs[i].scale(c))?;
        }
        let y = solve_rank1(r, ch.at_p, &g)?.particular;
        out.push(Cocycle { phi_part: vec![x], gamma_part: vec![y] });
    }
    Ok(out)
}

/// Pairing matrix `<c_i, e_j>` of cocycles of `d` against cocycles of the
/// dual twist.
pub fn pairing_matrix(
    d: &PhiGammaModule,
    cocycles: &[Cocycle],
    dual: &PhiGammaModule,
    dual_classes: &[Cocycle],
    cal: &Calibration,
) -> Result<Matrix> {
    let r = d.ring();
    let mut m = Matrix::zeros(r, cocycles.len(), dual_classes.len());
    for (i, c) in cocycles.iter().enumerate() {
        for (j, e) in dual_classes.iter().enumerate() {
            m.set(i, j, super::duality_pairing(d, c, dual, e, cal)?);
        }
    }
    Ok(m)
}

/// Cocycles among `candidates` representing a basis of their span in `H^1`,
/// detected through the perfect pairing with `dual_classes`.
pub fn independent_classes(
    d: &PhiGammaModule,
    candidates: &[Cocycle],
    dual: &PhiGammaModule,
    dual_classes: &[Cocycle],
    cal: &Calibration,
) -> Result<Vec<(Cocycle, Vec<Coeff>)>> {
    let r = d.ring();
    let m = pairing_matrix(d, candidates, dual, dual_classes, cal)?;
    let mut span = SpanBuilder::new(r);
    Ok(candidates
        .iter()
        .enumerate()
        .map(|(i, c)| (c.clone(), m.row(i)))
        .filter(|(_, row)| span.insert(row))
        .collect())
}

/// Laurent polynomials `x` on `[lo, hi]` that are `phi`-parts of cocycles of
/// the rank-one module `rho` with linearly independent, nonzero classes,
/// preferring small poles.
pub fn polynomial_classes(rho: &PhiGammaModule, lo: i64, hi: i64) -> Result<Vec<Series>> {
    let r = rho.ring();
    let p = r.p() as i64;
    let prec = p * (hi.max(0) + (-lo).max(0) + 4) + 16;
    let dual = rho.dual_twist()?;
    let coh = herr_cohomology(&dual, &WindowSchedule::standard(&dual, 0))?;
    let dual_classes = psi_class_cocycles(&coh)?;
    let cal = calibrate(r)?;
    let mut cands = polynomial_cocycles(rho, lo, hi, prec)?;
    cands.sort_by_key(|c| pole_of(&c.phi_part));
    let chosen = independent_classes(rho, &cands, &dual, &dual_classes, &cal)?;
    Ok(chosen
        .into_iter()
        .map(|(c, _)| {
            let x = &c.phi_part[0];
            let terms: Vec<Coeff> = (lo..=hi).map(|e| x.coeff(e)).collect();
            Series::new(r, lo, terms, crate::series::EXACT)
        })
        .collect())
}
