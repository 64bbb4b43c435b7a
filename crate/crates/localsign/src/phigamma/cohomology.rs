//! Herr cohomology through finite windows, cocycles and the cup-product
//! pairing.
//!
//! For the lattice `D_B` of elements with bounded poles and
//! `L_K = X^K D^+`, the window `W(K) = D_B / L_K` is finite. The matrix of
//! `psi - 1` from a larger window onto `W(K)` gives both
//! `D / (psi - 1)` and the projection of `D^{psi=1}` to `W(K)`; together with
//! `gamma - 1` on `W(K)` this yields `h^2` and `dim D^{psi=1} / (gamma - 1)`,
//! which stabilise as `K` grows.

use super::{solve_phi, PhiGammaError, PhiGammaModule, Result, Series, Vector};
use crate::linalg::{Matrix, SpanBuilder};
use crate::padic_core::{Coeff, Ring};
use crate::series::{SigmaTable, EXACT};
use serde::Serialize;

/// Exponent ranges `[lo_j, hi_j)` per component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Window {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl Window {
    /// `W(K)`: component one on `[-1 - s, K)`, component two on `[-1, K + s)`,
    /// `s` the largest pole of the off-diagonal entries.
    pub fn lattice(d: &PhiGammaModule, depth: i64) -> Window {
        let s = d.pole_shift();
        if d.rank() == 1 {
            Window { lo: vec![-1], hi: vec![depth] }
        } else {
            Window { lo: vec![-1 - s, -1], hi: vec![depth, depth + s] }
        }
    }

    pub fn len(&self, j: usize) -> usize {
        (self.hi[j] - self.lo[j]).max(0) as usize
    }

    pub fn dim(&self) -> usize {
        (0..self.lo.len()).map(|j| self.len(j)).sum()
    }

    pub fn index(&self, j: usize, e: i64) -> Option<usize> {
        if e < self.lo[j] || e >= self.hi[j] {
            return None;
        }
        Some((0..j).map(|k| self.len(k)).sum::<usize>() + (e - self.lo[j]) as usize)
    }

    pub fn positions(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        (0..self.lo.len()).flat_map(move |j| (self.lo[j]..self.hi[j]).map(move |e| (j, e)))
    }

    /// Coordinates of `v` on the window. Fails when `v` has terms below the
    /// window or is not certified up to its top.
    pub fn read(&self, v: &[Series]) -> Result<Vec<Coeff>> {
        let mut out = Vec::with_capacity(self.dim());
        for (j, s) in v.iter().enumerate() {
            if !s.is_zero() && s.valuation() < self.lo[j] {
                return Err(PhiGammaError::Precision(format!(
                    "component {} has a term X^{} below the window",
                    j + 1,
                    s.valuation()
                )));
            }
            if s.precision() < self.hi[j] {
                return Err(PhiGammaError::Precision(format!(
                    "component {} known mod X^{}, window needs X^{}",
                    j + 1,
                    s.precision(),
                    self.hi[j]
                )));
            }
            out.extend((self.lo[j]..self.hi[j]).map(|e| s.coeff(e)));
        }
        Ok(out)
    }

    /// The element with coordinates `c`, known modulo `X^{hi_j}`.
    pub fn element(&self, ring: Ring, c: &[Coeff]) -> Vector {
        let mut off = 0;
        (0..self.lo.len())
            .map(|j| {
                let n = self.len(j);
                let s = Series::new(ring, self.lo[j], c[off..off + n].to_vec(), self.hi[j]);
                off += n;
                s
            })
            .collect()
    }
}

fn sub_one(col: &mut [Coeff], i: usize, ring: Ring) {
    col[i] = ring.sub(col[i], ring.one());
}

/// Columns of `gamma - 1` on the monomials of `src`, read on `dst`.
pub(crate) fn gamma_minus_one_columns(d: &PhiGammaModule, src: &Window, dst: &Window) -> Result<Vec<Vec<Coeff>>> {
    let r = d.ring();
    let s = d.pole_shift();
    let lo = *src.lo.iter().min().expect("nonempty");
    let top = *dst.hi.iter().max().expect("nonempty") + s + 2;
    let hi_src = *src.hi.iter().max().expect("nonempty");
    let table = SigmaTable::from_int(r, d.gamma_generator() as i64, lo.min(-1), top.max(hi_src + 1))?;
    let ch = d.characters();
    let mut cols = Vec::with_capacity(src.dim());
    for (j, e) in src.positions() {
        let ge = table.power(e);
        let mut img = d.zero_vector(top);
        img[j] = ge.scale(ch[j].at_gen);
        if j == 1 {
            if let Some(y) = d.gamma_off() {
                img[0] = y.mul(ge)?;
            }
        }
        let mut col = dst.read(&img)?;
        if let Some(i) = dst.index(j, e) {
            sub_one(&mut col, i, r);
        }
        cols.push(col);
    }
    Ok(cols)
}

/// Columns of `psi` on the monomials of `src`, read on `dst`, minus the
/// identity where `dst` contains the monomial when `minus_one` is set.
fn psi_columns(d: &PhiGammaModule, src: &Window, dst: &Window, minus_one: bool) -> Result<Vec<Vec<Coeff>>> {
    let r = d.ring();
    let p = r.p() as i64;
    let top = *dst.hi.iter().max().expect("nonempty");
    let mono_prec = p * (top + 2) + d.pole_shift() + 1;
    let mut cols = Vec::with_capacity(src.dim());
    for (j, e) in src.positions() {
        let m = d.monomial(j, e, mono_prec.max(e + p + d.pole_shift() + 1));
        let img = d.psi(&m)?;
        let mut col = dst.read(&img)?;
        if minus_one {
            if let Some(i) = dst.index(j, e) {
                sub_one(&mut col, i, r);
            }
        }
        cols.push(col);
    }
    Ok(cols)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WindowReport {
    pub depth: i64,
    pub window_dim: usize,
    /// `dim D^{psi=1} / (gamma - 1)` seen through the window.
    pub psi_coinvariants: usize,
    pub h2: usize,
}

#[derive(Clone, Debug)]
struct Level {
    depth: i64,
    window: Window,
    /// Rows cutting out the projection of `D^{psi=1}`; `None` when it is all of `W(K)`.
    constraint: Option<Matrix>,
    complement: Vec<Vec<Coeff>>,
    coordinates: Matrix,
    report: WindowReport,
}

impl Level {
    fn compute(d: &PhiGammaModule, depth: i64) -> Result<Level> {
        let r = d.ring();
        let p = r.p() as i64;
        let s = d.pole_shift();
        let w = Window::lattice(d, depth);
        let n = w.dim();
        let u = Window { lo: w.lo.clone(), hi: w.hi.iter().map(|&h| p * (h + 1) + s + p).collect() };
        let cols = psi_columns(d, &u, &w, true)?;
        let mut cols_w = Vec::with_capacity(n);
        let mut cols_rest = Vec::new();
        for ((j, e), col) in u.positions().zip(cols) {
            if w.index(j, e).is_some() {
                cols_w.push(col);
            } else {
                cols_rest.push(col);
            }
        }
        let m_w = Matrix::from_columns(r, n, &cols_w);
        let m_rest = Matrix::from_columns(r, n, &cols_rest);
        let left_kernel = m_rest.transpose().kernel();
        let constraint = (!left_kernel.is_empty()).then(|| Matrix::from_rows(r, &left_kernel).mul(&m_w));
        let v_basis: Vec<Vec<Coeff>> = match &constraint {
            Some(c) => c.kernel(),
            None => (0..n)
                .map(|i| {
                    let mut v = vec![r.zero(); n];
                    v[i] = r.one();
                    v
                })
                .collect(),
        };
        let g = Matrix::from_columns(r, n, &gamma_minus_one_columns(d, &w, &w)?);
        let gv: Vec<Vec<Coeff>> = v_basis.iter().map(|v| g.mul_vec(v)).collect();
        if let Some(c) = &constraint {
            if gv.iter().any(|x| c.mul_vec(x).iter().any(|&t| !r.is_zero(t))) {
                return Err(PhiGammaError::Certificate(format!("gamma does not preserve D^(psi=1) at depth {depth}")));
            }
        }
        let mut span = SpanBuilder::new(r);
        let gv_basis: Vec<Vec<Coeff>> = gv.into_iter().filter(|x| span.insert(x)).collect();
        let complement: Vec<Vec<Coeff>> = v_basis.iter().filter(|v| span.insert(v)).cloned().collect();
        let mut coord_cols = complement.clone();
        coord_cols.extend(gv_basis.iter().cloned());
        let coordinates = if coord_cols.is_empty() { Matrix::zeros(r, n, 0) } else { Matrix::from_columns(r, n, &coord_cols) };
        let h2 = n - m_w.hstack(&m_rest).hstack(&g).rank();
        let report = WindowReport { depth, window_dim: n, psi_coinvariants: complement.len(), h2 };
        Ok(Level { depth, window: w, constraint, complement, coordinates, report })
    }

    /// Coordinates on `complement` of a `psi`-invariant element known
    /// modulo this level's lattice.
    fn coordinates_of(&self, v: &[Series]) -> Result<Vec<Coeff>> {
        let r = self.coordinates.ring();
        let w = self.window.read(v)?;
        if let Some(c) = &self.constraint {
            if c.mul_vec(&w).iter().any(|&t| !r.is_zero(t)) {
                return Err(PhiGammaError::Certificate(format!("element is not psi-invariant modulo X^{}", self.depth)));
            }
        }
        if self.complement.is_empty() {
            return Ok(Vec::new());
        }
        let sol = self
            .coordinates
            .solve(&w)
            .ok_or_else(|| PhiGammaError::Certificate("element outside the psi-invariant window".into()))?;
        Ok(sol[..self.complement.len()].to_vec())
    }
}

/// Increasing window depths; ranks must agree on the last four.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WindowSchedule {
    pub depths: Vec<i64>,
}

impl WindowSchedule {
    pub const STABLE_RUN: usize = 4;

    pub fn new(depths: Vec<i64>) -> Result<WindowSchedule> {
        if depths.len() < Self::STABLE_RUN || depths.windows(2).any(|w| w[0] >= w[1]) || depths[0] < 1 {
            return Err(PhiGammaError::Stabilization(format!(
                "need at least {} increasing positive depths",
                Self::STABLE_RUN
            )));
        }
        Ok(WindowSchedule { depths })
    }

    /// Default depths for `d`, plus `extra` digits of headroom on the deepest
    /// window (used when basis elements must survive a loss of precision).
    pub fn standard(d: &PhiGammaModule, extra: i64) -> WindowSchedule {
        let p = d.ring().p() as i64;
        let k0 = 2 * p + 2 + d.pole_shift();
        let mut depths = vec![k0, k0 + 2, k0 + 4];
        depths.push(k0 + 6 + extra);
        WindowSchedule { depths }
    }
}

/// Cohomology of the Herr complex of `d`, with a basis of the part of `H^1`
/// coming from `D^{psi=1}`.
#[derive(Clone, Debug)]
pub struct HerrCohomology {
    module: PhiGammaModule,
    pub h0: usize,
    pub h1: usize,
    pub h2: usize,
    pub reports: Vec<WindowReport>,
    shallow: Level,
    deep_window: Window,
    basis: Vec<Vector>,
    basis_inverse: Matrix,
    pub h0_basis: Vec<Vector>,
}

pub fn herr_cohomology(d: &PhiGammaModule, schedule: &WindowSchedule) -> Result<HerrCohomology> {
    let levels: Vec<Level> = schedule.depths.iter().map(|&k| Level::compute(d, k)).collect::<Result<_>>()?;
    let reports: Vec<WindowReport> = levels.iter().map(|l| l.report.clone()).collect();
    let tail = &levels[levels.len() - WindowSchedule::STABLE_RUN..];
    let key = |l: &Level| (l.report.psi_coinvariants, l.report.h2);
    if tail.iter().any(|l| key(l) != key(&tail[0])) {
        let seen: Vec<String> = reports.iter().map(|r| format!("K={}:({},{})", r.depth, r.psi_coinvariants, r.h2)).collect();
        return Err(PhiGammaError::Stabilization(seen.join(" ")));
    }
    let (c, h2) = key(&tail[0]);
    let shallow = tail[0].clone();
    let deep = tail[tail.len() - 1].clone();
    let r = d.ring();
    let basis: Vec<Vector> = deep.complement.iter().map(|w| deep.window.element(r, w)).collect();
    let coords: Vec<Vec<Coeff>> = basis.iter().map(|y| shallow.coordinates_of(y)).collect::<Result<_>>()?;
    let basis_inverse = if c == 0 {
        Matrix::zeros(r, 0, 0)
    } else {
        Matrix::from_columns(r, c, &coords)
            .inverse()
            .ok_or_else(|| PhiGammaError::Certificate("deep and shallow windows disagree on the class basis".into()))?
    };
    let h0_basis = invariants(d)?;
    let h0 = h0_basis.len();
    let h1 = c + h2;
    let rank = d.rank() as i64;
    if h0 as i64 - h1 as i64 + h2 as i64 != -rank {
        return Err(PhiGammaError::Euler(format!("h0={h0} h1={h1} h2={h2} rank={rank}")));
    }
    Ok(HerrCohomology {
        module: d.clone(),
        h0,
        h1,
        h2,
        reports,
        shallow,
        deep_window: deep.window,
        basis,
        basis_inverse,
        h0_basis,
    })
}

/// `D^{phi=1, gamma=1}`.
fn invariants(d: &PhiGammaModule) -> Result<Vec<Vector>> {
    let r = d.ring();
    let p = r.p() as i64;
    let prec = 4 * p + 2 * d.pole_shift() + 8;
    let sol = solve_phi(d, &d.zero_vector(prec))?;
    let kernel: Vec<Vector> = sol.kernel.iter().map(|v| v.iter().map(|s| s.truncate(prec)).collect()).collect();
    if kernel.is_empty() {
        return Ok(Vec::new());
    }
    let lo = kernel.iter().flatten().filter(|s| !s.is_zero()).map(|s| s.valuation()).min().unwrap_or(0).min(0) - 1;
    let top = prec - 2 * p - d.pole_shift();
    let win = Window { lo: vec![lo; d.rank()], hi: vec![top; d.rank()] };
    let mut diffs = Vec::new();
    let mut coords = Vec::new();
    for k in &kernel {
        let g = d.gamma(k)?;
        let diff: Vector = g.iter().zip(k).map(|(a, b)| a.sub(b)).collect::<std::result::Result<_, _>>()?;
        diffs.push(win.read(&diff)?);
        coords.push(win.read(k)?);
    }
    let diff_m = Matrix::from_columns(r, win.dim(), &diffs);
    Ok(diff_m
        .kernel()
        .iter()
        .map(|c| {
            let mut acc = d.zero_vector(top);
            for (ci, k) in c.iter().zip(&kernel) {
                for (a, s) in acc.iter_mut().zip(k) {
                    *a = a.add(&s.scale(*ci)).expect("same ring");
                }
            }
            acc
        })
        .filter(|v| v.iter().any(|s| !s.is_zero()))
        .collect())
}

impl HerrCohomology {
    pub fn module(&self) -> &PhiGammaModule {
        &self.module
    }

    /// `dim D^{psi=1} / (gamma - 1)`.
    pub fn psi_part_dim(&self) -> usize {
        self.basis.len()
    }

    /// Basis of `D^{psi=1} / (gamma - 1)`, each element known modulo the
    /// deepest lattice of the schedule.
    pub fn psi_basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn deep_window(&self) -> &Window {
        &self.deep_window
    }

    pub fn shallow_depth(&self) -> i64 {
        self.shallow.depth
    }

    /// Coordinates of a `psi`-invariant element in [`psi_basis`](Self::psi_basis).
    pub fn class_coordinates(&self, y: &[Series]) -> Result<Vec<Coeff>> {
        let c = self.shallow.coordinates_of(y)?;
        if c.is_empty() {
            return Ok(c);
        }
        Ok(self.basis_inverse.mul_vec(&c))
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.h0, self.h1, self.h2)
    }
}

/// A 1-cocycle `(a, b)` of the `(phi, gamma)` complex:
/// `(gamma - 1) a = (phi - 1) b`.
#[derive(Clone, Debug)]
pub struct Cocycle {
    pub phi_part: Vector,
    pub gamma_part: Vector,
}

impl Cocycle {
    /// The unramified class `(1, 0)` of `E(1)`.
    pub fn unramified(ring: Ring) -> Cocycle {
        Cocycle { phi_part: vec![Series::one(ring, EXACT)], gamma_part: vec![Series::zero(ring, EXACT)] }
    }

    /// The class `(0, 1)` of `E(1)`, nonzero exactly on inertia.
    pub fn ramified(ring: Ring) -> Cocycle {
        Cocycle { phi_part: vec![Series::zero(ring, EXACT)], gamma_part: vec![Series::one(ring, EXACT)] }
    }

    pub fn combine(ring: Ring, coeffs: &[Coeff], cocycles: &[Cocycle]) -> Result<Cocycle> {
        let rank = cocycles[0].phi_part.len();
        let mut a = vec![Series::zero(ring, EXACT); rank];
        let mut b = a.clone();
        for (c, z) in coeffs.iter().zip(cocycles) {
            for j in 0..rank {
                a[j] = a[j].add(&z.phi_part[j].scale(*c))?;
                b[j] = b[j].add(&z.gamma_part[j].scale(*c))?;
            }
        }
        Ok(Cocycle { phi_part: a, gamma_part: b })
    }

    /// `(gamma - 1) a - (phi - 1) b`; vanishes for a cocycle.
    pub fn defect(&self, d: &PhiGammaModule) -> Result<Vector> {
        let ga = d.gamma(&self.phi_part)?;
        let fb = d.phi(&self.gamma_part)?;
        (0..d.rank())
            .map(|j| Ok(ga[j].sub(&self.phi_part[j])?.sub(&fb[j])?.add(&self.gamma_part[j])?))
            .collect()
    }

    /// Certified precision of the `phi` component.
    pub fn phi_precision(&self) -> i64 {
        self.phi_part.iter().map(|s| s.precision()).min().unwrap_or(EXACT)
    }
}

/// The unique `a` with `(gamma - 1) a = v` and `psi(a) = 0`, computed on a
/// window of depth `top`; returned with its certified precision per
/// component (kernel vectors of the truncated system vanish below it).
pub fn solve_gamma_psi_zero(d: &PhiGammaModule, v: &[Series], top: i64) -> Result<(Vector, Vec<i64>)> {
    let r = d.ring();
    let p = r.p() as i64;
    let s = d.pole_shift();
    let vlo = v.iter().filter(|x| !x.is_zero()).map(|x| x.valuation()).min().unwrap_or(0).min(-1);
    let base = vlo - p - 1;
    let win = if d.rank() == 1 {
        Window { lo: vec![base], hi: vec![top] }
    } else {
        Window { lo: vec![base - s, base], hi: vec![top, top + s] }
    };
    let psi_win = Window { lo: win.lo.clone(), hi: vec![top.div_euclid(p); d.rank()] };
    let gcols = gamma_minus_one_columns(d, &win, &win)?;
    let pcols = psi_columns(d, &win, &psi_win, false)?;
    let cols: Vec<Vec<Coeff>> = gcols
        .into_iter()
        .zip(pcols)
        .map(|(mut g, q)| {
            g.extend(q);
            g
        })
        .collect();
    let rows = win.dim() + psi_win.dim();
    let m = Matrix::from_columns(r, rows, &cols);
    let mut rhs = win.read(v)?;
    rhs.extend(std::iter::repeat_n(r.zero(), psi_win.dim()));
    let sol = m
        .solve(&rhs)
        .ok_or_else(|| PhiGammaError::Unsolvable("(gamma - 1) a = v with psi(a) = 0".into()))?;
    let mut cert = win.hi.clone();
    for k in m.kernel() {
        for (i, (j, e)) in win.positions().enumerate() {
            if !r.is_zero(k[i]) {
                cert[j] = cert[j].min(e);
            }
        }
    }
    let a: Vector = win.element(r, &sol).iter().zip(&cert).map(|(x, &c)| x.truncate(c)).collect();
    Ok((a, cert))
}

/// Cocycle `(a, y)` attached to `y` in `D^{psi=1}`:
/// `a = (gamma - 1)^{-1} (phi - 1) y` in `D^{psi=0}`, certified at least
/// modulo `X^need` in every component.
pub fn cocycle_from_psi_invariant(d: &PhiGammaModule, y: &[Series], need: i64) -> Result<Cocycle> {
    let s = d.pole_shift();
    let fy = d.phi(y)?;
    let v: Vector = fy.iter().zip(y).map(|(a, b)| a.sub(b)).collect::<std::result::Result<_, _>>()?;
    let avail = v.iter().enumerate().map(|(j, x)| x.precision() - if j == 1 { s } else { 0 }).min().unwrap_or(EXACT);
    let p = d.ring().p() as i64;
    let top = avail.min(need + 4 * p + 2 * s + 8);
    let (a, cert) = solve_gamma_psi_zero(d, &v, top)?;
    if cert.iter().any(|&c| c < need) {
        return Err(PhiGammaError::Precision(format!("cocycle certified mod X^{cert:?}, need X^{need}")));
    }
    Ok(Cocycle { phi_part: a, gamma_part: y.to_vec() })
}

/// `Res(f dX / (1 + X))`.
pub fn residue(f: &Series) -> Result<Coeff> {
    let r = f.ring();
    if f.precision() < 0 {
        return Err(PhiGammaError::Precision(format!("residue of a series known mod X^{}", f.precision())));
    }
    let mut acc = r.zero();
    for (e, c) in f.terms() {
        if e >= 0 {
            break;
        }
        let t = if (-1 - e) % 2 == 0 { c } else { r.neg(c) };
        acc = r.add(acc, t);
    }
    Ok(acc)
}

/// Normalisation of the residue pairing: the raw value
/// `kappa0 = <(a_p, 1 + 1/X), (1, 0)>` for `E(omega) x E(1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Calibration {
    pub p: u64,
    pub f: u32,
    pub generator: u64,
    pub kappa0: Coeff,
}

/// Cocycle of the Kummer class of `p` in `E(omega)`: the class of
/// `1 + 1/X` in `D^{psi=1}`.
pub fn uniformizer_cocycle(ring: Ring, need: i64) -> Result<Cocycle> {
    let om = PhiGammaModule::tame(ring, 1, ring.one())?;
    let p = ring.p() as i64;
    let prec = need + 6 * p + 16;
    let y = vec![Series::from_ints(ring, -1, &[1, 1], prec)];
    cocycle_from_psi_invariant(&om, &y, need)
}

pub fn calibrate(ring: Ring) -> Result<Calibration> {
    let p = ring.p();
    let om = PhiGammaModule::tame(ring, 1, ring.one())?;
    let triv = PhiGammaModule::tame(ring, 0, ring.one())?;
    let kp = uniformizer_cocycle(ring, p as i64 + 1)?;
    let one = [vec![ring.one()]];
    let raw = cup_raw(&om, &kp, &triv, &Cocycle::unramified(ring), &one)?;
    if ring.is_zero(raw) {
        return Err(PhiGammaError::Certificate("uniformizer class pairs to zero with the unramified class".into()));
    }
    let cross = cup_raw(&om, &kp, &triv, &Cocycle::ramified(ring), &one)?;
    if !ring.is_zero(cross) {
        return Err(PhiGammaError::Certificate("uniformizer class pairs nontrivially with the ramified class".into()));
    }
    Ok(Calibration { p, f: ring.f(), generator: om.gamma_generator(), kappa0: raw })
}

/// `sum_ij B_ij Res(a1_i phi(b2)_j - b1_i gamma(a2)_j)`: the cup product
/// `H^1(D1) x H^1(D2) -> H^2(E(omega))` through the bilinear map `B`.
pub fn cup_raw(d1: &PhiGammaModule, c1: &Cocycle, d2: &PhiGammaModule, c2: &Cocycle, form: &[Vec<Coeff>]) -> Result<Coeff> {
    let r = d1.ring();
    let fb2 = d2.phi(&c2.gamma_part)?;
    let ga2 = d2.gamma(&c2.phi_part)?;
    let mut acc = r.zero();
    for (i, row) in form.iter().enumerate() {
        for (j, &bij) in row.iter().enumerate() {
            if r.is_zero(bij) {
                continue;
            }
            let t = c1.phi_part[i].mul(&fb2[j])?.sub(&c1.gamma_part[i].mul(&ga2[j])?)?;
            acc = r.add(acc, r.mul(bij, residue(&t)?));
        }
    }
    Ok(acc)
}

fn check_target(r: Ring, gen: u64, at_p: Coeff, at_gen: Coeff) -> Result<()> {
    if at_p != r.one() || at_gen != r.from_int((gen % r.p()) as i64) {
        return Err(PhiGammaError::Mismatch("pairing does not land in E(omega)".into()));
    }
    Ok(())
}

/// Calibrated pairing `H^1(E(eta)) x H^1(E(omega eta^-1)) -> F`.
pub fn duality_pairing(
    d1: &PhiGammaModule,
    c1: &Cocycle,
    d2: &PhiGammaModule,
    c2: &Cocycle,
    cal: &Calibration,
) -> Result<Coeff> {
    let r = d1.ring();
    if d1.rank() != 1 || d2.rank() != 1 {
        return Err(PhiGammaError::Mismatch("duality pairing is for rank-one modules".into()));
    }
    let (a, b) = (d1.characters()[0], d2.characters()[0]);
    check_target(r, d1.gamma_generator(), r.mul(a.at_p, b.at_p), r.mul(a.at_gen, b.at_gen))?;
    let raw = cup_raw(d1, c1, d2, c2, &[vec![r.one()]])?;
    Ok(r.mul(raw, r.inv(cal.kappa0).expect("calibrated")))
}

/// Calibrated pairing on `H^1` of a symplectic self-dual rank-two module,
/// through `e1 ^ e2`.
pub fn tate_pairing(d: &PhiGammaModule, c1: &Cocycle, c2: &Cocycle, cal: &Calibration) -> Result<Coeff> {
    let r = d.ring();
    if !d.is_symplectic_self_dual() {
        return Err(PhiGammaError::NotSelfDual("determinant is not omega".into()));
    }
    let wedge = [vec![r.zero(), r.one()], vec![r.neg(r.one()), r.zero()]];
    let raw = cup_raw(d, c1, d, c2, &wedge)?;
    Ok(r.mul(raw, r.inv(cal.kappa0).expect("calibrated")))
}

/// Gram matrix of [`tate_pairing`] on a list of cocycles.
pub fn tate_gram(d: &PhiGammaModule, classes: &[Cocycle], cal: &Calibration) -> Result<Matrix> {
    let r = d.ring();
    let n = classes.len();
    let mut g = Matrix::zeros(r, n, n);
    for i in 0..n {
        for j in 0..n {
            g.set(i, j, tate_pairing(d, &classes[i], &classes[j], cal)?);
        }
    }
    Ok(g)
}
