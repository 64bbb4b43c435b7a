//! Symmetric bilinear spaces over `F_q`, their Lagrangian subspaces, the
//! arithmetic local constant `delta` of a pair of Lagrangians, and the
//! comparison of `delta` with completed epsilon signs for reducible lifts.

use crate::epsilon::{EpsilonError, ReducibleLift};
use crate::linalg::{span_rank, Matrix};
use crate::oracles::{evaluation_pairing, HomClass, KummerClass};
use crate::padic_core::{Coeff, Ring};
use crate::phigamma::{
    calibrate, herr_cohomology, independent_classes, lsd_from_cohomology, polynomial_cocycles, tate_gram,
    uniformizer_cocycle, Cocycle, CoeffSpec, Construction, HerrCohomology, LsdOptions, ModuleSpec, PhiGammaError,
    PhiGammaModule, Series, Vector,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LagrangianError {
    #[error("Gram matrix is not symmetric")]
    NotSymmetric,
    #[error("Gram matrix is degenerate")]
    Degenerate,
    #[error("need an odd finite field, got {0}")]
    BadField(String),
    #[error("dimension {0} is not even")]
    OddDimension(usize),
    #[error("vector is not isotropic")]
    NotIsotropic,
    #[error("vector lies in the radical")]
    InRadical,
    #[error("subspace is not Lagrangian: {0}")]
    NotLagrangian(String),
    #[error("map is not a similitude")]
    NotSimilitude,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, LagrangianError>;

/// `F_q^d` with a nondegenerate symmetric Gram matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetricSpace {
    gram: Matrix,
}

impl SymmetricSpace {
    pub fn new(gram: Matrix) -> Result<SymmetricSpace> {
        let r = gram.ring();
        if !r.is_field() || r.p() == 2 {
            return Err(LagrangianError::BadField(r.to_string()));
        }
        if gram.rows() != gram.cols() {
            return Err(LagrangianError::Dimension("Gram matrix is not square".into()));
        }
        if gram.rows() % 2 == 1 {
            return Err(LagrangianError::OddDimension(gram.rows()));
        }
        if gram.transpose() != gram {
            return Err(LagrangianError::NotSymmetric);
        }
        if r.is_zero(gram.determinant()) {
            return Err(LagrangianError::Degenerate);
        }
        Ok(SymmetricSpace { gram })
    }

    pub fn ring(&self) -> Ring {
        self.gram.ring()
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn pair(&self, x: &[Coeff], y: &[Coeff]) -> Coeff {
        let r = self.ring();
        let gy = self.gram.mul_vec(y);
        x.iter().zip(&gy).fold(r.zero(), |acc, (&a, &b)| r.add(acc, r.mul(a, b)))
    }

    fn is_totally_isotropic(&self, basis: &[Vec<Coeff>]) -> bool {
        let r = self.ring();
        basis.iter().all(|x| basis.iter().all(|y| r.is_zero(self.pair(x, y))))
    }

    /// Multiplier `c` with `<f x, f y> = c <x, y>`, if `f` is a similitude.
    pub fn similitude_factor(&self, f: &Matrix) -> Option<Coeff> {
        let r = self.ring();
        if f.rows() != self.dim() || f.cols() != self.dim() {
            return None;
        }
        let lhs = f.transpose().mul(&self.gram).mul(f);
        let (i, j) = (0..self.dim())
            .flat_map(|i| (0..self.dim()).map(move |j| (i, j)))
            .find(|&(i, j)| !r.is_zero(self.gram.get(i, j)))?;
        let c = r.mul(lhs.get(i, j), r.inv(self.gram.get(i, j))?);
        (!r.is_zero(c) && lhs == self.gram.scale(c)).then_some(c)
    }

    /// A similitude with multiplier `c` has `det f = +-c^(d/2)`; it is proper
    /// when the sign is `+`.
    pub fn is_proper_similitude(&self, f: &Matrix) -> Option<bool> {
        let r = self.ring();
        let c = self.similitude_factor(f)?;
        Some(f.determinant() == r.pow(c, self.dim() as u64 / 2))
    }
}

/// A Lagrangian subspace, stored by its reduced row echelon basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LagrangianSubspace {
    basis: Vec<Vec<Coeff>>,
}

fn rref_rows(ring: Ring, vectors: &[Vec<Coeff>]) -> Vec<Vec<Coeff>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let e = Matrix::from_rows(ring, vectors).echelon();
    (0..e.pivots.len()).map(|i| e.reduced.row(i)).collect()
}

impl LagrangianSubspace {
    pub fn new(space: &SymmetricSpace, vectors: &[Vec<Coeff>]) -> Result<LagrangianSubspace> {
        let r = space.ring();
        if vectors.iter().any(|v| v.len() != space.dim()) {
            return Err(LagrangianError::Dimension("vector length differs from the space".into()));
        }
        let basis = rref_rows(r, vectors);
        if basis.len() * 2 != space.dim() {
            return Err(LagrangianError::NotLagrangian(format!("dimension {} in a space of dimension {}", basis.len(), space.dim())));
        }
        if !space.is_totally_isotropic(&basis) {
            return Err(LagrangianError::NotLagrangian("not isotropic".into()));
        }
        Ok(LagrangianSubspace { basis })
    }

    pub fn basis(&self) -> &[Vec<Coeff>] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, ring: Ring, v: &[Coeff]) -> bool {
        let mut all = self.basis.clone();
        all.push(v.to_vec());
        span_rank(ring, &all) == self.dim()
    }

    pub fn intersection_dim(&self, ring: Ring, other: &LagrangianSubspace) -> usize {
        let mut all = self.basis.clone();
        all.extend(other.basis.iter().cloned());
        self.dim() + other.dim() - span_rank(ring, &all)
    }

    /// Image under a linear map (given as a matrix acting on column vectors).
    pub fn image(&self, space: &SymmetricSpace, f: &Matrix) -> Result<LagrangianSubspace> {
        let imgs: Vec<Vec<Coeff>> = self.basis.iter().map(|v| f.mul_vec(v)).collect();
        LagrangianSubspace::new(space, &imgs)
    }
}

/// Points of `P^1(F_q)`: `(1, t)` for every `t`, then `(0, 1)`.
fn projective_line(ring: Ring) -> Vec<Vec<Coeff>> {
    let mut pts: Vec<Vec<Coeff>> = ring.elements().into_iter().map(|t| vec![ring.one(), t]).collect();
    pts.push(vec![ring.zero(), ring.one()]);
    pts
}

/// All Lagrangian lines of a plane, by enumeration of `P^1(F_q)`.
pub fn lagrangian_lines(space: &SymmetricSpace) -> Result<Vec<LagrangianSubspace>> {
    if space.dim() != 2 {
        return Err(LagrangianError::Dimension(format!("expected a plane, got dimension {}", space.dim())));
    }
    let r = space.ring();
    let mut out: Vec<LagrangianSubspace> = projective_line(r)
        .into_iter()
        .filter(|v| r.is_zero(space.pair(v, v)))
        .map(|v| LagrangianSubspace::new(space, &[v]))
        .collect::<Result<_>>()?;
    out.sort();
    Ok(out)
}

/// Every subspace of dimension `k` of `F_q^d`, as reduced row echelon bases.
fn subspaces(ring: Ring, d: usize, k: usize) -> Vec<Vec<Vec<Coeff>>> {
    fn pivot_sets(d: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            pivot_sets(d, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let elems = ring.elements();
    let mut sets = Vec::new();
    pivot_sets(d, k, 0, &mut Vec::new(), &mut sets);
    let mut out = Vec::new();
    for piv in sets {
        // free slots: row i, column c > piv[i], c not a pivot
        let free: Vec<(usize, usize)> =
            (0..k).flat_map(|i| ((piv[i] + 1)..d).filter(|c| !piv.contains(c)).map(move |c| (i, c))).collect();
        let total = (elems.len() as u64).pow(free.len() as u32);
        for code in 0..total {
            let mut rows = vec![vec![ring.zero(); d]; k];
            for (i, &pc) in piv.iter().enumerate() {
                rows[i][pc] = ring.one();
            }
            let mut c = code;
            for &(i, col) in &free {
                rows[i][col] = elems[(c % elems.len() as u64) as usize];
                c /= elems.len() as u64;
            }
            out.push(rows);
        }
    }
    out
}

/// All Lagrangian subspaces, by brute force over subspaces of half dimension.
pub fn enumerate_lagrangians(space: &SymmetricSpace) -> Vec<LagrangianSubspace> {
    let r = space.ring();
    let mut out: Vec<LagrangianSubspace> = subspaces(r, space.dim(), space.dim() / 2)
        .into_iter()
        .filter(|b| space.is_totally_isotropic(b))
        .map(|b| LagrangianSubspace { basis: b })
        .collect();
    out.sort();
    out
}

/// For isotropic `v` outside the radical, an isotropic `w'` with
/// `<v, w'> = 1`: take any `w` with `<v, w>` a unit, normalise, and replace
/// it by `w - <w, w> / (2 <v, w>) v`.
pub fn construct_complement(space: &SymmetricSpace, v: &[Coeff]) -> Result<Vec<Coeff>> {
    let r = space.ring();
    if !r.is_zero(space.pair(v, v)) {
        return Err(LagrangianError::NotIsotropic);
    }
    let d = space.dim();
    let w = (0..d)
        .map(|i| {
            let mut e = vec![r.zero(); d];
            e[i] = r.one();
            e
        })
        .find(|e| !r.is_zero(space.pair(v, e)))
        .ok_or(LagrangianError::InRadical)?;
    let vw = space.pair(v, &w);
    let inv = r.inv(vw).expect("nonzero in a field");
    let w: Vec<Coeff> = w.iter().map(|&x| r.mul(x, inv)).collect();
    let ww = space.pair(&w, &w);
    let half = r.inv(r.from_int(2)).expect("odd characteristic");
    let t = r.mul(ww, half);
    Ok(w.iter().zip(v).map(|(&wi, &vi)| r.sub(wi, r.mul(t, vi))).collect())
}

/// `dim L1 / (L1 cap iso(L2))` mod 2, with `iso` a similitude carrying the
/// ambient space of `L2` onto that of `L1`.
pub fn delta(space: &SymmetricSpace, l1: &LagrangianSubspace, l2: &LagrangianSubspace, iso: &Matrix) -> Result<u8> {
    if space.similitude_factor(iso).is_none() {
        return Err(LagrangianError::NotSimilitude);
    }
    let r = space.ring();
    let l2i = l2.image(space, iso)?;
    Ok(((l1.dim() - l1.intersection_dim(r, &l2i)) % 2) as u8)
}

/// `delta(L, f(L))` for a similitude `f`.
pub fn similitude_invariance_check(space: &SymmetricSpace, f: &Matrix, l: &LagrangianSubspace) -> Result<u8> {
    if space.similitude_factor(f).is_none() {
        return Err(LagrangianError::NotSimilitude);
    }
    let id = Matrix::identity(space.ring(), space.dim());
    delta(space, l, &l.image(space, f)?, &id)
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct LagrangianCount {
    pub q: u64,
    pub gram: Vec<Vec<u64>>,
    pub lines: usize,
}

/// Lagrangian line counts for every nondegenerate symmetric Gram matrix of
/// a plane over `F_q`.
pub fn exhaustive_plane_counts(ring: Ring) -> Vec<LagrangianCount> {
    let el = ring.elements();
    let mut out = Vec::new();
    for &a in &el {
        for &b in &el {
            for &c in &el {
                let g = Matrix::from_rows(ring, &[vec![a, b], vec![b, c]]);
                let Ok(space) = SymmetricSpace::new(g) else { continue };
                let lines = lagrangian_lines(&space).expect("plane").len();
                out.push(LagrangianCount {
                    q: ring.size(),
                    gram: vec![vec![ring.index(a), ring.index(b)], vec![ring.index(b), ring.index(c)]],
                    lines,
                });
            }
        }
    }
    out
}

/// Errors of the reducible compatibility harness.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MrError {
    #[error(transparent)]
    PhiGamma(#[from] PhiGammaError),
    #[error(transparent)]
    Epsilon(#[from] EpsilonError),
    #[error(transparent)]
    Lagrangian(#[from] LagrangianError),
    #[error("residual modules are not identified: {0}")]
    ResidualMismatch(String),
    #[error("invalid lift: {0}")]
    BadLift(String),
    #[error("invalid pair spec: {0}")]
    Spec(String),
}

/// A reducible lift of a residual module: the residual character
/// `positive_summand` (1 or 2) lifts to a character of Hodge-Tate weight
/// `weight >= 1`, and the other one to its Tate dual.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftSpec {
    pub module: ModuleSpec,
    pub positive_summand: usize,
    pub weight: i64,
    #[serde(default)]
    pub monodromy: bool,
}

/// Two lifts and the isomorphism of the second residual module onto the
/// first (matrix in the bases `e1, e2`; identity when absent).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub first: LiftSpec,
    pub second: LiftSpec,
    #[serde(default)]
    pub identification: Option<Vec<Vec<CoeffSpec>>>,
}

impl PairSpec {
    pub fn from_json(s: &str) -> std::result::Result<PairSpec, MrError> {
        serde_json::from_str(s).map_err(|e| MrError::Spec(e.to_string()))
    }
}

/// One side of a pair: its decomposition and the line `H^1_f` reduces to.
#[derive(Clone, Debug, Serialize)]
pub struct LiftReport {
    pub lift: ReducibleLift,
    pub completed_epsilon: i32,
    /// `H^1_f` reduces to the line labelled `-epsilon_hat`.
    pub f_line_path_b: Vec<u64>,
    pub f_line_path_a: Vec<u64>,
    pub gram: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MrReport {
    pub p: u64,
    pub lifts: [LiftReport; 2],
    /// Matrix of the identification on `H^1` (columns: images of the second basis).
    pub transport: Vec<Vec<u64>>,
    pub similitude_factor: u64,
    pub delta: u8,
    pub delta_path_a: u8,
    pub epsilon_ratio: i32,
    pub holds: bool,
}

struct LiftAnalysis {
    report: LiftReport,
    coh: HerrCohomology,
    space: SymmetricSpace,
    line_b: Vec<Coeff>,
    line_a: Vec<Coeff>,
}

fn indices(ring: Ring, v: &[Coeff]) -> Vec<u64> {
    v.iter().map(|&c| ring.index(c)).collect()
}

fn matrix_indices(m: &Matrix) -> Vec<Vec<u64>> {
    (0..m.rows()).map(|i| indices(m.ring(), &m.row(i))).collect()
}

fn reducible_lift(spec: &LiftSpec, d: &PhiGammaModule) -> std::result::Result<ReducibleLift, MrError> {
    let r = d.ring();
    let j = spec.positive_summand;
    if j != 1 && j != 2 {
        return Err(MrError::BadLift(format!("positive_summand must be 1 or 2, got {j}")));
    }
    if d.construction() == Construction::Extension && j != 1 {
        return Err(MrError::BadLift("in a nonsplit module only the sub-character can have positive weight".into()));
    }
    if spec.weight < 1 {
        return Err(MrError::BadLift(format!("weight {} is not positive", spec.weight)));
    }
    let exp = d.tame_exponent(j - 1).ok_or_else(|| MrError::BadLift("character is not tame".into()))?;
    let n = (exp as i64 - spec.weight).rem_euclid(r.p() as i64 - 1);
    if spec.monodromy {
        let (pos, other) = (d.characters()[j - 1], d.characters()[2 - j]);
        if spec.weight != 1 || n != 0 || pos.at_p != r.one() || other.at_p != r.one() || other.at_gen != r.one() {
            return Err(MrError::BadLift("monodromy needs the lift Z_p(1) by Z_p".into()));
        }
    }
    Ok(ReducibleLift { weight: spec.weight, omega_exponent: n, monodromy: spec.monodromy })
}

fn analyse_lift(spec: &LiftSpec) -> std::result::Result<LiftAnalysis, MrError> {
    let built = spec.module.build()?;
    let d = &built.module;
    let lift = reducible_lift(spec, d)?;
    let eps = lift.completed_epsilon()?;
    let opts = LsdOptions { schedule: built.schedule.clone(), w_limit_n: built.w_limit_n };
    let coh = herr_cohomology(d, &opts.schedule)?;
    let sd = lsd_from_cohomology(&coh, &opts)?;
    let b = sd.path_b.as_ref().ok_or_else(|| MrError::BadLift("module is not reducible".into()))?;
    let want = -eps as i8;
    let line_b = if b.sub_label == want { b.sub_line.clone() } else { b.complement.clone() };
    let line_a = if want == 1 { sd.plus.clone() } else { sd.minus.clone() };
    let r = d.ring();
    let space = SymmetricSpace::new(sd.gram.clone())?;
    let report = LiftReport {
        lift,
        completed_epsilon: eps,
        f_line_path_b: indices(r, &line_b),
        f_line_path_a: indices(r, &line_a),
        gram: matrix_indices(&sd.gram),
    };
    Ok(LiftAnalysis { report, coh, space, line_b, line_a })
}

fn apply_constant(f: &Matrix, v: &[Series]) -> std::result::Result<Vector, MrError> {
    let r = f.ring();
    let prec = v.iter().map(|s| s.precision()).min().unwrap_or(0);
    (0..f.rows())
        .map(|i| {
            v.iter().enumerate().try_fold(Series::zero(r, prec), |acc, (j, s)| Ok(acc.add(&s.scale(f.get(i, j)))?))
        })
        .collect::<std::result::Result<_, PhiGammaError>>()
        .map_err(MrError::from)
}

/// `f` commutes with `phi` and `sigma_a` on the basis vectors, modulo the
/// common precision of both modules.
fn check_identification(d1: &PhiGammaModule, d2: &PhiGammaModule, f: &Matrix) -> std::result::Result<(), MrError> {
    let r = d1.ring();
    if d1.ring() != d2.ring() || d1.gamma_generator() != d2.gamma_generator() || d1.rank() != d2.rank() {
        return Err(MrError::ResidualMismatch("rings, generators or ranks differ".into()));
    }
    if f.rows() != d1.rank() || f.cols() != d1.rank() || r.is_zero(f.determinant()) {
        return Err(MrError::ResidualMismatch("identification is not an invertible matrix of the right size".into()));
    }
    let prec = d1.precision().min(d2.precision()).min(64);
    for k in 0..d1.rank() {
        let e = d2.monomial(k, 0, prec);
        let fe = apply_constant(f, &e)?;
        let checks = [
            (apply_constant(f, &d2.phi(&e)?)?, d1.phi(&fe)?, "phi"),
            (apply_constant(f, &d2.gamma(&e)?)?, d1.gamma(&fe)?, "sigma_a"),
        ];
        for (lhs, rhs, what) in checks {
            let top = lhs.iter().chain(&rhs).map(|s| s.precision()).min().unwrap_or(prec);
            if lhs.iter().zip(&rhs).any(|(a, b)| !a.agrees_with(b, top)) {
                return Err(MrError::ResidualMismatch(format!("identification does not commute with {what} on e{}", k + 1)));
            }
        }
    }
    Ok(())
}

/// Compare `(-1)^delta` of the two residual `H^1_f` lines with the ratio of
/// completed epsilon constants. The lines come from the reducible labels
/// (path B); `delta_path_a` repeats the count with the `w_T` eigenlines.
pub fn mr_compatibility(pair: &PairSpec) -> std::result::Result<MrReport, MrError> {
    let first = analyse_lift(&pair.first)?;
    let second = analyse_lift(&pair.second)?;
    let (d1, d2) = (first.coh.module(), second.coh.module());
    let r = d1.ring();
    let f = match &pair.identification {
        None => Matrix::identity(r, d1.rank()),
        Some(rows) => {
            let rows: Vec<Vec<Coeff>> = rows
                .iter()
                .map(|row| row.iter().map(|c| c.to_coeff(&r)).collect::<std::result::Result<_, _>>())
                .collect::<std::result::Result<_, _>>()?;
            if rows.iter().any(|row| row.len() != rows.len()) {
                return Err(MrError::Spec("identification must be square".into()));
            }
            Matrix::from_rows(r, &rows)
        }
    };
    check_identification(d1, d2, &f)?;
    let cols: Vec<Vec<Coeff>> = second
        .coh
        .psi_basis()
        .iter()
        .map(|y| Ok(first.coh.class_coordinates(&apply_constant(&f, y)?)?))
        .collect::<std::result::Result<_, MrError>>()?;
    let transport = Matrix::from_columns(r, first.space.dim(), &cols);
    // transport^T G1 transport = c G2
    let pulled = transport.transpose().mul(first.space.gram()).mul(&transport);
    let g2 = second.space.gram();
    let c = (0..g2.rows())
        .flat_map(|i| (0..g2.cols()).map(move |j| (i, j)))
        .find(|&(i, j)| !r.is_zero(g2.get(i, j)))
        .and_then(|(i, j)| r.inv(g2.get(i, j)).map(|inv| r.mul(pulled.get(i, j), inv)))
        .filter(|&c| !r.is_zero(c) && pulled == g2.scale(c))
        .ok_or(LagrangianError::NotSimilitude)?;
    let id = Matrix::identity(r, first.space.dim());
    let count = |l1: &[Coeff], l2: &[Coeff]| -> std::result::Result<u8, MrError> {
        let a = LagrangianSubspace::new(&first.space, &[l1.to_vec()])?;
        let b = LagrangianSubspace::new(&first.space, &[transport.mul_vec(l2)])?;
        Ok(delta(&first.space, &a, &b, &id)?)
    };
    let delta_b = count(&first.line_b, &second.line_b)?;
    let delta_a = count(&first.line_a, &second.line_a)?;
    let ratio = first.report.completed_epsilon * second.report.completed_epsilon;
    let sign = if delta_b == 0 { 1 } else { -1 };
    Ok(MrReport {
        p: r.p(),
        transport: matrix_indices(&transport),
        similitude_factor: r.index(c),
        delta: delta_b,
        delta_path_a: delta_a,
        epsilon_ratio: ratio,
        holds: sign == ratio && delta_a == delta_b,
        lifts: [first.report, second.report],
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AnomalousReport {
    pub p: u64,
    /// Gram matrix in the basis `kappa(p), kappa(u), eta_ur, eta_ram`.
    pub gram: Vec<Vec<u64>>,
    pub delta: u8,
    pub completed_epsilon: i32,
    pub holds: bool,
}

/// The split residual module `F(1) + F` of the crystalline lift
/// `Z_p(1) + Z_p`: `H^1_f` reduces to `span(kappa(u), eta_ur)`, the sub
/// gives `H^1(F(1)) = span(kappa(p), kappa(u))`, and `(-1)^delta` should be
/// `-epsilon_hat`.
pub fn anomalous_split_check(ring: Ring) -> std::result::Result<AnomalousReport, MrError> {
    let p = ring.p();
    let om = PhiGammaModule::tame(ring, 1, ring.one())?;
    let triv = PhiGammaModule::tame(ring, 0, ring.one())?;
    let d = PhiGammaModule::direct_sum(&om, &triv)?;
    let cal = calibrate(ring)?;
    let hom = [Cocycle::unramified(ring), Cocycle::ramified(ring)];
    let lo = -(p as i64) - 1;
    let prec = p as i64 * (6 - lo) + 16;
    let kappa_p = uniformizer_cocycle(ring, p as i64 + 1)?;
    let mut cands = vec![kappa_p.clone()];
    cands.extend(polynomial_cocycles(&om, lo, 1, prec)?);
    let chosen = independent_classes(&om, &cands, &triv, &hom, &cal)?;
    if chosen.len() != 2 {
        return Err(MrError::PhiGamma(PhiGammaError::Certificate(format!(
            "found {} independent classes in H^1(omega)",
            chosen.len()
        ))));
    }
    // kappa(u) is the class killed by the valuation; fix it through the oracle's evaluations
    let rows = Matrix::from_rows(ring, &[chosen[0].1.clone(), chosen[1].1.clone()]);
    let target = [
        ring.from_int(evaluation_pairing(KummerClass::Unit, HomClass::Unramified, p) as i64),
        ring.from_int(evaluation_pairing(KummerClass::Unit, HomClass::Ramified, p) as i64),
    ];
    let coeffs = rows
        .transpose()
        .solve(&target)
        .ok_or_else(|| PhiGammaError::Certificate("pairing with Hom(G, F) is degenerate".into()))?;
    let chosen_cocycles: Vec<Cocycle> = chosen.into_iter().map(|(c, _)| c).collect();
    let kappa_u = Cocycle::combine(ring, &coeffs, &chosen_cocycles)?;
    let zero = Series::zero(ring, crate::series::EXACT);
    let first = |c: &Cocycle| Cocycle {
        phi_part: vec![c.phi_part[0].clone(), zero.clone()],
        gamma_part: vec![c.gamma_part[0].clone(), zero.clone()],
    };
    let second = |c: &Cocycle| Cocycle {
        phi_part: vec![zero.clone(), c.phi_part[0].clone()],
        gamma_part: vec![zero.clone(), c.gamma_part[0].clone()],
    };
    let classes = [first(&kappa_p), first(&kappa_u), second(&hom[0]), second(&hom[1])];
    let gram = tate_gram(&d, &classes, &cal)?;
    let space = SymmetricSpace::new(gram.clone())?;
    let e = |i: usize| -> Vec<Coeff> { (0..4).map(|j| if i == j { ring.one() } else { ring.zero() }).collect() };
    let l_f = LagrangianSubspace::new(&space, &[e(1), e(2)])?;
    let l_c = LagrangianSubspace::new(&space, &[e(0), e(1)])?;
    let dl = delta(&space, &l_f, &l_c, &Matrix::identity(ring, 4))?;
    let lift = ReducibleLift { weight: 1, omega_exponent: 0, monodromy: false };
    let eps = lift.completed_epsilon()?;
    let sign = if dl == 0 { 1 } else { -1 };
    Ok(AnomalousReport { p, gram: matrix_indices(&gram), delta: dl, completed_epsilon: eps, holds: sign == -eps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(p: u64, rows: &[Vec<i64>]) -> SymmetricSpace {
        let r = Ring::field(p, 1).unwrap();
        SymmetricSpace::new(Matrix::from_int_rows(r, rows)).unwrap()
    }

    #[test]
    fn hyperbolic_plane_lines() {
        let s = space(5, &[vec![0, 1], vec![1, 0]]);
        let r = s.ring();
        let lines = lagrangian_lines(&s).unwrap();
        assert_eq!(lines.len(), 2);
        assert!(lines.iter().any(|l| l.contains(r, &[r.one(), r.zero()])));
        assert!(lines.iter().any(|l| l.contains(r, &[r.zero(), r.one()])));
    }

    #[test]
    fn anisotropic_and_split_identity() {
        assert!(lagrangian_lines(&space(3, &[vec![1, 0], vec![0, 1]])).unwrap().is_empty());
        let s = space(5, &[vec![1, 0], vec![0, 1]]);
        let r = s.ring();
        let lines = lagrangian_lines(&s).unwrap();
        assert_eq!(lines.len(), 2);
        assert!(lines.iter().any(|l| l.contains(r, &[r.one(), r.from_int(2)])));
        assert!(lines.iter().any(|l| l.contains(r, &[r.one(), r.from_int(-2)])));
    }

    #[test]
    fn complement_of_e1() {
        let s = space(7, &[vec![0, 1], vec![1, 0]]);
        let r = s.ring();
        assert_eq!(construct_complement(&s, &[r.one(), r.zero()]).unwrap(), vec![r.zero(), r.one()]);
        assert_eq!(construct_complement(&s, &[r.one(), r.one()]), Err(LagrangianError::NotIsotropic));
    }

    #[test]
    fn delta_basics() {
        let s = space(5, &[vec![0, 1], vec![1, 0]]);
        let r = s.ring();
        let l = lagrangian_lines(&s).unwrap();
        let id = Matrix::identity(r, 2);
        assert_eq!(delta(&s, &l[0], &l[0], &id).unwrap(), 0);
        assert_eq!(delta(&s, &l[0], &l[1], &id).unwrap(), 1);
        let bad = Matrix::from_int_rows(r, &[vec![1, 1], vec![0, 1]]);
        assert_eq!(delta(&s, &l[0], &l[1], &bad), Err(LagrangianError::NotSimilitude));
    }

    #[test]
    fn reflection_swaps_lines() {
        // an improper isometry of the hyperbolic plane exchanges its two Lagrangians
        let s = space(5, &[vec![0, 1], vec![1, 0]]);
        let r = s.ring();
        let swap = Matrix::from_int_rows(r, &[vec![0, 1], vec![1, 0]]);
        assert_eq!(s.is_proper_similitude(&swap), Some(false));
        let l = lagrangian_lines(&s).unwrap();
        assert_eq!(similitude_invariance_check(&s, &swap, &l[0]).unwrap(), 1);
        let scale = Matrix::from_int_rows(r, &[vec![2, 0], vec![0, 3]]);
        assert_eq!(s.is_proper_similitude(&scale), Some(true));
        assert_eq!(similitude_invariance_check(&s, &scale, &l[0]).unwrap(), 0);
    }

    #[test]
    fn four_dimensional_count() {
        // hyperbolic 4-space over F_3 has 2 (q + 1) Lagrangian planes
        let s = space(3, &[vec![0, 0, 1, 0], vec![0, 0, 0, 1], vec![1, 0, 0, 0], vec![0, 1, 0, 0]]);
        assert_eq!(enumerate_lagrangians(&s).len(), 8);
    }
}
