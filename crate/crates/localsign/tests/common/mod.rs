#![allow(dead_code)]

use localsign::lagrangian_mr::{LiftSpec, PairSpec, SymmetricSpace};
use localsign::linalg::Matrix;
use localsign::padic_core::{ilog, invmod, Coeff, Ring};
use localsign::phigamma::*;
use localsign::series::TruncatedLaurentSeries as S;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

pub fn field(p: u64) -> Ring {
    Ring::field(p, 1).unwrap()
}

pub fn assert_stable(coh: &HerrCohomology) {
    let tail = &coh.reports[coh.reports.len() - WindowSchedule::STABLE_RUN..];
    assert!(tail.iter().all(|r| (r.psi_coinvariants, r.h2) == (tail[0].psi_coinvariants, tail[0].h2)));
    let (h0, h1, h2) = coh.dims();
    assert_eq!(h0 as i64 - h1 as i64 + h2 as i64, -(coh.module().rank() as i64), "Euler characteristic");
}

pub fn random_elem(ring: Ring, rng: &mut ChaCha8Rng) -> Coeff {
    let el = ring.elements();
    el[rng.random_range(0..el.len())]
}

pub fn random_space(ring: Ring, d: usize, rng: &mut ChaCha8Rng) -> SymmetricSpace {
    loop {
        let mut g = Matrix::zeros(ring, d, d);
        for i in 0..d {
            for j in i..d {
                let x = random_elem(ring, rng);
                g.set(i, j, x);
                g.set(j, i, x);
            }
        }
        if let Ok(s) = SymmetricSpace::new(g) {
            return s;
        }
    }
}

/// The hyperbolic form and the identity form on `F_p^4`.
pub fn four_spaces(p: u64) -> Vec<SymmetricSpace> {
    let r = field(p);
    let hyp = vec![vec![0, 0, 1, 0], vec![0, 0, 0, 1], vec![1, 0, 0, 0], vec![0, 1, 0, 0]];
    let diag = vec![vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 0], vec![0, 0, 0, 1]];
    [hyp, diag].iter().map(|g| SymmetricSpace::new(Matrix::from_int_rows(r, g)).unwrap()).collect()
}

/// `omega^k mu_l + omega^(1-k) mu_(1/l)`.
pub fn decomposable(p: u64, k: i64, l: i64) -> PhiGammaModule {
    let r = field(p);
    let lam = r.from_int(l);
    let d1 = PhiGammaModule::tame(r, k, lam).unwrap();
    let d2 = PhiGammaModule::tame(r, (1 - k).rem_euclid(p as i64 - 1), r.inv(lam).unwrap()).unwrap();
    PhiGammaModule::direct_sum(&d1, &d2).unwrap()
}

/// Decomposable self-dual sums over `F_3` and `F_5` without invariants,
/// as `(p, k, module)`.
pub fn generic_sums() -> Vec<(u64, i64, PhiGammaModule)> {
    let mut out = Vec::new();
    for p in [3u64, 5] {
        for k in 0..p as i64 - 1 {
            for l in 1..p as i64 {
                // omega^k mu_l in {1, omega} has invariants
                if l == 1 && k <= 1 {
                    continue;
                }
                out.push((p, k, decomposable(p, k, l)));
            }
        }
    }
    out
}

/// `(p, chars, cocycle, r)` with `r` the sub-character exponent.
pub type NonsplitSpec = (u64, [(u64, u64); 2], Vec<(i64, u64)>, i64);

/// Nonsplit self-dual extensions.
pub fn nonsplit_specs() -> Vec<NonsplitSpec> {
    let x3 = vec![(-1, 1), (0, 2)];
    vec![
        (3, [(2, 1), (2, 2)], x3.clone(), 0),
        (3, [(2, 2), (2, 1)], x3.clone(), 1),
        (3, [(1, 2), (1, 1)], x3, 1),
        (5, [(1, 2), (1, 1)], vec![(-1, 1), (0, 3)], 1),
        (5, [(2, 2), (3, 1)], vec![(-1, 1)], 1),
        (5, [(3, 2), (2, 1)], vec![(-1, 1)], 1),
        (5, [(4, 2), (4, 1)], vec![(-1, 1), (0, 3)], 1),
    ]
}

/// Expected path-B label of the sub line of a nonsplit extension.
pub fn nonsplit_label(chars: [(u64, u64); 2], r_sub: i64) -> i8 {
    let exceptional = chars == [(1, 2), (1, 1)];
    if exceptional || r_sub % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn module_spec(p: u64, construction: &str, chars: [(u64, u64); 2], cocycle: &[(i64, u64)]) -> ModuleSpec {
    let v = json!({
        "coeff": {"p": p, "m": 1, "f": 1},
        "construction": construction,
        "chars": chars.iter().map(|&(a, g)| json!({"at_p": a, "at_gen": g})).collect::<Vec<_>>(),
        "cocycle": cocycle.iter().map(|&(e, c)| json!([e, c])).collect::<Vec<_>>(),
    });
    ModuleSpec::from_json(&v.to_string()).unwrap()
}

pub fn build_extension(p: u64, chars: [(u64, u64); 2], cocycle: &[(i64, u64)]) -> BuiltModule {
    module_spec(p, "extension", chars, cocycle).build().unwrap()
}

pub fn lift(m: &ModuleSpec, positive_summand: usize, weight: i64, monodromy: bool) -> LiftSpec {
    LiftSpec { module: m.clone(), positive_summand, weight, monodromy }
}

pub fn pair(first: LiftSpec, second: LiftSpec, identification: Option<Vec<Vec<i64>>>) -> PairSpec {
    let identification =
        identification.map(|rows| rows.into_iter().map(|r| r.into_iter().map(CoeffSpec::Int).collect()).collect());
    PairSpec { first, second, identification }
}

/// `sum_{i=1}^{p-1} (1+X)^i phi(v_i)`, which lies in `D^{psi=0}`.
pub fn random_psi_zero(d: &PhiGammaModule, prec: i64, rng: &mut ChaCha8Rng) -> Vector {
    let r = d.ring();
    let p = r.p();
    let mut acc = d.zero_vector(prec);
    let inner = prec / p as i64 + 1;
    for i in 1..p {
        let v: Vec<S> = (0..d.rank())
            .map(|_| S::from_ints(r, -1, &(0..inner + 1).map(|_| rng.random_range(0..p as i64)).collect::<Vec<_>>(), inner))
            .collect();
        let fv = d.phi(&v).unwrap();
        let t = S::one_plus_x_pow(r, i, prec + p as i64);
        for (a, s) in acc.iter_mut().zip(&fv) {
            *a = a.add(&s.mul(&t).unwrap()).unwrap();
        }
    }
    acc.into_iter().map(|s| s.truncate(prec)).collect()
}

fn pole(v: &[S]) -> i64 {
    v.iter().filter(|s| !s.is_zero()).map(|s| (-s.valuation()).max(0)).max().unwrap_or(0)
}

fn sigma(d: &PhiGammaModule, b: u64, v: &[S]) -> Vector {
    let prec = v.iter().map(|s| s.precision()).min().unwrap();
    let g = d.gamma_action(b as i64, prec, pole(v)).unwrap();
    d.apply_gamma(&g, v).unwrap()
}

fn agree(a: &[S], b: &[S], below: i64) -> bool {
    a.iter().zip(b).all(|(x, y)| x.agrees_with(y, below))
}

/// `w_*` at limit `n = default + extra`; with `next_index`, limit `n + 1` is
/// compared as well (the input then has to be `p` times longer).
pub fn check_w_star_contract(d: &PhiGammaModule, samples: usize, self_dual: bool, extra: u32, next_index: bool) {
    let r = d.ring();
    let p = r.p();
    let n = default_w_limit(d) + extra;
    let pn = p.pow(n) as i64;
    let prec = 30;
    let len = prec + 3 * if next_index { p as i64 * pn } else { pn };
    let big = p.pow(ilog(len as u64, p) + 2);
    let mut rng = ChaCha8Rng::seed_from_u64(p * 100 + d.pole_shift() as u64);
    for _ in 0..samples {
        let x = random_psi_zero(d, len, &mut rng);
        let top = vec![prec + pn; d.rank()];
        let (w, cert) = w_star(d, &x, n, &top).unwrap();
        assert!(cert.agreement.iter().zip(&top).all(|(a, t)| a >= t));
        assert!(d.psi(&w).unwrap().iter().all(|s| s.truncate(prec).is_zero()), "psi w_* x = 0");

        if next_index {
            let (w_next, _) = w_star(d, &x, n + 1, &vec![prec; d.rank()]).unwrap();
            assert!(agree(&w, &w_next, prec));
        }

        // w_*(sigma_b x) = sigma_(1/b) w_*(x)
        let b = loop {
            let b = rng.random_range(2..big);
            if b % p != 0 {
                break b;
            }
        };
        let binv = invmod(b, big).unwrap();
        let (wb, _) = w_star(d, &sigma(d, b, &x), n, &vec![prec; d.rank()]).unwrap();
        assert!(agree(&wb, &sigma(d, binv, &w), prec), "Gamma-equivariance with inversion");

        if self_dual {
            let (ww, _) = w_star(d, &w, n, &vec![prec; d.rank()]).unwrap();
            assert!(agree(&ww, &x, prec), "w_* w_* = id");
        }
    }
}
