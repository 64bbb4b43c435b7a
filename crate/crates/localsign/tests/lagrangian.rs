mod common;

use common::{four_spaces, random_elem, random_space};
use localsign::lagrangian_mr::{
    construct_complement, delta, enumerate_lagrangians, exhaustive_plane_counts, similitude_invariance_check,
    SymmetricSpace,
};
use localsign::linalg::Matrix;
use localsign::padic_core::{Coeff, Ring};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn field(p: u64, f: u32) -> Ring {
    Ring::field(p, f).unwrap()
}

#[test]
fn plane_counts_are_zero_or_two() {
    for (p, f) in [(3, 1), (5, 1), (7, 1), (3, 2)] {
        let counts = exhaustive_plane_counts(field(p, f));
        assert!(!counts.is_empty());
        assert!(counts.iter().all(|c| c.lines == 0 || c.lines == 2), "q = {}", p.pow(f));
        assert!(counts.iter().any(|c| c.lines == 0) && counts.iter().any(|c| c.lines == 2));
    }
}

#[test]
fn complements_on_random_instances() {
    let r = field(7, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut done = 0;
    while done < 1000 {
        let d = if done % 2 == 0 { 2 } else { 4 };
        let s = random_space(r, d, &mut rng);
        let v: Vec<Coeff> = (0..d).map(|_| random_elem(r, &mut rng)).collect();
        if v.iter().all(|&x| r.is_zero(x)) || !r.is_zero(s.pair(&v, &v)) {
            continue;
        }
        let w = construct_complement(&s, &v).unwrap();
        assert!(r.is_zero(s.pair(&w, &w)));
        assert_eq!(s.pair(&v, &w), r.one());
        assert_eq!(localsign::linalg::span_rank(r, &[v, w]), 2);
        done += 1;
    }
}

#[test]
fn delta_is_transitive_and_symmetric_in_dimension_four() {
    for p in [3, 5] {
        for s in four_spaces(p) {
            let r = s.ring();
            let id = Matrix::identity(r, 4);
            let ls = enumerate_lagrangians(&s);
            assert_eq!(ls.len() as u64, 2 * (p + 1));
            let d: Vec<Vec<u8>> = ls.iter().map(|a| ls.iter().map(|b| delta(&s, a, b, &id).unwrap()).collect()).collect();
            for i in 0..ls.len() {
                for j in 0..ls.len() {
                    assert_eq!(d[i][j], d[j][i]);
                    for k in 0..ls.len() {
                        assert_eq!(d[i][k], (d[i][j] + d[j][k]) % 2, "p = {p}, triple ({i}, {j}, {k})");
                    }
                }
            }
        }
    }
}

/// Reflection in an anisotropic vector `v`.
fn reflection(s: &SymmetricSpace, v: &[Coeff]) -> Matrix {
    let r = s.ring();
    let d = s.dim();
    let c = r.mul(r.from_int(2), r.inv(s.pair(v, v)).unwrap());
    let mut m = Matrix::identity(r, d);
    for j in 0..d {
        let mut e = vec![r.zero(); d];
        e[j] = r.one();
        let t = r.mul(c, s.pair(&e, v));
        for i in 0..d {
            m.set(i, j, r.sub(m.get(i, j), r.mul(t, v[i])));
        }
    }
    m
}

fn random_reflection(s: &SymmetricSpace, rng: &mut ChaCha8Rng) -> Matrix {
    let r = s.ring();
    loop {
        let v: Vec<Coeff> = (0..s.dim()).map(|_| random_elem(r, rng)).collect();
        if !r.is_zero(s.pair(&v, &v)) {
            return reflection(s, &v);
        }
    }
}

#[test]
fn proper_similitudes_fix_delta() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for p in [3, 5] {
        for s in four_spaces(p) {
            let r = s.ring();
            let ls = enumerate_lagrangians(&s);
            for _ in 0..40 {
                let mut f = Matrix::identity(r, 4);
                for _ in 0..2 * rng.random_range(1..4) {
                    f = f.mul(&random_reflection(&s, &mut rng));
                }
                let c = loop {
                    let c = random_elem(r, &mut rng);
                    if !r.is_zero(c) {
                        break c;
                    }
                };
                let f = f.scale(c);
                assert_eq!(s.is_proper_similitude(&f), Some(true));
                for l in &ls {
                    assert_eq!(similitude_invariance_check(&s, &f, l).unwrap(), 0);
                }
            }
        }
    }
}

#[test]
fn improper_isometries_move_lagrangians_across_classes() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for s in four_spaces(5) {
        let f = random_reflection(&s, &mut rng);
        assert_eq!(s.is_proper_similitude(&f), Some(false));
        let ls = enumerate_lagrangians(&s);
        assert!(ls.iter().any(|l| similitude_invariance_check(&s, &f, l).unwrap() == 1));
    }
}

#[test]
fn hyperbolic_similitude_with_nonsquare_multiplier() {
    // (x, y) -> (c x, y) on a hyperbolic 4-space scales the form by c
    for p in [3, 5] {
        let s = &four_spaces(p)[0];
        let r = s.ring();
        let c = r.from_int(2);
        let f = Matrix::from_rows(
            r,
            &[
                vec![c, r.zero(), r.zero(), r.zero()],
                vec![r.zero(), c, r.zero(), r.zero()],
                vec![r.zero(), r.zero(), r.one(), r.zero()],
                vec![r.zero(), r.zero(), r.zero(), r.one()],
            ],
        );
        assert_eq!(s.similitude_factor(&f), Some(c));
        assert_eq!(s.is_proper_similitude(&f), Some(true));
        for l in enumerate_lagrangians(s) {
            assert_eq!(similitude_invariance_check(s, &f, &l).unwrap(), 0);
        }
    }
}
