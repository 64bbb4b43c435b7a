use localsign::linalg::Matrix;
use localsign::padic_core::{Coeff, Ring};
use localsign::series::TruncatedLaurentSeries as S;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rings() -> Vec<Ring> {
    vec![
        Ring::field(3, 1).unwrap(),
        Ring::field(5, 1).unwrap(),
        Ring::field(3, 2).unwrap(),
        Ring::residue(3, 2).unwrap(),
        Ring::residue(3, 3).unwrap(),
        Ring::residue(5, 2).unwrap(),
    ]
}

fn random_series(rng: &mut ChaCha8Rng, r: Ring, lo: i64, len: usize) -> S {
    let val = rng.random_range(lo..=3);
    let n = r.modulus();
    let coeffs: Vec<Coeff> = (0..len)
        .map(|_| Coeff([rng.random_range(0..n), if r.f() == 2 { rng.random_range(0..n) } else { 0 }]))
        .collect();
    S::new(r, val, coeffs, val + len as i64)
}

#[test]
fn psi_left_inverse_of_phi() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for r in rings() {
        for _ in 0..100 {
            let f = random_series(&mut rng, r, -3, 12);
            let back = f.phi().unwrap().psi().unwrap();
            assert!(back.precision() > f.valuation().min(0) - 3, "no certified digits");
            assert!(back.agrees_with(&f, back.precision()), "psi(phi f) != f over {r}: {f}");
        }
    }
}

#[test]
fn psi_kills_twisted_frobenius_images() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for r in rings() {
        let p = r.p();
        for _ in 0..100 {
            let g = random_series(&mut rng, r, -2, 10);
            let pg = g.phi().unwrap();
            for i in 0..p {
                let t = S::one_plus_x_pow(r, i, 1 << 40).mul(&pg).unwrap();
                let s = t.psi().unwrap();
                if i == 0 {
                    assert!(s.agrees_with(&g, s.precision()));
                } else {
                    assert!(s.agrees_with(&S::zero(r, 1 << 40), s.precision()), "psi((1+X)^{i} phi g) != 0");
                }
            }
        }
    }
}

#[test]
fn projection_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for r in rings() {
        for _ in 0..100 {
            let f = random_series(&mut rng, r, -2, 10);
            let g = random_series(&mut rng, r, -4, 30);
            let lhs = f.phi().unwrap().mul(&g).unwrap().psi().unwrap();
            let rhs = f.mul(&g.psi().unwrap()).unwrap();
            let prec = lhs.precision().min(rhs.precision());
            assert!(lhs.agrees_with(&rhs, prec), "projection formula over {r}");
        }
    }
}

#[test]
fn sigma_composition_and_commutation() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for r in rings() {
        let p = r.p() as i64;
        let units: Vec<i64> = (1..4 * p).filter(|a| a % p != 0).collect();
        for _ in 0..100 {
            let f = random_series(&mut rng, r, -2, 12);
            let a = units[rng.random_range(0..units.len())];
            let b = units[rng.random_range(0..units.len())];
            let lhs = f.sigma_int(b).unwrap().sigma_int(a).unwrap();
            let rhs = f.sigma_int(a * b).unwrap();
            assert!(lhs.agrees_with(&rhs, lhs.precision().min(rhs.precision())));
            let c1 = f.phi().unwrap().sigma_int(a).unwrap();
            let c2 = f.sigma_int(a).unwrap().phi().unwrap();
            assert!(c1.agrees_with(&c2, c1.precision().min(c2.precision())));
        }
    }
}

/// Mod p: the exponent-extraction psi equals the x_0 block of the inverse of
/// the linear map (x_0..x_{p-1}) -> sum_i (1+X)^i x_i(X^p) on a window.
#[test]
fn psi_mod_p_matches_linear_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for p in [3u64, 5, 7] {
        let r = Ring::field(p, 1).unwrap();
        let k = 6usize;
        let n = p as usize * k;
        let mut cols = Vec::new();
        for i in 0..p as usize {
            for q in 0..k {
                let mut col = vec![r.zero(); n];
                let row = localsign::padic_core::binomial_row(i as i128, i + 1, &r);
                for (j, &c) in row.iter().enumerate() {
                    if p as usize * q + j < n {
                        col[p as usize * q + j] = Coeff([c, 0]);
                    }
                }
                cols.push(col);
            }
        }
        let a = Matrix::from_columns(r, n, &cols);
        for _ in 0..100 {
            let x: Vec<Coeff> = (0..n).map(|_| Coeff([rng.random_range(0..p), 0])).collect();
            let sol = a.solve(&x).expect("decomposition map is invertible");
            let f = S::new(r, 0, x.clone(), n as i64);
            let s = f.psi().unwrap();
            for q in 0..k {
                assert_eq!(s.coeff(q as i64), sol[q]);
            }
        }
    }
}
