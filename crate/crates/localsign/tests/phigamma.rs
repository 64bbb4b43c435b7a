mod common;

use common::*;
use localsign::oracles::{cft_h1_dims, TameCharacter};
use localsign::phigamma::*;

#[test]
fn rank_one_dims_match_class_field_theory() {
    for p in [3u64, 5, 7] {
        let r = field(p);
        for k in 0..p as i64 - 1 {
            for l in 1..p as i64 {
                let d = PhiGammaModule::tame(r, k, r.from_int(l)).unwrap();
                let coh = herr_cohomology(&d, &WindowSchedule::standard(&d, 0)).unwrap();
                assert_stable(&coh);
                let eta = TameCharacter::new(p, k, l).unwrap();
                assert_eq!(coh.dims(), cft_h1_dims(&eta), "p={p} r={k} lambda={l}");
            }
        }
    }
}

#[test]
fn euler_characteristic_on_rank_two() {
    for (_, _, d) in generic_sums().into_iter().step_by(3) {
        assert_stable(&herr_cohomology(&d, &WindowSchedule::standard(&d, 0)).unwrap());
    }
    // non-generic sums too
    for (p, k) in [(3, 0), (5, 1)] {
        let d = decomposable(p, k, 1);
        let coh = herr_cohomology(&d, &WindowSchedule::standard(&d, 0)).unwrap();
        assert_stable(&coh);
        assert_eq!(coh.dims(), (1, 4, 1));
    }
    for (p, chars, x, _) in nonsplit_specs().into_iter().take(4) {
        let b = build_extension(p, chars, &x);
        let coh = herr_cohomology(&b.module, &b.schedule).unwrap();
        assert_stable(&coh);
        assert_eq!(coh.dims(), (0, 2, 0));
    }
}

#[test]
fn local_duality_pairing_is_perfect() {
    for p in [3u64, 5] {
        let r = field(p);
        let cal = calibrate(r).unwrap();
        for k in 0..p as i64 - 1 {
            for l in 1..p as i64 {
                let d = PhiGammaModule::tame(r, k, r.from_int(l)).unwrap();
                let dual = d.dual_twist().unwrap();
                let c1 = psi_class_cocycles(&herr_cohomology(&d, &WindowSchedule::standard(&d, 0)).unwrap()).unwrap();
                let c2 = psi_class_cocycles(&herr_cohomology(&dual, &WindowSchedule::standard(&dual, 0)).unwrap()).unwrap();
                if c1.len() != c2.len() || c1.is_empty() {
                    continue;
                }
                let m = pairing_matrix(&d, &c1, &dual, &c2, &cal).unwrap();
                assert_eq!(m.rank(), c1.len(), "p={p} k={k} l={l}");
            }
        }
    }
}

#[test]
fn tate_gram_is_symmetric_and_unimodular() {
    let mut count = 0;
    for (p, _, d) in generic_sums() {
        let cal = calibrate(field(p)).unwrap();
        let coh = herr_cohomology(&d, &LsdOptions::for_module(&d).schedule).unwrap();
        let g = tate_gram(&d, &psi_class_cocycles(&coh).unwrap(), &cal).unwrap();
        assert_eq!(g.transpose(), g);
        assert!(!d.ring().is_zero(g.determinant()));
        count += 1;
    }
    assert!(count >= 10);
}

#[test]
fn decomposable_sign_decomposition() {
    let mut count = 0;
    for (_, k, d) in generic_sums() {
        let sd = lsd_decompose(&d, &LsdOptions::for_module(&d)).unwrap();
        let r = d.ring();
        assert_eq!(sd.w_matrix.mul(&sd.w_matrix), localsign::linalg::Matrix::identity(r, 2));
        assert!(!r.is_zero(sd.cross_pairing));
        let b = sd.path_b.as_ref().unwrap();
        // H^1(omega^k mu) is the (-1)^k line
        assert_eq!(b.sub_label, if k % 2 == 0 { 1 } else { -1 });
        assert!(sd.agreement);
        count += 1;
    }
    assert!(count >= 10);
}

#[test]
fn nonsplit_sign_decomposition() {
    for (p, chars, x, r_sub) in nonsplit_specs() {
        let b = build_extension(p, chars, &x);
        let sd = lsd_decompose(&b.module, &LsdOptions { schedule: b.schedule.clone(), w_limit_n: b.w_limit_n }).unwrap();
        assert_eq!(sd.path_b.as_ref().unwrap().sub_label, nonsplit_label(chars, r_sub), "p={p} {chars:?}");
        assert!(sd.agreement);
    }
}

#[test]
fn anomalous_module_is_rejected() {
    let d = decomposable(3, 0, 1);
    assert!(matches!(lsd_decompose(&d, &LsdOptions::for_module(&d)), Err(PhiGammaError::NotGeneric(_))));
}

#[test]
fn w_star_contract_rank_one() {
    let r = field(3);
    for (k, l) in [(1, 2), (0, 2)] {
        check_w_star_contract(&PhiGammaModule::tame(r, k, r.from_int(l)).unwrap(), 20, false, 0, true);
    }
}

#[test]
fn w_star_contract_self_dual() {
    check_w_star_contract(&decomposable(3, 0, 2), 20, true, 0, true);
    let b = build_extension(3, [(2, 1), (2, 2)], &[(-1, 1), (0, 2)]);
    // each pass through w_* loses about p^n / 2 digits once the pole shift is positive
    check_w_star_contract(&b.module, 20, true, 1, false);
}

#[test]
fn w_star_contract_p5() {
    check_w_star_contract(&decomposable(5, 2, 3), 20, true, 0, false);
}

#[test]
fn w_star_rejects_non_psi_zero_input() {
    let d = decomposable(3, 0, 2);
    let x = d.monomial(0, 1, 40);
    assert!(matches!(w_star(&d, &x, 3, &[10, 10]), Err(PhiGammaError::Certificate(_))));
}
