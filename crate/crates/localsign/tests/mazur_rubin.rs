mod common;

use common::{lift, module_spec as module, pair};
use localsign::lagrangian_mr::{anomalous_split_check, mr_compatibility, MrError, PairSpec};
use localsign::padic_core::Ring;
use localsign::phigamma::ModuleSpec;

// p = 3, generator 2: mu_2 = (2, 1), omega mu_2 = (2, 2), omega = (1, 2)
fn sum3() -> ModuleSpec {
    module(3, "sum", [(2, 1), (2, 2)], &[])
}
fn sum3_swapped() -> ModuleSpec {
    module(3, "sum", [(2, 2), (2, 1)], &[])
}
fn ext3(x: &[(i64, u64)]) -> ModuleSpec {
    module(3, "extension", [(2, 1), (2, 2)], x)
}
fn ext3_omega() -> ModuleSpec {
    module(3, "extension", [(1, 2), (1, 1)], &[(-1, 1), (0, 2)])
}

fn check(pair: &PairSpec, delta: u8) {
    let rep = mr_compatibility(pair).unwrap();
    assert_eq!(rep.delta, delta, "{rep:?}");
    assert_eq!(rep.delta_path_a, rep.delta);
    assert!(rep.holds, "{rep:?}");
}

#[test]
fn identical_lifts_have_delta_zero() {
    let m = sum3();
    let rep = mr_compatibility(&pair(lift(&m, 1, 1, false), lift(&m, 1, 1, false), None)).unwrap();
    assert_eq!((rep.delta, rep.epsilon_ratio), (0, 1));
    assert!(rep.holds);
}

#[test]
fn decomposable_pairs() {
    let m = sum3();
    check(&pair(lift(&m, 1, 1, false), lift(&m, 2, 2, false), None), 1);
    check(&pair(lift(&m, 1, 1, false), lift(&m, 1, 3, false), None), 0);
    check(&pair(lift(&m, 2, 1, false), lift(&m, 2, 4, false), None), 0);
    check(&pair(lift(&m, 2, 3, false), lift(&m, 1, 2, false), None), 1);
}

#[test]
fn swapped_summands_through_identification() {
    let (m, s) = (sum3(), sum3_swapped());
    let swap = Some(vec![vec![0, 1], vec![1, 0]]);
    check(&pair(lift(&m, 1, 1, false), lift(&s, 1, 1, false), swap.clone()), 1);
    check(&pair(lift(&m, 1, 1, false), lift(&s, 2, 1, false), swap), 0);
}

#[test]
fn nonsplit_pairs() {
    let x = [(-1, 1), (0, 2)];
    let m = ext3(&x);
    check(&pair(lift(&m, 1, 1, false), lift(&m, 1, 2, false), None), 0);
    // doubling the extension class is the same module up to e2 -> 2 e2
    let doubled = ext3(&[(-1, 2), (0, 1)]);
    check(&pair(lift(&m, 1, 1, false), lift(&doubled, 1, 3, false), Some(vec![vec![1, 0], vec![0, 2]])), 0);
}

#[test]
fn sub_omega_crystalline_against_semistable() {
    let m = ext3_omega();
    let rep = mr_compatibility(&pair(lift(&m, 1, 1, false), lift(&m, 1, 1, true), None)).unwrap();
    assert_eq!(rep.lifts[0].completed_epsilon, 1);
    assert_eq!(rep.lifts[1].completed_epsilon, -1);
    assert_eq!(rep.delta, 1);
    assert!(rep.holds);
}

#[test]
fn p5_decomposable_pair() {
    // generator 2: omega^r mu_l = (l, 2^r)
    let m = module(5, "sum", [(2, 4), (3, 3)], &[]);
    check(&pair(lift(&m, 1, 2, false), lift(&m, 2, 1, false), None), 1);
}

#[test]
fn anomalous_split_sign_law() {
    for p in [3, 5, 7] {
        let rep = anomalous_split_check(Ring::field(p, 1).unwrap()).unwrap();
        assert_eq!((rep.delta, rep.completed_epsilon), (1, 1), "{rep:?}");
        assert!(rep.holds);
    }
}

#[test]
fn rejects_mismatched_residuals() {
    let (m, s) = (sum3(), sum3_swapped());
    let err = mr_compatibility(&pair(lift(&m, 1, 1, false), lift(&s, 1, 1, false), None)).unwrap_err();
    assert!(matches!(err, MrError::ResidualMismatch(_)), "{err}");
    let err = mr_compatibility(&pair(lift(&m, 1, 1, true), lift(&m, 1, 1, false), None)).unwrap_err();
    assert!(matches!(err, MrError::BadLift(_)), "{err}");
    assert!(matches!(PairSpec::from_json("{\"first\": 1}"), Err(MrError::Spec(_))));
}
