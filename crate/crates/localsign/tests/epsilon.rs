use localsign::epsilon::{completed_epsilon, epsilon, InducedSelfDualSpec, SqrtChoice};
use localsign::padic_core::legendre;
use localsign::unit_characters::{
    anticyclotomic_characters, unit_group_for_order, ExtensionKind, PadicCharacter, QuadExtension, QuadInt,
};

fn characters(p: u64, kind: ExtensionKind, n: u32) -> Vec<PadicCharacter> {
    let ext = QuadExtension::new(p, kind).unwrap();
    let group = unit_group_for_order(&ext, n).unwrap();
    (0..=n).flat_map(|m| anticyclotomic_characters(&group, m).unwrap()).collect()
}

#[test]
fn twist_law_on_ramified_kinds() {
    for p in [3u64, 5, 7] {
        for kind in [ExtensionKind::RamifiedMinusP, ExtensionKind::RamifiedMinusPu] {
            for chi in characters(p, kind, 2).into_iter().filter(|c| c.conductor() > 0) {
                let spec = InducedSelfDualSpec::new(chi.clone(), 0, SqrtChoice::Plus);
                let e = epsilon(&spec).unwrap();
                for b in 1..p as i64 {
                    let eb = epsilon(&spec.with_character(chi.pow(b).unwrap())).unwrap();
                    assert_eq!(eb, legendre(b, p).unwrap() * e);
                }
            }
        }
    }
}

#[test]
fn shift_law_for_p_at_least_five() {
    for p in [5u64, 7] {
        for kind in [ExtensionKind::RamifiedMinusP, ExtensionKind::RamifiedMinusPu] {
            for chi in characters(p, kind, 3).into_iter().filter(|c| c.order() > p) {
                let conj = chi.pow_minus_delta_sq().unwrap();
                assert_eq!(conj.conductor() + 2, chi.conductor());
                for k in 0..3 {
                    let spec = InducedSelfDualSpec::new(chi.clone(), k, SqrtChoice::Plus);
                    assert_eq!(
                        completed_epsilon(&spec.with_character(conj.clone())).unwrap(),
                        completed_epsilon(&spec).unwrap()
                    );
                }
            }
        }
    }
}

/// Over `Q_3(sqrt(-6))`, `(1 - delta x)^6 = 1 - delta^3 x mod delta^4`, so
/// `chi^6(1 - delta x)` is `chi(1 + delta^3 x)^-1` on conductor 4 and the
/// shift flips epsilon.
#[test]
fn shift_flips_sign_on_conductor_four_over_q3_sqrt_minus_6() {
    let ext = QuadExtension::new(3, ExtensionKind::RamifiedMinusPu).unwrap();
    assert_eq!(ext.delta_sq, -6);
    let mut seen = 0;
    for chi in characters(3, ExtensionKind::RamifiedMinusPu, 2).into_iter().filter(|c| c.conductor() == 4) {
        let conj = chi.pow_minus_delta_sq().unwrap();
        assert_eq!(conj.conductor(), 2);
        let m = 3u64.pow(chi.level());
        for x in [1i64, 2] {
            let deep = chi.exponent_at(QuadInt::new(1, -6 * x)).unwrap();
            let shallow = conj.exponent_at(QuadInt::new(1, -x)).unwrap();
            assert_eq!((deep + shallow) % m, 0);
        }
        let spec = InducedSelfDualSpec::new(chi.clone(), 0, SqrtChoice::Plus);
        assert_eq!(epsilon(&spec.with_character(conj)).unwrap(), -epsilon(&spec).unwrap());
        seen += 1;
    }
    assert_eq!(seen, 6);
}
