use localsign::padic_core::{padic_binomial, Coeff, Ring, RingElement};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_coeff(rng: &mut ChaCha8Rng, r: &Ring) -> Coeff {
    let n = r.modulus();
    let b = if r.f() == 2 { rng.random_range(0..n) } else { 0 };
    Coeff([rng.random_range(0..n), b])
}

#[test]
fn ring_axioms_randomized() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rings = [
        Ring::residue(3, 5).unwrap(),
        Ring::residue(7, 3).unwrap(),
        Ring::field(5, 1).unwrap(),
        Ring::field(3, 2).unwrap(),
        Ring::field(13, 2).unwrap(),
        Ring::new(5, 3, 2).unwrap(),
    ];
    for r in rings {
        for _ in 0..10_000 {
            let (a, b, c) = (random_coeff(&mut rng, &r), random_coeff(&mut rng, &r), random_coeff(&mut rng, &r));
            assert_eq!(r.mul(r.mul(a, b), c), r.mul(a, r.mul(b, c)), "associativity in {r}");
            assert_eq!(r.mul(a, r.add(b, c)), r.add(r.mul(a, b), r.mul(a, c)), "distributivity in {r}");
            assert_eq!(r.mul(a, b), r.mul(b, a));
            assert_eq!(r.add(a, r.neg(a)), r.zero());
            if let Some(ai) = r.inv(a) {
                assert_eq!(r.mul(a, ai), r.one());
            } else {
                assert!(!r.is_unit(a));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn pascal_recurrence(p in prop::sample::select(vec![3u64, 5, 7]), m in 2u32..6, a in 0i64..100_000, k in 1u64..30) {
        let big = RingElement::residue(p, m, a).unwrap();
        let prev = RingElement::residue(p, m, a - 1).unwrap();
        let lhs = padic_binomial(&big, k);
        let r1 = padic_binomial(&prev, k - 1);
        let r2 = padic_binomial(&prev, k);
        if let (Ok(lhs), Ok(r1), Ok(r2)) = (lhs, r1, r2) {
            let common = lhs.precision().min(r1.precision()).min(r2.precision());
            let sum = r1.reduce(common).unwrap() + r2.reduce(common).unwrap();
            prop_assert_eq!(lhs.reduce(common).unwrap(), sum);
        }
    }

    #[test]
    fn binomial_matches_integer_formula(p in prop::sample::select(vec![3u64, 5, 7]), a in 0i64..60, k in 0u64..12) {
        let m = 4;
        let x = RingElement::residue(p, m, a).unwrap();
        if let Ok(c) = padic_binomial(&x, k) {
            let mut exact: i128 = 1;
            for i in 0..k as i128 {
                exact = exact * (a as i128 - i) / (i + 1);
            }
            let n = c.ring().modulus() as i128;
            prop_assert_eq!(c.value() as i128, exact.rem_euclid(n));
        }
    }
}
