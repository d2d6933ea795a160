use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use semistrata::arith::{fmat, Field, FieldSpec, StepKind};
use semistrata::forms::HermForm;
use semistrata::lattices::LatticeSeq;
use semistrata::selftest::random_u1;
use semistrata::strata::orders::psi_f;

fn q3() -> Field {
    Field::qp(3, 24).unwrap()
}

fn ramified() -> Field {
    Field::new(&FieldSpec::qp(3).step(StepKind::Eisenstein, &[-3, 0, 1]).conjugate(None), Some(24)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_field_axioms(a in -500i64..500, b in 1i64..500, c in -500i64..500, d in 1i64..500) {
        let f = q3();
        prop_assume!(a % 3 != 0 || a == 0);
        let x = f.rational(a, b).unwrap();
        let y = f.rational(c, d).unwrap();
        prop_assert!(x.add(&y).sub(&y).sub(&x).is_zero());
        prop_assert!(x.mul(&y).sub(&y.mul(&x)).is_zero());
        if !y.is_zero() {
            prop_assert!(x.mul(&y).div(&y).unwrap().sub(&x).is_zero());
        }
        // a/b + c/d = (ad + bc)/bd
        let z = f.rational(a * d + b * c, b * d).unwrap();
        prop_assert!(x.add(&y).sub(&z).is_zero());
    }

    #[test]
    fn psi_is_additive(a in -2000i64..2000, b in -2000i64..2000, k in 0i64..4) {
        let f = q3();
        let s = f.pi_pow(-k);
        let x = f.int(a).mul(&s);
        let y = f.int(b).mul(&s);
        let lhs = psi_f(&x.add(&y)).unwrap();
        let rhs = psi_f(&x).unwrap().add(&psi_f(&y).unwrap());
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(psi_f(&f.int(3 * a)).unwrap().num, 0);
    }

    #[test]
    fn norm_is_multiplicative(a in -50i64..50, b in -50i64..50, c in -50i64..50, d in -50i64..50) {
        let f = ramified();
        let g = f.generator(0);
        let x = f.int(a).add(&f.int(b).mul(&g));
        let y = f.int(c).add(&f.int(d).mul(&g));
        let q = Field::qp(3, 24).unwrap();
        let lhs = x.mul(&y).norm_to(&q).unwrap();
        let rhs = x.norm_to(&q).unwrap().mul(&y.norm_to(&q).unwrap());
        prop_assert!(lhs.sub(&rhs).is_zero());
    }

    #[test]
    fn cayley_outputs_are_isometries_in_u1(seed in any::<u64>()) {
        let f = ramified();
        let h = HermForm::new(&f, -1, fmat::from_ints(&f, &[&[0, 0, 0, 1], &[0, 0, 1, 0], &[0, -1, 0, 0], &[-1, 0, 0, 0]])).unwrap();
        let lat = LatticeSeq::standard(&f, vec![0, 1, 2, 3], 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_u1(&h, &lat, &mut rng).unwrap();
        prop_assert!(h.is_isometry(&u));
        prop_assert!(lat.contains_in_filtration(&u.sub(&fmat::identity(&f, 4)), 1));
    }

    #[test]
    fn nu_is_submultiplicative(e in prop::collection::vec(-9i64..10, 8)) {
        let f = q3();
        let lat = LatticeSeq::standard(&f, vec![0, 1], 2).unwrap();
        let m = |o: usize| fmat::from_ints(&f, &[&[e[o], e[o + 1]], &[e[o + 2], e[o + 3]]]);
        let (x, y) = (m(0), m(4));
        if let (Some(a), Some(b), Some(c)) = (lat.nu(&x), lat.nu(&y), lat.nu(&x.mul(&y))) {
            prop_assert!(c >= a + b);
        }
    }
}
