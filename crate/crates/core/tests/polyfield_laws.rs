use hypocalc::polyfield::{parse_field, parse_poly, Monomial, MultiPoly, VectorField};
use hypocalc::scalar::rat;
use hypocalc::{Poly, PolyVectorField, Rational};
use proptest::prelude::*;

const NVARS: usize = 2;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-5i64..=5, 1i64..=3).prop_map(|(n, d)| rat(n, d))
}

fn poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec(((0u32..=3, 0u32..=3), small_rational()), 0..5)
        .prop_map(|terms| MultiPoly::from_terms(NVARS, terms.into_iter().map(|((a, b), c)| (Monomial(vec![a, b]), c))))
}

fn field() -> impl Strategy<Value = PolyVectorField> {
    (poly(), poly()).prop_map(|(a, b)| VectorField::new(vec![a, b]).unwrap())
}

fn point() -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(small_rational(), NVARS)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_laws(p in poly(), q in poly(), r in poly()) {
        prop_assert_eq!(p.add(&q), q.add(&p));
        prop_assert_eq!(p.mul(&q), q.mul(&p));
        prop_assert_eq!(p.mul(&q).mul(&r), p.mul(&q.mul(&r)));
        prop_assert_eq!(p.mul(&q.add(&r)), p.mul(&q).add(&p.mul(&r)));
        prop_assert!(p.sub(&p).is_zero());
    }

    #[test]
    fn evaluation_is_a_homomorphism(p in poly(), q in poly(), x in point()) {
        prop_assert_eq!(p.mul(&q).eval(&x), p.eval(&x) * q.eval(&x));
        prop_assert_eq!(p.add(&q).eval(&x), p.eval(&x) + q.eval(&x));
    }

    #[test]
    fn recentering_shifts_the_argument(p in poly(), c in point(), x in point()) {
        let shifted: Vec<Rational> = x.iter().zip(&c).map(|(a, b)| a - b).collect();
        prop_assert_eq!(p.recenter(&c).eval(&shifted), p.eval(&x));
    }

    #[test]
    fn fields_act_as_derivations(v in field(), f in poly(), g in poly()) {
        prop_assert_eq!(v.apply(&f.mul(&g)), v.apply(&f).mul(&g).add(&f.mul(&v.apply(&g))));
    }

    #[test]
    fn bracket_is_the_commutator(v in field(), w in field(), f in poly()) {
        let b = v.bracket(&w).unwrap();
        prop_assert_eq!(b.apply(&f), v.apply(&w.apply(&f)).sub(&w.apply(&v.apply(&f))));
    }

    #[test]
    fn bracket_antisymmetry_and_jacobi(u in field(), v in field(), w in field()) {
        let br = |a: &PolyVectorField, b: &PolyVectorField| a.bracket(b).unwrap();
        prop_assert_eq!(br(&u, &v), br(&v, &u).neg());
        let j = br(&u, &br(&v, &w)).add(&br(&v, &br(&w, &u))).add(&br(&w, &br(&u, &v)));
        prop_assert!(j.is_zero());
    }

    #[test]
    fn bracket_is_bilinear_over_constants(u in field(), v in field(), w in field(), s in small_rational()) {
        let br = |a: &PolyVectorField, b: &PolyVectorField| a.bracket(b).unwrap();
        prop_assert_eq!(br(&u.scale(&s).add(&v), &w), br(&u, &w).scale(&s).add(&br(&v, &w)));
    }
}

#[test]
fn parser_agrees_with_constructors() {
    let f = parse_field("x*dy + (1/2)*y^2*dx", 2).unwrap();
    let x = MultiPoly::var(2, 0);
    let y = MultiPoly::var(2, 1);
    let expected = VectorField::new(vec![y.mul(&y).scale(&rat(1, 2)), x]).unwrap();
    assert_eq!(f, expected);
    assert_eq!(parse_poly("(x + y)^2", 2).unwrap(), parse_poly("x^2 + 2*x*y + y^2", 2).unwrap());
    assert!(parse_field("x*dz", 2).is_err());
}

#[test]
fn heisenberg_fields_bracket_to_the_center() {
    let x = parse_field("dx", 3).unwrap();
    let y = parse_field("dy + x*dz", 3).unwrap();
    assert_eq!(x.bracket(&y).unwrap(), parse_field("dz", 3).unwrap());
}
