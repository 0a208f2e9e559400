use hypocalc::osculating::{free_nilpotent, AlgebraElement, BchConvention, DualElement, GradedLieAlgebra};
use hypocalc::scalar::rat;
use hypocalc::Rational;
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

fn element(d: usize) -> impl Strategy<Value = AlgebraElement<Rational>> {
    prop::collection::vec(small_rational(), d).prop_map(AlgebraElement::new)
}

fn suite() -> Vec<(&'static str, GradedLieAlgebra)> {
    vec![
        ("heisenberg", GradedLieAlgebra::heisenberg()),
        ("engel", GradedLieAlgebra::engel()),
        ("free_2_step_4", free_nilpotent(&[1, 1], 4).unwrap().algebra),
        ("free_3_step_3", free_nilpotent(&[1, 1, 1], 3).unwrap().algebra),
    ]
}

#[test]
fn suite_satisfies_jacobi_and_grading() {
    for (name, g) in suite() {
        assert!(g.check_jacobi(), "{name}");
        assert!(g.check_grading(), "{name}");
    }
    assert_eq!(free_nilpotent(&[1, 1], 4).unwrap().algebra.dim(), 8);
    assert_eq!(free_nilpotent(&[1, 1, 1], 3).unwrap().algebra.dim(), 14);
}

fn triple(d: usize) -> impl Strategy<Value = (AlgebraElement<Rational>, AlgebraElement<Rational>, AlgebraElement<Rational>)> {
    (element(d), element(d), element(d))
}

macro_rules! algebra_props {
    ($module:ident, $algebra:expr) => {
        mod $module {
            use super::*;

            fn g() -> GradedLieAlgebra {
                $algebra
            }

            proptest! {
                #![proptest_config(ProptestConfig::with_cases(24))]

                #[test]
                fn bch_is_associative((x, y, z) in triple(g().dim())) {
                    let g = g();
                    let left = g.bch(&g.bch(&x, &y), &z);
                    let right = g.bch(&x, &g.bch(&y, &z));
                    prop_assert_eq!(left, right);
                }

                #[test]
                fn bch_inverse_and_identity((x, _y, _z) in triple(g().dim())) {
                    let g = g();
                    let zero = AlgebraElement::zero(g.dim());
                    prop_assert_eq!(g.bch(&x, &x.scale(&rat(-1, 1))), zero.clone());
                    prop_assert_eq!(g.bch(&x, &zero), x.clone());
                    prop_assert_eq!(g.bch(&zero, &x), x);
                }

                #[test]
                fn bracket_jacobi_on_elements((x, y, z) in triple(g().dim())) {
                    let g = g();
                    let a = g.bracket(&x, &g.bracket(&y, &z));
                    let b = g.bracket(&y, &g.bracket(&z, &x));
                    let c = g.bracket(&z, &g.bracket(&x, &y));
                    prop_assert!(a.add(&b).add(&c).is_zero());
                    prop_assert_eq!(g.bracket(&x, &y), g.bracket(&y, &x).scale(&rat(-1, 1)));
                }

                #[test]
                fn dilation_is_an_automorphism((x, y, _z) in triple(g().dim()), lam in small_rational()) {
                    let g = g();
                    let d = |v: &AlgebraElement<Rational>| g.dilate(&lam, v);
                    prop_assert_eq!(d(&g.bracket(&x, &y)), g.bracket(&d(&x), &d(&y)));
                    prop_assert_eq!(d(&g.bch(&x, &y)), g.bch(&d(&x), &d(&y)));
                }

                #[test]
                fn coadjoint_action_is_a_group_action((x, y, _z) in triple(g().dim()), xi in element(g().dim())) {
                    let g = g();
                    let xi = DualElement::new(xi.coords);
                    let composed = g.coadjoint(&x, &g.coadjoint(&y, &xi));
                    // default product is log(e^y e^x)
                    let direct = g.coadjoint(&g.bch(&y, &x), &xi);
                    prop_assert_eq!(&composed, &direct);
                    let left = g.coadjoint(&g.bch_with(&x, &y, BchConvention::LeftInvariant), &xi);
                    prop_assert_eq!(composed, left);
                    // ⟨Ad*_a ξ, Ad_a v⟩ = ⟨ξ, v⟩
                    let moved = g.adjoint(&x, &y);
                    prop_assert_eq!(g.coadjoint(&x, &xi).pair(&moved), xi.pair(&y));
                }
            }
        }
    };
}

algebra_props!(heisenberg, GradedLieAlgebra::heisenberg());
algebra_props!(engel, GradedLieAlgebra::engel());
algebra_props!(free_2_step_4, free_nilpotent(&[1, 1], 4).unwrap().algebra);
