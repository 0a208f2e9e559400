use hypocalc::filtration::WeightedGenerators;
use hypocalc::osculating::{free_nilpotent, osculating_at, DualElement, GradedLieAlgebra};
use hypocalc::polyfield::{parse_field, MultiPoly};
use hypocalc::rockland::{
    grushin_model, grushin_symbol, hypoellipticity_verdict, injectivity_test, spectrum_1d, CritBasis, CritOptions, Injectivity,
    DEFAULT_LADDER,
};
use hypocalc::scalar::{int, rat};
use hypocalc::symbols::induced::verify;
use hypocalc::symbols::{
    complexify, induce_representation, letter_classes, parse_nc, principal_part, realize_symbol, symbol_character, SymbolOperator,
};
use hypocalc::Rational;
use num_complex::Complex;
use num_traits::Zero;
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

fn functional(d: usize) -> impl Strategy<Value = DualElement<Rational>> {
    prop::collection::vec(small_rational(), d).prop_map(DualElement::new)
}

/// Rank of `B_ℓ(e_i, e_j) = ℓ([e_i, e_j])` by exact elimination.
fn form_rank(g: &GradedLieAlgebra, l: &DualElement<Rational>) -> usize {
    let d = g.dim();
    let mut m: Vec<Vec<Rational>> = (0..d)
        .map(|i| {
            (0..d).map(|j| g.bracket_basis(i, j).iter().fold(Rational::zero(), |acc, (k, c)| acc + c * &l.coords[*k])).collect()
        })
        .collect();
    let mut rank = 0;
    for col in 0..d {
        let Some(p) = (rank..d).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(rank, p);
        for r in 0..d {
            if r != rank && !m[r][col].is_zero() {
                let f = &m[r][col] / &m[rank][col];
                let pivot = m[rank].clone();
                for (a, b) in m[r].iter_mut().zip(&pivot) {
                    *a -= &f * b;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn symbol_presentations() -> (WeightedGenerators, hypocalc::osculating::Osculating) {
    let f = ["x^2*dx", "dx", "x*dx"].iter().map(|s| parse_field(s, 1).unwrap()).collect();
    let g = WeightedGenerators::new(f, vec![1, 3, 2], 3).unwrap();
    let o = osculating_at(&g, &[int(0)], None).unwrap();
    (g, o)
}

fn oscillator(shift: i64) -> SymbolOperator {
    let one = Complex::new(int(1), Rational::zero());
    SymbolOperator::term(vec![2], MultiPoly::constant(1, -one.clone()))
        .add(&SymbolOperator::multiplication(complexify(&MultiPoly::var(1, 0).pow(2))))
        .add(&SymbolOperator::multiplication(MultiPoly::constant(1, one.scale(int(shift)))))
}

macro_rules! induced_props {
    ($name:ident, $algebra:expr) => {
        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn $name(l in functional($algebra.dim())) {
                let g = $algebra;
                let rep = induce_representation(&g, &l).unwrap();
                prop_assert!(verify(&rep).is_ok());
                // half the dimension of the coadjoint orbit
                prop_assert_eq!(2 * rep.q(), form_rank(&g, &l));
            }
        }
    };
}

induced_props!(heisenberg_reps_are_unitary_with_orbit_dimension, GradedLieAlgebra::heisenberg());
induced_props!(engel_reps_are_unitary_with_orbit_dimension, GradedLieAlgebra::engel());
induced_props!(free_step_3_reps_are_unitary_with_orbit_dimension, free_nilpotent(&[1, 1], 3).unwrap().algebra);

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn characters_are_homogeneous_of_the_weighted_order(xi in functional(3), lam in small_rational()) {
        let (g, o) = symbol_presentations();
        let cls = letter_classes(&g, &o).unwrap();
        let pp = principal_part(&parse_nc("X1*X2 - X3*X3", &g).unwrap(), &[int(0)]).unwrap();
        let scaled = o.algebra.dilate_dual(&lam, &xi);
        let l4 = &lam * &lam * &lam * &lam;
        prop_assert_eq!(symbol_character(&pp, &cls, &scaled), symbol_character(&pp, &cls, &xi) * Complex::new(l4, Rational::zero()));
    }

    #[test]
    fn characters_are_multiplicative(xi in functional(3)) {
        let (g, o) = symbol_presentations();
        let cls = letter_classes(&g, &o).unwrap();
        let a = principal_part(&parse_nc("X1*X2 - X3*X3", &g).unwrap(), &[int(0)]).unwrap();
        let b = principal_part(&parse_nc("X3 + X1*X1", &g).unwrap(), &[int(0)]).unwrap();
        prop_assert_eq!(
            symbol_character(&a.mul(&b), &cls, &xi),
            symbol_character(&a, &cls, &xi) * symbol_character(&b, &cls, &xi)
        );
    }

    #[test]
    fn presentations_agree_on_the_parabola(s in small_rational(), u in small_rational()) {
        // (s, s u, s u²) satisfies ξ₁ξ₃ = ξ₂² in the basis order X1, X3, X2
        let (g, o) = symbol_presentations();
        let cls = letter_classes(&g, &o).unwrap();
        let a = principal_part(&parse_nc("X1*X2 - X3*X3", &g).unwrap(), &[int(0)]).unwrap();
        let b = principal_part(&parse_nc("-X3", &g).unwrap(), &[int(0)]).unwrap().at_order(4).unwrap();
        let xi = DualElement::new(vec![s.clone(), &s * &u, &s * &u * &u]);
        prop_assert!(symbol_character(&a, &cls, &xi).is_zero());
        prop_assert!(symbol_character(&b, &cls, &xi).is_zero());
    }
}

#[test]
fn character_equals_trivial_orbit_realization() {
    let (g, o) = symbol_presentations();
    let cls = letter_classes(&g, &o).unwrap();
    let pp = principal_part(&parse_nc("X1*X2 - X3*X3", &g).unwrap(), &[int(0)]).unwrap();
    let xi = DualElement::new(vec![int(2), int(-1), int(3)]);
    let rep = induce_representation(&o.algebra, &xi).unwrap();
    assert_eq!(rep.q(), 0);
    let realized = realize_symbol(&pp, &cls, &rep);
    assert_eq!(realized, SymbolOperator::multiplication(MultiPoly::constant(0, symbol_character(&pp, &cls, &xi))));
}

#[test]
fn oscillator_spectrum_at_64() {
    let r = spectrum_1d(&oscillator(0), 5, 64, 1e-8).unwrap();
    assert!(r.converged);
    for (i, e) in r.eigenvalues.iter().enumerate() {
        assert!((e - (2 * i + 1) as f64).abs() < 1e-8, "{i}: {e}");
    }
}

#[test]
fn shifted_oscillator_loses_injectivity() {
    let ok = injectivity_test(&oscillator(0), &DEFAULT_LADDER, 1e-6).unwrap();
    assert_eq!(ok.verdict, Injectivity::Injective);
    assert!(ok.smallest_singular_values.iter().all(|s| (s - 1.0).abs() < 1e-9));
    let bad = injectivity_test(&oscillator(-3), &DEFAULT_LADDER, 1e-6).unwrap();
    assert_eq!(bad.verdict, Injectivity::NotInjective);
    assert!(bad.residual.unwrap() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn beta_rescales_the_spectrum(n in 2i64..=6, d in 2i64..=6) {
        // y ↦ β^{-1/2} y conjugates ∂⁴ + β⁴y⁴ to β²(∂⁴ + y⁴)
        let beta = rat(n, d);
        let b2 = (n * n) as f64 / (d * d) as f64;
        let scaled = spectrum_1d(&grushin_symbol(1, 1, &beta, Complex::zero()), 3, 128, 1e-6).unwrap();
        let model = spectrum_1d(&grushin_model(1, 1), 3, 128, 1e-6).unwrap();
        for (a, b) in scaled.eigenvalues.iter().zip(&model.eigenvalues) {
            prop_assert!((a / b2 - b).abs() < 1e-6 * b, "{} vs {}", a / b2, b);
        }
    }
}

#[test]
fn model_verdicts_at_zero_eigenvalue_and_gap() {
    let opts = CritOptions::default();
    let spec = spectrum_1d(&grushin_model(1, 1), 2, 128, 1e-6).unwrap();
    let (l1, l2) = (spec.eigenvalues[0], spec.eigenvalues[1]);
    let at = |x: f64| hypoellipticity_verdict(1, 1, Complex::new(x, 0.0), &opts).unwrap();
    let zero = at(0.0);
    assert_eq!((zero.hypoelliptic, zero.basis), (Some(true), CritBasis::Gap));
    let eig = at(l1);
    assert_eq!((eig.hypoelliptic, eig.basis), (Some(false), CritBasis::Eigenvalue));
    let gap = at(0.5 * (l1 + l2));
    assert_eq!(gap.hypoelliptic, Some(true));
    assert!(zero.beta_invariant && eig.beta_invariant && gap.beta_invariant);
    // the model is positive, so negative λ lies below its spectrum
    assert_eq!(at(-l1).hypoelliptic, Some(true));
}
