//! Noncommutative operator polynomials, weighted principal parts and their
//! evaluation under characters and induced representations.

pub mod diffop;
pub mod induced;
pub mod ncpoly;

pub use diffop::{complexify, imaginary, DiffOp, SymbolOperator};
pub use induced::{induce_representation, vergne_polarization, InducedRep};
pub use ncpoly::{parse_nc, principal_part, weighted_order, NcPolynomial, PrincipalPart};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::filtration::WeightedGenerators;
use crate::osculating::{AlgebraElement, DualElement, Osculating};
use crate::polyfield::MultiPoly;
use crate::scalar::Rational;

/// Class `[X_j]_p` of every generator in the osculating basis. Generators
/// whose class vanishes map to zero.
pub fn letter_classes(gen: &WeightedGenerators, osc: &Osculating) -> Result<Vec<AlgebraElement<Rational>>> {
    gen.fields
        .iter()
        .zip(&gen.weights)
        .enumerate()
        .map(|(j, (f, &w))| {
            osc.analysis
                .class_of(f, w)
                .map(AlgebraElement::new)
                .ok_or_else(|| Error::Internal(format!("generator X{} has no class at weight {w}", j + 1)))
        })
        .collect()
}

/// One-dimensional representation `X_j ↦ i⟨ξ, [X_j]⟩`.
pub fn symbol_character(
    pp: &PrincipalPart,
    classes: &[AlgebraElement<Rational>],
    xi: &DualElement<Rational>,
) -> Complex<Rational> {
    let letters: Vec<Complex<Rational>> = classes.iter().map(|c| Complex::new(Rational::zero(), xi.pair(c))).collect();
    ncpoly::evaluate_commutative(pp, &letters)
}

/// Floating-point character value, for sampled covectors.
pub fn symbol_character_f64(pp: &PrincipalPart, classes: &[AlgebraElement<Rational>], xi: &DualElement<f64>) -> Complex<f64> {
    let letters: Vec<Complex<f64>> = classes
        .iter()
        .map(|c| {
            let v: f64 = c.coords.iter().zip(&xi.coords).map(|(a, b)| crate::scalar::rational_to_f64(a) * b).sum();
            Complex::new(0.0, v)
        })
        .collect();
    ncpoly::evaluate_commutative(pp, &letters)
}

/// `σ(D, p, π)`: each monomial with every letter replaced by `dπ([X_j])`.
pub fn realize_symbol(pp: &PrincipalPart, classes: &[AlgebraElement<Rational>], rep: &InducedRep) -> SymbolOperator {
    let q = rep.q();
    let letters: Vec<SymbolOperator> = classes.iter().map(|c| rep.act(c)).collect();
    let mut out = SymbolOperator::zero(q);
    for (w, c) in &pp.monomials {
        let mut term = SymbolOperator::multiplication(MultiPoly::constant(q, Complex::new(c.clone(), Rational::zero())));
        for &j in w {
            if term.is_zero() {
                break;
            }
            term = term.compose(&letters[j]);
        }
        out = out.add(&term);
    }
    out
}

/// Exact cone coordinates `ξ_k = t^{w_k} ⟨η, B_k(x)⟩` at rational parameters.
pub fn exact_pairing(osc: &Osculating, x: &[Rational], eta: &[Rational], t: &Rational) -> Result<DualElement<Rational>> {
    let mut coords = Vec::with_capacity(osc.analysis.basis.len());
    for b in &osc.analysis.basis {
        let v = b.field.eval(x)?;
        let mut s = Rational::one();
        for _ in 0..b.weight {
            s *= t;
        }
        let dot: Rational = v.iter().zip(eta).map(|(a, e)| a * e).sum();
        coords.push(s * dot);
    }
    Ok(DualElement::new(coords))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::osculating::osculating_at;
    use crate::polyfield::parse_field;
    use crate::scalar::int;

    fn counter_b() -> (WeightedGenerators, Osculating) {
        let f = ["x^2*dx", "dx", "x*dx"].iter().map(|s| parse_field(s, 1).unwrap()).collect();
        let g = WeightedGenerators::new(f, vec![1, 3, 2], 3).unwrap();
        let o = osculating_at(&g, &[int(0)], None).unwrap();
        (g, o)
    }

    #[test]
    fn presentations_differ_off_the_cone() {
        let (g, o) = counter_b();
        let cls = letter_classes(&g, &o).unwrap();
        let a = principal_part(&parse_nc("X1*X2 - X3*X3", &g).unwrap(), &[int(0)]).unwrap();
        let b = principal_part(&parse_nc("-X3", &g).unwrap(), &[int(0)]).unwrap().at_order(4).unwrap();
        let xi = DualElement::new(vec![int(1), int(0), int(1)]);
        assert_eq!(symbol_character(&a, &cls, &xi), Complex::new(int(-1), int(0)));
        assert!(symbol_character(&b, &cls, &xi).is_zero());
        let on = DualElement::new(vec![int(1), int(2), int(4)]);
        assert!(symbol_character(&a, &cls, &on).is_zero());
    }
}
