//! Noncommutative operator polynomials `Σ c(x) X_{i₁}⋯X_{i_k}` in weighted
//! generators, with coefficients written on the left.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::filtration::WeightedGenerators;
use crate::polyfield::parse::{coordinate_index, parse_with, Grammar};
use crate::polyfield::{MultiPoly, VectorField};
use crate::scalar::{Rational, Ring};
use crate::Poly;

#[derive(Clone, Debug, PartialEq)]
pub struct NcPolynomial {
    /// Base manifold dimension.
    pub dim: usize,
    pub weights: Vec<u32>,
    /// Letters → coefficient. Never holds zero coefficients.
    terms: BTreeMap<Vec<usize>, Poly>,
}

impl NcPolynomial {
    pub fn zero(dim: usize, weights: Vec<u32>) -> Self {
        NcPolynomial { dim, weights, terms: BTreeMap::new() }
    }

    pub fn function(dim: usize, weights: Vec<u32>, c: Poly) -> Self {
        let mut out = Self::zero(dim, weights);
        out.add_term(Vec::new(), c);
        out
    }

    pub fn letter(dim: usize, weights: Vec<u32>, j: usize) -> Self {
        let mut out = Self::zero(dim, weights);
        out.add_term(vec![j], MultiPoly::constant(dim, Rational::from_integer(1.into())));
        out
    }

    pub fn from_terms(dim: usize, weights: Vec<u32>, terms: impl IntoIterator<Item = (Vec<usize>, Poly)>) -> Result<Self> {
        let mut out = Self::zero(dim, weights);
        for (w, c) in terms {
            if let Some(&j) = w.iter().find(|&&j| j >= out.weights.len()) {
                return Err(Error::InvalidInput(format!("letter X{} out of range", j + 1)));
            }
            if c.nvars() != dim {
                return Err(Error::DimensionMismatch("coefficient on the wrong number of variables".into()));
            }
            out.add_term(w, c);
        }
        Ok(out)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Poly)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, w: Vec<usize>, c: Poly) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&w) {
            Some(old) => old.add(&c),
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(w, sum);
        }
    }

    pub fn word_weight(&self, w: &[usize]) -> u32 {
        w.iter().map(|&j| self.weights[j]).sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, q: &Rational) -> Self {
        let mut out = Self::zero(self.dim, self.weights.clone());
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c.scale(q));
        }
        out
    }

    /// Operator product, moving coefficients left with `X∘f = f X + X(f)`.
    pub fn mul(&self, other: &Self, generators: &[VectorField<Rational>]) -> Self {
        let mut out = Self::zero(self.dim, self.weights.clone());
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                for (f, mut w) in push_left(w1, c2, generators) {
                    w.extend_from_slice(w2);
                    out.add_term(w, c1.mul(&f));
                }
            }
        }
        out
    }

    /// The operator on polynomials it denotes, applied to `f`.
    pub fn apply(&self, generators: &[VectorField<Rational>], f: &Poly) -> Poly {
        let mut out = MultiPoly::zero(self.dim);
        for (w, c) in &self.terms {
            let mut g = f.clone();
            for &j in w.iter().rev() {
                g = generators[j].apply(&g);
            }
            out = out.add(&c.mul(&g));
        }
        out
    }

    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, c)| {
                let letters: Vec<String> = w.iter().map(|j| format!("X{}", j + 1)).collect();
                match (w.is_empty(), c.is_one()) {
                    (true, _) => format!("({c})"),
                    (false, true) => letters.join("*"),
                    (false, false) => format!("({c})*{}", letters.join("*")),
                }
            })
            .collect();
        parts.join(" + ")
    }
}

/// Rewrites `X_w ∘ f` as `Σ g_i X_{w_i}`.
fn push_left(word: &[usize], f: &Poly, generators: &[VectorField<Rational>]) -> Vec<(Poly, Vec<usize>)> {
    if f.is_zero() {
        return Vec::new();
    }
    let Some((&last, prefix)) = word.split_last() else {
        return vec![(f.clone(), Vec::new())];
    };
    let mut out: Vec<(Poly, Vec<usize>)> = push_left(prefix, f, generators)
        .into_iter()
        .map(|(g, mut w)| {
            w.push(last);
            (g, w)
        })
        .collect();
    out.extend(push_left(prefix, &generators[last].apply(f), generators));
    out
}

struct NcGrammar<'a> {
    gen: &'a WeightedGenerators,
}

impl Grammar for NcGrammar<'_> {
    type Value = NcPolynomial;

    fn number(&self, q: Rational) -> NcPolynomial {
        let d = self.gen.dim();
        NcPolynomial::function(d, self.gen.weights.clone(), MultiPoly::constant(d, q))
    }

    fn name(&self, name: &str) -> std::result::Result<NcPolynomial, String> {
        let d = self.gen.dim();
        if let Some(i) = coordinate_index(name, d) {
            return Ok(NcPolynomial::function(d, self.gen.weights.clone(), MultiPoly::var(d, i)));
        }
        if let Some(j) = name.strip_prefix('X').and_then(|r| r.parse::<usize>().ok()) {
            if (1..=self.gen.fields.len()).contains(&j) {
                return Ok(NcPolynomial::letter(d, self.gen.weights.clone(), j - 1));
            }
            return Err(format!("generator {name} out of range 1..={}", self.gen.fields.len()));
        }
        Err(format!("unknown name '{name}'"))
    }

    fn add(&self, a: NcPolynomial, b: NcPolynomial) -> std::result::Result<NcPolynomial, String> {
        Ok(a.add(&b))
    }

    fn mul(&self, a: NcPolynomial, b: NcPolynomial) -> std::result::Result<NcPolynomial, String> {
        Ok(a.mul(&b, &self.gen.fields))
    }

    fn scale(&self, a: NcPolynomial, q: &Rational) -> NcPolynomial {
        a.scale(q)
    }

    fn as_constant(&self, a: &NcPolynomial) -> Option<Rational> {
        if a.terms.is_empty() {
            return Some(Rational::zero());
        }
        match a.terms.iter().next() {
            Some((w, c)) if a.terms.len() == 1 && w.is_empty() && c.degree() == Some(0) => Some(c.constant_term()),
            _ => None,
        }
    }
}

/// Parses e.g. `X1*X1 - (x)*X2`; juxtaposition is composition.
pub fn parse_nc(src: &str, gen: &WeightedGenerators) -> Result<NcPolynomial> {
    parse_with(&NcGrammar { gen }, src)
}

/// Weighted degree of the given presentation; `None` for the zero polynomial.
pub fn weighted_order(p: &NcPolynomial) -> Option<u32> {
    p.terms.keys().map(|w| p.word_weight(w)).max()
}

/// Top-weight monomials with coefficients frozen at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct PrincipalPart {
    pub order: u32,
    pub weights: Vec<u32>,
    pub monomials: Vec<(Vec<usize>, Rational)>,
}

impl PrincipalPart {
    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    /// The principal part in `Diff^k`: unchanged at its own order, zero
    /// when `k` exceeds it.
    pub fn at_order(&self, k: u32) -> Result<PrincipalPart> {
        if k < self.order {
            return Err(Error::InvalidInput(format!("order {} exceeds the requested order {k}", self.order)));
        }
        let monomials = if k == self.order { self.monomials.clone() } else { Vec::new() };
        Ok(PrincipalPart { order: k, weights: self.weights.clone(), monomials })
    }

    /// Product of principal parts (concatenated letters).
    pub fn mul(&self, other: &PrincipalPart) -> PrincipalPart {
        let mut acc: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
        for (w1, c1) in &self.monomials {
            for (w2, c2) in &other.monomials {
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                *acc.entry(w).or_insert_with(Rational::zero) += c1 * c2;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        PrincipalPart { order: self.order + other.order, weights: self.weights.clone(), monomials: acc.into_iter().collect() }
    }
}

/// Zero polynomial gives order 0 and no monomials.
pub fn principal_part(p: &NcPolynomial, point: &[Rational]) -> Result<PrincipalPart> {
    if point.len() != p.dim {
        return Err(Error::DimensionMismatch(format!("point of length {} on R^{}", point.len(), p.dim)));
    }
    let order = weighted_order(p).unwrap_or(0);
    let monomials = p
        .terms
        .iter()
        .filter(|(w, _)| p.word_weight(w) == order)
        .map(|(w, c)| (w.clone(), c.eval(point)))
        .filter(|(_, c)| !c.is_zero())
        .collect();
    Ok(PrincipalPart { order, weights: p.weights.clone(), monomials })
}

/// Real-valued evaluation of a principal part at letter values.
pub fn evaluate_commutative<T: Ring>(pp: &PrincipalPart, letters: &[T]) -> T {
    let mut acc = T::zero();
    for (w, c) in &pp.monomials {
        let mut t = T::from_rational(c);
        for &j in w {
            t = t * letters[j].clone();
        }
        acc = acc + t;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfield::parse_field;
    use crate::scalar::int;

    fn gens(src: &[&str], w: &[u32], depth: u32) -> WeightedGenerators {
        let f = src.iter().map(|s| parse_field(s, 1).unwrap()).collect();
        WeightedGenerators::new(f, w.to_vec(), depth).unwrap()
    }

    #[test]
    fn coefficients_move_left() {
        let g = gens(&["dx"], &[1], 1);
        // ∂ ∘ x = x∂ + 1
        let p = parse_nc("X1*x", &g).unwrap();
        let q = parse_nc("x*X1 + 1", &g).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn symbol_presentations_orders() {
        let g = gens(&["x^2*dx", "dx", "x*dx"], &[1, 3, 2], 3);
        let p = parse_nc("X1*X2 - X3*X3", &g).unwrap();
        assert_eq!(weighted_order(&p), Some(4));
        let f = MultiPoly::var(1, 0).pow(3);
        // Both presentations denote −x∂ₓ.
        let q = parse_nc("-X3", &g).unwrap();
        assert_eq!(p.apply(&g.fields, &f), q.apply(&g.fields, &f));
        assert_eq!(p.apply(&g.fields, &f), f.scale(&int(-3)));
        let pp = principal_part(&p, &[int(0)]).unwrap();
        assert_eq!(pp.monomials.len(), 2);
        assert!(principal_part(&q, &[int(0)]).unwrap().at_order(4).unwrap().is_zero());
    }

    #[test]
    fn zero_has_no_order() {
        let g = gens(&["dx"], &[1], 1);
        assert_eq!(weighted_order(&parse_nc("X1 - X1", &g).unwrap()), None);
    }
}
