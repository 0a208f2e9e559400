use std::fmt;

use num_traits::Zero;

use super::poly::{join_signed, var_name, Monomial, MultiPoly};
use crate::error::{Error, Result};
use crate::scalar::{Rational, Real, Ring};

/// Vector field `Σ X_i ∂_i` on ℝᵐ with polynomial components.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField<R> {
    comps: Vec<MultiPoly<R>>,
}

impl<R: Ring> VectorField<R> {
    pub fn new(comps: Vec<MultiPoly<R>>) -> Result<Self> {
        let m = comps.len();
        if comps.iter().any(|c| c.nvars() != m) {
            return Err(Error::DimensionMismatch(format!("field on R^{m} needs components in {m} variables")));
        }
        Ok(VectorField { comps })
    }

    pub fn zero(dim: usize) -> Self {
        VectorField { comps: vec![MultiPoly::zero(dim); dim] }
    }

    /// Coordinate field ∂_i.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        Self::along(dim, i, MultiPoly::constant(dim, R::one()))
    }

    /// The field `f ∂_i`.
    pub fn along(dim: usize, i: usize, f: MultiPoly<R>) -> Self {
        let mut comps = vec![MultiPoly::zero(dim); dim];
        comps[i] = f;
        VectorField { comps }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[MultiPoly<R>] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &MultiPoly<R> {
        &self.comps[i]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(MultiPoly::is_zero)
    }

    pub fn degree(&self) -> Option<u32> {
        self.comps.iter().filter_map(MultiPoly::degree).max()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.sub(b))
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn scale(&self, s: &R) -> Self {
        self.map(|c| c.scale(s))
    }

    /// Module action `f·X`.
    pub fn mul_poly(&self, f: &MultiPoly<R>) -> Self {
        self.map(|c| c.mul(f))
    }

    /// Derivation `X(f) = Σ X_i ∂_i f`.
    pub fn apply(&self, f: &MultiPoly<R>) -> MultiPoly<R> {
        let mut out = MultiPoly::zero(self.dim());
        for (i, xi) in self.comps.iter().enumerate() {
            if !xi.is_zero() {
                out = out.add(&xi.mul(&f.derivative(i)));
            }
        }
        out
    }

    /// Lie bracket `[X,Y]_j = Σ_i (X_i ∂_i Y_j − Y_i ∂_i X_j)`.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!("bracket of fields on R^{} and R^{}", self.dim(), other.dim())));
        }
        let comps = (0..self.dim()).map(|j| self.apply(&other.comps[j]).sub(&other.apply(&self.comps[j]))).collect();
        Ok(VectorField { comps })
    }

    pub fn eval(&self, p: &[R]) -> Result<Vec<R>> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!("point of length {} for a field on R^{}", p.len(), self.dim())));
        }
        Ok(self.comps.iter().map(|c| c.eval(p)).collect())
    }

    pub fn recenter(&self, p: &[R]) -> Self {
        self.map(|c| c.recenter(p))
    }

    pub fn truncate(&self, k: u32) -> Self {
        self.map(|c| c.truncate(k))
    }

    pub fn map_coeffs<S: Ring>(&self, f: impl Fn(&R) -> S) -> VectorField<S> {
        VectorField { comps: self.comps.iter().map(|c| c.map_coeffs(&f)).collect() }
    }

    /// Coefficient vector over the basis `{u^β ∂_i : |β| ≤ k}`, indexed by
    /// `i * monos.len() + position of β in monos`.
    pub fn coefficient_vector(&self, monos: &[Monomial]) -> Vec<R> {
        let mut v = Vec::with_capacity(monos.len() * self.dim());
        for c in &self.comps {
            for m in monos {
                v.push(c.coeff(m));
            }
        }
        v
    }

    fn map(&self, f: impl Fn(&MultiPoly<R>) -> MultiPoly<R>) -> Self {
        VectorField { comps: self.comps.iter().map(f).collect() }
    }

    fn zip(&self, other: &Self, f: impl Fn(&MultiPoly<R>, &MultiPoly<R>) -> MultiPoly<R>) -> Self {
        assert_eq!(self.dim(), other.dim(), "field dimension mismatch");
        VectorField { comps: self.comps.iter().zip(&other.comps).map(|(a, b)| f(a, b)).collect() }
    }
}

impl<R: Real> VectorField<R> {
    pub fn to_f64(&self) -> VectorField<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    pub fn eval_f64(&self, p: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|c| c.eval_f64(p)).collect()
    }
}

/// Basis-symbol names: `d/dx, d/dy, d/dz` when `dim ≤ 3`, else `d/dx1..`.
pub fn basis_name(dim: usize, i: usize) -> String {
    format!("d/d{}", var_name(dim, i))
}

impl fmt::Display for VectorField<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.dim();
        let mut items = Vec::new();
        for (i, c) in self.comps.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let basis = basis_name(m, i);
            if c.num_terms() == 1 {
                let (mono, coef) = c.terms().next().unwrap();
                let neg = coef < &Rational::zero();
                let single = MultiPoly::term(mono.clone(), if neg { -coef.clone() } else { coef.clone() });
                let body = if single.is_one() { basis } else { format!("{}*{}", single, basis) };
                items.push((neg, body));
            } else {
                items.push((false, format!("({})*{}", c, basis)));
            }
        }
        f.write_str(&join_signed(items))
    }
}
