//! Linear differential operators `Σ c_α(y) ∂^α` with polynomial
//! coefficients on ℝ^q.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::polyfield::MultiPoly;
use crate::scalar::{Rational, Ring};

#[derive(Clone, Debug, PartialEq)]
pub struct DiffOp<T> {
    nvars: usize,
    /// Derivative multi-index → coefficient; zero coefficients are never stored.
    terms: BTreeMap<Vec<u32>, MultiPoly<T>>,
}

/// Operators acting on the carrier space of an induced representation.
pub type SymbolOperator = DiffOp<Complex<Rational>>;

fn binomial(n: u32, k: u32) -> i64 {
    let mut r: i64 = 1;
    for i in 0..k as i64 {
        r = r * (n as i64 - i) / (i + 1);
    }
    r
}

impl<T: Ring> DiffOp<T> {
    pub fn zero(nvars: usize) -> Self {
        DiffOp { nvars, terms: BTreeMap::new() }
    }

    /// Multiplication by `c`.
    pub fn multiplication(c: MultiPoly<T>) -> Self {
        Self::term(vec![0; c.nvars()], c)
    }

    pub fn identity(nvars: usize) -> Self {
        Self::multiplication(MultiPoly::constant(nvars, T::one()))
    }

    /// `∂/∂y_j`.
    pub fn partial(nvars: usize, j: usize) -> Self {
        let mut alpha = vec![0; nvars];
        alpha[j] = 1;
        Self::term(alpha, MultiPoly::constant(nvars, T::one()))
    }

    pub fn term(alpha: Vec<u32>, c: MultiPoly<T>) -> Self {
        assert_eq!(alpha.len(), c.nvars(), "multi-index length mismatch");
        let mut out = Self::zero(c.nvars());
        out.add_term(alpha, c);
        out
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &MultiPoly<T>)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, alpha: &[u32]) -> MultiPoly<T> {
        self.terms.get(alpha).cloned().unwrap_or_else(|| MultiPoly::zero(self.nvars))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest derivative order, `None` for the zero operator.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|a| a.iter().sum()).max()
    }

    fn add_term(&mut self, alpha: Vec<u32>, c: MultiPoly<T>) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&alpha) {
            Some(old) => old.add(&c),
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(alpha, sum);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-T::one()))
    }

    pub fn scale(&self, s: &T) -> Self {
        let mut out = Self::zero(self.nvars);
        for (a, c) in &self.terms {
            out.add_term(a.clone(), c.scale(s));
        }
        out
    }

    /// `self ∘ other`, by the Leibniz rule.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut out = Self::zero(self.nvars);
        for (alpha, a) in &self.terms {
            for (beta, b) in &other.terms {
                // a ∂^α (b ∂^β) = Σ_{γ≤α} C(α,γ) a (∂^γ b) ∂^{α−γ+β}
                let mut gamma = vec![0u32; self.nvars];
                loop {
                    let mut db = b.clone();
                    let mut coef: i64 = 1;
                    for (j, &g) in gamma.iter().enumerate() {
                        coef *= binomial(alpha[j], g);
                        for _ in 0..g {
                            db = db.derivative(j);
                        }
                    }
                    if !db.is_zero() {
                        let idx: Vec<u32> = (0..self.nvars).map(|j| alpha[j] - gamma[j] + beta[j]).collect();
                        out.add_term(idx, a.mul(&db).scale(&T::from_i64(coef)));
                    }
                    // Next γ ≤ α in odometer order.
                    let mut j = 0;
                    while j < self.nvars {
                        if gamma[j] < alpha[j] {
                            gamma[j] += 1;
                            break;
                        }
                        gamma[j] = 0;
                        j += 1;
                    }
                    if j == self.nvars {
                        break;
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::identity(self.nvars);
        for _ in 0..e {
            acc = acc.compose(self);
        }
        acc
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.compose(other).sub(&other.compose(self))
    }

    /// Applies the operator to a polynomial.
    pub fn apply(&self, f: &MultiPoly<T>) -> MultiPoly<T> {
        let mut out = MultiPoly::zero(self.nvars);
        for (alpha, c) in &self.terms {
            let mut g = f.clone();
            for (j, &k) in alpha.iter().enumerate() {
                for _ in 0..k {
                    g = g.derivative(j);
                }
            }
            out = out.add(&c.mul(&g));
        }
        out
    }

    pub fn map_coeffs<S: Ring>(&self, f: impl Fn(&T) -> S) -> DiffOp<S> {
        let mut out = DiffOp::zero(self.nvars);
        for (a, c) in &self.terms {
            out.add_term(a.clone(), c.map_coeffs(&f));
        }
        out
    }

    /// Largest total degree of any coefficient.
    pub fn coefficient_degree(&self) -> u32 {
        self.terms.values().filter_map(|c| c.degree()).max().unwrap_or(0)
    }
}

/// Name of carrier variable `j`: `y` when there is one, else `y1..yq`.
pub fn carrier_var(nvars: usize, j: usize) -> String {
    if nvars == 1 {
        "y".to_string()
    } else {
        format!("y{}", j + 1)
    }
}

/// Splits a complex polynomial into real and imaginary parts.
pub fn split_complex(p: &MultiPoly<Complex<Rational>>) -> (MultiPoly<Rational>, MultiPoly<Rational>) {
    let mut re = MultiPoly::zero(p.nvars());
    let mut im = MultiPoly::zero(p.nvars());
    for (m, c) in p.terms() {
        re.add_term(m.clone(), c.re.clone());
        im.add_term(m.clone(), c.im.clone());
    }
    (re, im)
}

pub fn complex_poly_text(p: &MultiPoly<Complex<Rational>>) -> String {
    let nv = p.nvars();
    let names = move |i: usize| carrier_var(nv, i);
    let (re, im) = split_complex(p);
    match (re.is_zero(), im.is_zero()) {
        (true, true) => "0".into(),
        (false, true) => re.text_with(&names),
        (true, false) => format!("i*({})", im.text_with(&names)),
        (false, false) => format!("{} + i*({})", re.text_with(&names), im.text_with(&names)),
    }
}

impl DiffOp<Complex<Rational>> {
    /// Canonical text `(c)*D^[α] + …`, ordered by multi-index.
    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(a, c)| {
                let idx: Vec<String> = a.iter().map(|e| e.to_string()).collect();
                format!("({})*D^[{}]", complex_poly_text(c), idx.join(","))
            })
            .collect();
        parts.join(" + ")
    }

    /// Formal adjoint `Σ (−∂)^α ∘ conj(c_α)`.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (alpha, c) in &self.terms {
            let conj = c.map_coeffs(|z| z.conj());
            let sign: u32 = alpha.iter().sum();
            let s = if sign % 2 == 1 { -Complex::<Rational>::one() } else { Complex::one() };
            let d = Self::term(alpha.clone(), MultiPoly::constant(self.nvars, s));
            out = out.add(&d.compose(&Self::multiplication(conj)));
        }
        out
    }

    pub fn is_formally_symmetric(&self) -> bool {
        self.adjoint() == *self
    }
}

/// Embeds a real polynomial as a complex one.
pub fn complexify(p: &MultiPoly<Rational>) -> MultiPoly<Complex<Rational>> {
    p.map_coeffs(|q| Complex::new(q.clone(), Rational::zero()))
}

/// `i·p` for a real polynomial `p`.
pub fn imaginary(p: &MultiPoly<Rational>) -> MultiPoly<Complex<Rational>> {
    p.map_coeffs(|q| Complex::new(Rational::zero(), q.clone()))
}
