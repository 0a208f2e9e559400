use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::scalar::{Rational, Real, Ring};

/// Exponent vector ordered graded-lexicographically: total degree first,
/// then the exponent of `x1`, then `x2`, and so on.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All exponent vectors in `nvars` variables of total degree ≤ `max_deg`,
    /// in ascending graded-lex order.
    pub fn all_up_to(nvars: usize, max_deg: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        for d in 0..=max_deg {
            let mut cur = vec![0u32; nvars];
            fill_degree(&mut out, &mut cur, 0, d);
        }
        out.sort();
        out
    }
}

fn fill_degree(out: &mut Vec<Monomial>, cur: &mut Vec<u32>, i: usize, left: u32) {
    if cur.is_empty() {
        if left == 0 {
            out.push(Monomial(Vec::new()));
        }
        return;
    }
    if i + 1 == cur.len() {
        cur[i] = left;
        out.push(Monomial(cur.clone()));
        cur[i] = 0;
        return;
    }
    for e in 0..=left {
        cur[i] = e;
        fill_degree(out, cur, i + 1, left - e);
    }
    cur[i] = 0;
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multivariate polynomial in canonical form: no stored zero coefficients,
/// terms keyed by graded-lex exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly<R> {
    nvars: usize,
    terms: BTreeMap<Monomial, R>,
}

impl<R: Ring> MultiPoly<R> {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: R) -> Self {
        Self::term(Monomial::one(nvars), c)
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::term(Monomial::var(nvars, i), R::one())
    }

    pub fn term(m: Monomial, c: R) -> Self {
        let nvars = m.0.len();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        MultiPoly { nvars, terms }
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, R)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.0.len(), nvars, "exponent length mismatch");
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &R)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> R {
        self.terms.get(m).cloned().unwrap_or_else(R::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> R {
        self.coeff(&Monomial::one(self.nvars))
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    pub fn add_term(&mut self, m: Monomial, c: R) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.terms.insert(m, s);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| -c.clone())
    }

    pub fn scale(&self, s: &R) -> Self {
        if s.is_zero() {
            return Self::zero(self.nvars);
        }
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone() * s.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        let mut out = Self::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(self.nvars, R::one());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm.0[i] -= 1;
            out.add_term(dm, c.clone() * R::from_i64(e as i64));
        }
        out
    }

    pub fn eval(&self, p: &[R]) -> R {
        assert_eq!(p.len(), self.nvars, "point dimension mismatch");
        let mut acc = R::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in p.iter().zip(&m.0) {
                for _ in 0..e {
                    t = t * x.clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Substitutes `x_i ↦ subs[i]`; all substitutes share a variable count.
    pub fn compose(&self, subs: &[MultiPoly<R>]) -> MultiPoly<R> {
        assert_eq!(subs.len(), self.nvars, "substitution length mismatch");
        let nv = subs.first().map_or(0, |s| s.nvars);
        let maxe: Vec<u32> = (0..self.nvars).map(|i| self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0)).collect();
        let powers: Vec<Vec<MultiPoly<R>>> = subs
            .iter()
            .zip(&maxe)
            .map(|(s, &e)| {
                let mut v = vec![MultiPoly::constant(nv, R::one())];
                for k in 1..=e as usize {
                    let next = v[k - 1].mul(s);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = MultiPoly::zero(nv);
        for (m, c) in &self.terms {
            let mut t = MultiPoly::constant(nv, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = t.mul(&powers[i][e as usize]);
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Re-expands about `p`: the result `q` satisfies `q(u) = self(p + u)`.
    pub fn recenter(&self, p: &[R]) -> Self {
        assert_eq!(p.len(), self.nvars, "point dimension mismatch");
        let subs: Vec<_> =
            (0..self.nvars).map(|i| MultiPoly::var(self.nvars, i).add(&MultiPoly::constant(self.nvars, p[i].clone()))).collect();
        self.compose(&subs)
    }

    /// Drops every term of total degree above `k`.
    pub fn truncate(&self, k: u32) -> Self {
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(m, _)| m.degree() <= k).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    pub fn map_coeffs<S: Ring>(&self, f: impl Fn(&R) -> S) -> MultiPoly<S> {
        let mut out = MultiPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
    }
}

impl<R: Real> MultiPoly<R> {
    pub fn to_f64(&self) -> MultiPoly<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    pub fn eval_f64(&self, p: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64();
            for (x, &e) in p.iter().zip(&m.0) {
                t *= x.powi(e as i32);
            }
            acc += t;
        }
        acc
    }
}

impl MultiPoly<Rational> {
    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.constant_term().is_one()
    }
}

/// Variable names used for printing: `x,y,z` when `nvars ≤ 3`, else `x1..xm`.
pub fn var_name(nvars: usize, i: usize) -> String {
    if nvars <= 3 {
        ["x", "y", "z"][i].to_string()
    } else {
        format!("x{}", i + 1)
    }
}

pub(crate) fn monomial_text(m: &Monomial, names: &dyn Fn(usize) -> String) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.0.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(names(i)),
            _ => parts.push(format!("{}^{}", names(i), e)),
        }
    }
    parts.join("*")
}

/// Writes `sign`-prefixed terms; returns the joined text ("0" when empty).
pub(crate) fn join_signed(items: Vec<(bool, String)>) -> String {
    if items.is_empty() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (k, (neg, body)) in items.into_iter().enumerate() {
        match (k, neg) {
            (0, true) => s.push('-'),
            (0, false) => {}
            (_, true) => s.push_str(" - "),
            (_, false) => s.push_str(" + "),
        }
        s.push_str(&body);
    }
    s
}

impl fmt::Display for MultiPoly<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nv = self.nvars;
        f.write_str(&self.text_with(&move |i: usize| var_name(nv, i)))
    }
}

impl MultiPoly<Rational> {
    /// Text form with caller-chosen variable names.
    pub fn text_with(&self, names: &dyn Fn(usize) -> String) -> String {
        let items = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| {
                let neg = c < &Rational::zero();
                let a = if neg { -c.clone() } else { c.clone() };
                let mono = monomial_text(m, names);
                let body = match (mono.is_empty(), a.is_one()) {
                    (true, _) => crate::scalar::rational_string(&a),
                    (false, true) => mono,
                    (false, false) => format!("{}*{}", crate::scalar::rational_string(&a), mono),
                };
                (neg, body)
            })
            .collect();
        join_signed(items)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn x() -> MultiPoly<Rational> {
        MultiPoly::var(2, 0)
    }
    fn y() -> MultiPoly<Rational> {
        MultiPoly::var(2, 1)
    }

    #[test]
    fn cancellation_leaves_no_zero_terms() {
        let p = x().add(&y()).sub(&y());
        assert_eq!(p, x());
        assert_eq!(p.num_terms(), 1);
        assert!(x().sub(&x()).is_zero());
    }

    #[test]
    fn graded_lex_order() {
        let a = Monomial(vec![2, 0]);
        let b = Monomial(vec![1, 1]);
        let c = Monomial(vec![0, 3]);
        assert!(a > b && c > a);
        assert_eq!(Monomial::all_up_to(2, 2).len(), 6);
    }

    #[test]
    fn recenter_matches_shifted_evaluation() {
        let p = x().pow(3).add(&x().mul(&y()).scale(&int(2)));
        let c = [rat(1, 2), int(-3)];
        let q = p.recenter(&c);
        let u = [rat(2, 7), rat(5, 3)];
        let shifted = [u[0].clone() + c[0].clone(), u[1].clone() + c[1].clone()];
        assert_eq!(q.eval(&u), p.eval(&shifted));
    }

    #[test]
    fn derivative_and_display() {
        let p = x().pow(2).scale(&rat(3, 2)).sub(&y()).add(&MultiPoly::constant(2, int(4)));
        assert_eq!(p.to_string(), "3/2*x^2 - y + 4");
        assert_eq!(p.derivative(0).to_string(), "3*x");
    }
}
