use std::collections::BTreeMap;
use std::marker::PhantomData;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::bch::{BchConvention, BchSeries, LieOps};
use crate::error::{Error, Result};
use crate::scalar::{int, parse_rational, rational_string, Field, Rational};

/// Graded nilpotent Lie algebra given by structure constants
/// `[e_i, e_j] = Σ_k c[i][j][k] e_k`, with `c` nonzero only when
/// `w_k = w_i + w_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedLieAlgebra {
    weights: Vec<u32>,
    depth: u32,
    labels: Vec<String>,
    /// Keyed by (i, j) with i < j.
    sc: BTreeMap<(usize, usize), Vec<(usize, Rational)>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement<T> {
    pub coords: Vec<T>,
}

/// Covector on the algebra, stored as its values `⟨ξ, e_i⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualElement<T> {
    pub coords: Vec<T>,
}

macro_rules! vector_ops {
    ($name:ident) => {
        impl<T: Field> $name<T> {
            pub fn new(coords: Vec<T>) -> Self {
                $name { coords }
            }

            pub fn zero(d: usize) -> Self {
                $name { coords: vec![T::zero(); d] }
            }

            pub fn basis(d: usize, i: usize) -> Self {
                let mut v = Self::zero(d);
                v.coords[i] = T::one();
                v
            }

            pub fn dim(&self) -> usize {
                self.coords.len()
            }

            pub fn add(&self, o: &Self) -> Self {
                assert_eq!(self.dim(), o.dim(), "element dimension mismatch");
                $name { coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a.clone() + b.clone()).collect() }
            }

            pub fn sub(&self, o: &Self) -> Self {
                assert_eq!(self.dim(), o.dim(), "element dimension mismatch");
                $name { coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a.clone() - b.clone()).collect() }
            }

            pub fn scale(&self, s: &T) -> Self {
                $name { coords: self.coords.iter().map(|a| a.clone() * s.clone()).collect() }
            }

            pub fn is_zero(&self) -> bool {
                self.coords.iter().all(|c| c.is_zero())
            }

            /// Max-abs norm as a float.
            pub fn max_abs(&self) -> f64 {
                self.coords.iter().map(|c| c.magnitude()).fold(0.0, f64::max)
            }
        }
    };
}

vector_ops!(AlgebraElement);
vector_ops!(DualElement);

impl<T: Field> DualElement<T> {
    pub fn pair(&self, x: &AlgebraElement<T>) -> T {
        self.coords.iter().zip(&x.coords).fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }
}

pub type Matrix<T> = Vec<Vec<T>>;

fn mat_mul<T: Field>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let n = a.len();
    let mut out = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if !b[k][j].is_zero() {
                    out[i][j] = out[i][j].clone() + a[i][k].clone() * b[k][j].clone();
                }
            }
        }
    }
    out
}

fn mat_vec<T: Field>(a: &Matrix<T>, v: &[T]) -> Vec<T> {
    a.iter().map(|row| row.iter().zip(v).fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())).collect()
}

impl GradedLieAlgebra {
    /// Builds the algebra from entries `(i, j, k, c)` meaning `[e_i,e_j] ∋ c e_k`.
    /// Entries with `i > j` are folded in by antisymmetry; a nonzero entry
    /// violating the grading or with `i = j` is rejected.
    pub fn new(weights: Vec<u32>, depth: u32, entries: Vec<(usize, usize, usize, Rational)>) -> Result<Self> {
        let d = weights.len();
        if let Some(w) = weights.iter().find(|&&w| w == 0 || w > depth) {
            return Err(Error::InvalidInput(format!("weight {w} outside 1..={depth}")));
        }
        let mut acc: BTreeMap<(usize, usize), BTreeMap<usize, Rational>> = BTreeMap::new();
        for (i, j, k, c) in entries {
            if i >= d || j >= d || k >= d {
                return Err(Error::InvalidInput(format!("index out of range in ({i},{j},{k})")));
            }
            if c.is_zero() {
                continue;
            }
            if i == j {
                return Err(Error::InvalidInput(format!("[e{i},e{i}] must vanish")));
            }
            if weights[k] != weights[i] + weights[j] {
                return Err(Error::InvalidInput(format!("[e{i},e{j}] has a component on e{k} of the wrong weight")));
            }
            let (key, c) = if i < j { ((i, j), c) } else { ((j, i), -c) };
            let e = acc.entry(key).or_default().entry(k).or_insert_with(Rational::zero);
            *e += c;
        }
        let sc = acc
            .into_iter()
            .map(|(key, m)| (key, m.into_iter().filter(|(_, c)| !c.is_zero()).collect::<Vec<_>>()))
            .filter(|(_, v)| !v.is_empty())
            .collect();
        let labels = (0..d).map(|i| format!("e{}", i + 1)).collect();
        Ok(GradedLieAlgebra { weights, depth, labels, sc })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.dim(), "label count mismatch");
        self.labels = labels;
        self
    }

    pub fn abelian(weights: Vec<u32>, depth: u32) -> Result<Self> {
        Self::new(weights, depth, Vec::new())
    }

    /// Weights (1,1,2), `[e1,e2] = e3`.
    pub fn heisenberg() -> Self {
        Self::new(vec![1, 1, 2], 2, vec![(0, 1, 2, int(1))]).unwrap()
    }

    /// Weights (1,1,2,3), `[e1,e2] = e3`, `[e1,e3] = e4`.
    pub fn engel() -> Self {
        Self::new(vec![1, 1, 2, 3], 3, vec![(0, 1, 2, int(1)), (0, 2, 3, int(1))]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// `[e_i, e_j]` as sparse coordinates.
    pub fn bracket_basis(&self, i: usize, j: usize) -> Vec<(usize, Rational)> {
        if i < j {
            self.sc.get(&(i, j)).cloned().unwrap_or_default()
        } else if i > j {
            self.sc.get(&(j, i)).map(|v| v.iter().map(|(k, c)| (*k, -c.clone())).collect()).unwrap_or_default()
        } else {
            Vec::new()
        }
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> Rational {
        self.bracket_basis(i, j).into_iter().find(|(kk, _)| *kk == k).map(|(_, c)| c).unwrap_or_else(Rational::zero)
    }

    /// Nonzero entries `(i, j, k, c)` with `i < j`.
    pub fn entries(&self) -> Vec<(usize, usize, usize, Rational)> {
        self.sc.iter().flat_map(|(&(i, j), v)| v.iter().map(move |(k, c)| (i, j, *k, c.clone()))).collect()
    }

    pub fn is_abelian(&self) -> bool {
        self.sc.is_empty()
    }

    /// A three-dimensional non-abelian graded nilpotent algebra is Heisenberg.
    pub fn is_heisenberg(&self) -> bool {
        self.dim() == 3 && !self.is_abelian()
    }

    pub fn bracket<T: Field>(&self, x: &AlgebraElement<T>, y: &AlgebraElement<T>) -> AlgebraElement<T> {
        let d = self.dim();
        let mut out = vec![T::zero(); d];
        for (&(i, j), v) in &self.sc {
            let c = x.coords[i].clone() * y.coords[j].clone() - x.coords[j].clone() * y.coords[i].clone();
            if c.is_zero() {
                continue;
            }
            for (k, s) in v {
                out[*k] = out[*k].clone() + c.clone() * T::from_rational(s);
            }
        }
        AlgebraElement { coords: out }
    }

    pub fn bch<T: Field>(&self, x: &AlgebraElement<T>, y: &AlgebraElement<T>) -> AlgebraElement<T> {
        self.bch_with(x, y, BchConvention::default())
    }

    pub fn bch_with<T: Field>(&self, x: &AlgebraElement<T>, y: &AlgebraElement<T>, conv: BchConvention) -> AlgebraElement<T> {
        let series = BchSeries::cached(self.step() as usize, conv);
        series.eval(&AlgebraOps::<T>::new(self), x, y)
    }

    /// Nilpotency bound used to truncate series: brackets of length above
    /// the largest weight vanish.
    fn step(&self) -> u32 {
        self.weights.iter().copied().max().unwrap_or(1).max(1)
    }

    pub fn dilate<T: Field>(&self, lambda: &T, x: &AlgebraElement<T>) -> AlgebraElement<T> {
        AlgebraElement { coords: self.dilate_coords(lambda, &x.coords) }
    }

    /// `⟨dilate_dual(λ,ξ), X⟩ = ⟨ξ, dilate(λ,X)⟩`.
    pub fn dilate_dual<T: Field>(&self, lambda: &T, xi: &DualElement<T>) -> DualElement<T> {
        DualElement { coords: self.dilate_coords(lambda, &xi.coords) }
    }

    fn dilate_coords<T: Field>(&self, lambda: &T, c: &[T]) -> Vec<T> {
        let maxw = self.step() as usize;
        let mut pw = vec![T::one()];
        for k in 1..=maxw {
            pw.push(pw[k - 1].clone() * lambda.clone());
        }
        c.iter().zip(&self.weights).map(|(a, &w)| a.clone() * pw[w as usize].clone()).collect()
    }

    /// Matrix of `ad(a)`: column j holds the coordinates of `[a, e_j]`.
    pub fn ad_matrix<T: Field>(&self, a: &AlgebraElement<T>) -> Matrix<T> {
        let d = self.dim();
        let mut m = vec![vec![T::zero(); d]; d];
        for j in 0..d {
            let col = self.bracket(a, &AlgebraElement::basis(d, j));
            for (row, c) in m.iter_mut().zip(col.coords) {
                row[j] = c;
            }
        }
        m
    }

    /// `exp(ad a)`, a finite sum since `ad a` is nilpotent.
    pub fn exp_ad<T: Field>(&self, a: &AlgebraElement<T>) -> Matrix<T> {
        let d = self.dim();
        let ad = self.ad_matrix(a);
        let mut out: Matrix<T> = (0..d).map(|i| (0..d).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect();
        let mut term = out.clone();
        for k in 1..=self.step() as i64 {
            term = mat_mul(&term, &ad);
            let inv = T::one() / T::from_i64(k);
            term = term.into_iter().map(|r| r.into_iter().map(|c| c * inv.clone()).collect()).collect();
            if term.iter().all(|r| r.iter().all(|c| c.is_zero())) {
                break;
            }
            for i in 0..d {
                for j in 0..d {
                    out[i][j] = out[i][j].clone() + term[i][j].clone();
                }
            }
        }
        out
    }

    /// `Ad(exp a) x = exp(ad a) x`.
    pub fn adjoint<T: Field>(&self, a: &AlgebraElement<T>, x: &AlgebraElement<T>) -> AlgebraElement<T> {
        AlgebraElement { coords: mat_vec(&self.exp_ad(a), &x.coords) }
    }

    /// `Ad*(exp a) ξ = ξ ∘ Ad(exp a)⁻¹ = ξ ∘ exp(−ad a)`.
    pub fn coadjoint<T: Field>(&self, a: &AlgebraElement<T>, xi: &DualElement<T>) -> DualElement<T> {
        let m = self.exp_ad(&a.scale(&-T::one()));
        let d = self.dim();
        let coords = (0..d).map(|j| (0..d).fold(T::zero(), |acc, i| acc + xi.coords[i].clone() * m[i][j].clone())).collect();
        DualElement { coords }
    }

    pub fn check_jacobi(&self) -> bool {
        let d = self.dim();
        for i in 0..d {
            for j in i + 1..d {
                for k in j + 1..d {
                    let e = |n| AlgebraElement::<Rational>::basis(d, n);
                    let (a, b, c) = (e(i), e(j), e(k));
                    let s = self
                        .bracket(&a, &self.bracket(&b, &c))
                        .add(&self.bracket(&b, &self.bracket(&c, &a)))
                        .add(&self.bracket(&c, &self.bracket(&a, &b)));
                    if !s.is_zero() {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn check_grading(&self) -> bool {
        self.entries().iter().all(|(i, j, k, _)| self.weights[*k] == self.weights[*i] + self.weights[*j])
    }

    pub fn to_json(&self) -> AlgebraJson {
        AlgebraJson {
            dim: self.dim(),
            weights: self.weights.clone(),
            depth: self.depth,
            labels: self.labels.clone(),
            sc: self.entries().into_iter().map(|(i, j, k, c)| (i, j, k, rational_string(&c))).collect(),
        }
    }

    pub fn from_json(j: &AlgebraJson) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, j2, k, c) in &j.sc {
            let q = parse_rational(c).ok_or_else(|| Error::InvalidInput(format!("bad rational '{c}'")))?;
            entries.push((*i, *j2, *k, q));
        }
        let g = Self::new(j.weights.clone(), j.depth, entries)?;
        if j.labels.len() == g.dim() {
            Ok(g.with_labels(j.labels.clone()))
        } else {
            Ok(g)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraJson {
    pub dim: usize,
    pub weights: Vec<u32>,
    pub depth: u32,
    pub labels: Vec<String>,
    /// Sparse `(i, j, k, value)` with `i < j`, values as exact rationals.
    pub sc: Vec<(usize, usize, usize, String)>,
}

/// [`LieOps`] view of an algebra over scalars `T`.
pub struct AlgebraOps<'a, T> {
    g: &'a GradedLieAlgebra,
    _t: PhantomData<T>,
}

impl<'a, T> AlgebraOps<'a, T> {
    pub fn new(g: &'a GradedLieAlgebra) -> Self {
        AlgebraOps { g, _t: PhantomData }
    }
}

impl<T: Field> LieOps for AlgebraOps<'_, T> {
    type Elem = AlgebraElement<T>;

    fn zero(&self) -> Self::Elem {
        AlgebraElement::zero(self.g.dim())
    }

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.add(b)
    }

    fn scale(&self, a: &Self::Elem, q: &Rational) -> Self::Elem {
        a.scale(&T::from_rational(q))
    }

    fn bracket(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.g.bracket(a, b)
    }
}
