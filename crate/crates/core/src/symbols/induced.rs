//! Irreducible unitary representations of graded nilpotent groups by
//! induction from a polarizing subalgebra, in coexponential coordinates.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::diffop::{complexify, imaginary, SymbolOperator};
use crate::error::{Error, Result};
use crate::linalg::{nullspace, Echelon};
use crate::osculating::{AlgebraElement, DualElement, GradedLieAlgebra, Matrix};
use crate::polyfield::MultiPoly;
use crate::scalar::{int, Rational};
use crate::Poly;

/// `dπ` for `π = Ind_P^G e^{iℓ}` acting on functions of `q` variables.
///
/// With the cross-section `σ(s) = exp(s₁Y₁)⋯exp(s_qY_q)` and functions
/// satisfying `f(pg) = e^{iℓ(log p)} f(g)`, `π(x)f(g) = f(gx)` gives
/// `dπ(X) = Σ s'_j ∂_j + iℓ(Z')` where `Ad(σ(s))X = Z' + Σ s'_j U_j(s)`.
#[derive(Clone, Debug)]
pub struct InducedRep {
    pub algebra: GradedLieAlgebra,
    pub functional: DualElement<Rational>,
    /// Basis of the polarizing subalgebra.
    pub polarization: Vec<Vec<Rational>>,
    /// Basis indices of `Y₁..Y_q`.
    pub coexponential: Vec<usize>,
    /// `dπ(e_i)` for every basis vector.
    pub action: Vec<SymbolOperator>,
}

impl InducedRep {
    pub fn q(&self) -> usize {
        self.coexponential.len()
    }

    /// `dπ(x)` by linearity.
    pub fn act(&self, x: &AlgebraElement<Rational>) -> SymbolOperator {
        let mut out = SymbolOperator::zero(self.q());
        for (c, a) in x.coords.iter().zip(&self.action) {
            if !c.is_zero() {
                out = out.add(&a.scale(&Complex::new(c.clone(), Rational::zero())));
            }
        }
        out
    }
}

fn pairing_form(g: &GradedLieAlgebra, l: &DualElement<Rational>) -> Matrix<Rational> {
    let d = g.dim();
    let mut b = vec![vec![Rational::zero(); d]; d];
    for (i, j, k, c) in g.entries() {
        let v = &c * &l.coords[k];
        b[i][j] += &v;
        b[j][i] -= &v;
    }
    b
}

fn rank(rows: &Matrix<Rational>, ncols: usize) -> usize {
    let mut e = Echelon::new(ncols, 0.0);
    for r in rows {
        e.insert(r, None);
    }
    e.rank()
}

/// Polarizing subalgebra `Σ_j rad(ℓ|V_j)` along the ideal flag
/// `V_j = span(e_{d−j}, …, e_{d−1})` (basis ordered by weight).
pub fn vergne_polarization(g: &GradedLieAlgebra, l: &DualElement<Rational>) -> Vec<Vec<Rational>> {
    let d = g.dim();
    let b = pairing_form(g, l);
    let mut span = Echelon::new(d, 0.0);
    let mut basis = Vec::new();
    for j in 1..=d {
        let idx: Vec<usize> = (d - j..d).collect();
        // v ∈ rad iff Σ_a v_a B[a][u] = 0 for every u in V.
        let rows: Vec<Vec<Rational>> = idx.iter().map(|&u| idx.iter().map(|&a| b[a][u].clone()).collect()).collect();
        for v in nullspace(&rows, idx.len()) {
            let mut full = vec![Rational::zero(); d];
            for (c, &a) in v.into_iter().zip(&idx) {
                full[a] = c;
            }
            if span.insert(&full, None) {
                basis.push(full);
            }
        }
    }
    basis
}

type PolyVec = Vec<Poly>;

fn mat_poly_vec(m: &Matrix<Rational>, v: &PolyVec, nv: usize) -> PolyVec {
    m.iter()
        .map(|row| {
            let mut acc = MultiPoly::zero(nv);
            for (c, p) in row.iter().zip(v) {
                if !c.is_zero() && !p.is_zero() {
                    acc = acc.add(&p.scale(c));
                }
            }
            acc
        })
        .collect()
}

/// `exp(s_var · ad Y) v` with `ad` the matrix of `ad Y`.
fn ad_exp(ad: &Matrix<Rational>, var: usize, v: &PolyVec, nv: usize) -> PolyVec {
    let s = MultiPoly::var(nv, var);
    let mut out = v.clone();
    let mut term = v.clone();
    let mut k = 1;
    loop {
        term = mat_poly_vec(ad, &term, nv);
        if term.iter().all(|p| p.is_zero()) {
            return out;
        }
        let f = s.scale(&(Rational::one() / int(k)));
        term = term.iter().map(|p| p.mul(&f)).collect();
        for (o, t) in out.iter_mut().zip(&term) {
            *o = o.add(t);
        }
        k += 1;
    }
}

pub fn induce_representation(g: &GradedLieAlgebra, l: &DualElement<Rational>) -> Result<InducedRep> {
    let d = g.dim();
    if l.dim() != d {
        return Err(Error::DimensionMismatch(format!("functional of length {} on a {d}-dimensional algebra", l.dim())));
    }
    let polarization = vergne_polarization(g, l);
    let b = pairing_form(g, l);
    let q = rank(&b, d) / 2;
    if polarization.len() != d - q {
        return Err(Error::Internal(format!("polarization has dimension {} instead of {}", polarization.len(), d - q)));
    }

    // Y_j: basis vectors, highest index first, that enlarge p + V_j.
    let mut grow = Echelon::new(d, 0.0);
    for v in &polarization {
        grow.insert(v, None);
    }
    let mut coexponential = Vec::new();
    for i in (0..d).rev() {
        let e = AlgebraElement::<Rational>::basis(d, i).coords;
        if grow.insert(&e, None) {
            coexponential.push(i);
        }
    }
    if coexponential.len() != q {
        return Err(Error::Internal("coexponential basis has the wrong size".into()));
    }

    // Adapted basis [p, Y_1..Y_q]; coordinates through tagged reduction.
    let mut adapted = Echelon::new(d, 0.0);
    for (t, v) in polarization.iter().enumerate() {
        adapted.insert(v, Some(t));
    }
    for (j, &i) in coexponential.iter().enumerate() {
        adapted.insert(&AlgebraElement::<Rational>::basis(d, i).coords, Some(d - q + j));
    }
    // inv[a][k] = coordinate a of e_k.
    let mut inv = vec![vec![Rational::zero(); d]; d];
    #[allow(clippy::needless_range_loop)]
    for k in 0..d {
        let red = adapted.reduce(&AlgebraElement::<Rational>::basis(d, k).coords);
        for (a, c) in red.coeffs {
            inv[a][k] = c;
        }
    }
    let l_on_p: Vec<Rational> = polarization.iter().map(|v| v.iter().zip(&l.coords).map(|(a, b)| a * b).sum()).collect();

    let ads: Vec<Matrix<Rational>> =
        coexponential.iter().map(|&i| g.ad_matrix::<Rational>(&AlgebraElement::basis(d, i))).collect();
    let lift = |i: usize| -> PolyVec {
        (0..d).map(|k| MultiPoly::constant(q, if k == i { Rational::one() } else { Rational::zero() })).collect()
    };
    // U_j = Ad(e^{s₁Y₁}⋯e^{s_{j−1}Y_{j−1}}) Y_j in adapted coordinates.
    let u: Vec<PolyVec> = (0..q)
        .map(|j| {
            let mut v = lift(coexponential[j]);
            for a in (0..j).rev() {
                v = ad_exp(&ads[a], a, &v, q);
            }
            mat_poly_vec(&inv, &v, q)
        })
        .collect();

    let mut action = Vec::with_capacity(d);
    for i in 0..d {
        let mut v = lift(i);
        for a in (0..q).rev() {
            v = ad_exp(&ads[a], a, &v, q);
        }
        let mut v = mat_poly_vec(&inv, &v, q);
        let mut op = SymbolOperator::zero(q);
        for j in (0..q).rev() {
            let sj = v[d - q + j].clone();
            if sj.is_zero() {
                continue;
            }
            for (x, uj) in v.iter_mut().zip(&u[j]) {
                *x = x.sub(&uj.mul(&sj));
            }
            let mut alpha = vec![0; q];
            alpha[j] = 1;
            op = op.add(&SymbolOperator::term(alpha, complexify(&sj)));
        }
        if v[d - q..].iter().any(|p| !p.is_zero()) {
            return Err(Error::Internal(format!("triangular solve left a coexponential remainder for e{}", i + 1)));
        }
        let mut ell = MultiPoly::zero(q);
        for (c, p) in l_on_p.iter().zip(&v) {
            if !c.is_zero() {
                ell = ell.add(&p.scale(c));
            }
        }
        op = op.add(&SymbolOperator::multiplication(imaginary(&ell)));
        action.push(op);
    }

    let rep = InducedRep { algebra: g.clone(), functional: l.clone(), polarization, coexponential, action };
    verify(&rep)?;
    Ok(rep)
}

/// Commutator identity `[dπ(e_i), dπ(e_j)] = dπ([e_i, e_j])` and formal
/// skew-adjointness of every `dπ(e_i)`.
pub fn verify(rep: &InducedRep) -> Result<()> {
    let d = rep.algebra.dim();
    for i in 0..d {
        for j in i + 1..d {
            let lhs = rep.action[i].commutator(&rep.action[j]);
            let mut rhs = SymbolOperator::zero(rep.q());
            for (k, c) in rep.algebra.bracket_basis(i, j) {
                rhs = rhs.add(&rep.action[k].scale(&Complex::new(c, Rational::zero())));
            }
            if lhs != rhs {
                return Err(Error::Internal(format!("induced action breaks the bracket [e{}, e{}]", i + 1, j + 1)));
            }
        }
    }
    for (i, a) in rep.action.iter().enumerate() {
        if a.adjoint() != a.scale(&-Complex::<Rational>::one()) {
            return Err(Error::Internal(format!("induced action of e{} is not skew-adjoint", i + 1)));
        }
    }
    Ok(())
}
