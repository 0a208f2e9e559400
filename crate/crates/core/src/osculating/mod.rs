//! Osculating graded nilpotent Lie algebras and their group structure.

pub mod algebra;
pub mod bch;
pub mod free;

pub use algebra::{AlgebraElement, AlgebraJson, AlgebraOps, DualElement, GradedLieAlgebra, Matrix};
pub use bch::{BchConvention, BchSeries, LieOps};
pub use free::{free_nilpotent, free_nilpotent_capped, BracketTree, FreeNilpotent, DEFAULT_FREE_CAP};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::filtration::{
    analyze_fibers, check_hormander_with, default_jet_order, generate_filtration, BasisLabel, FiberAnalysis, WeightedGenerators,
};
use crate::polyfield::{basis_name, VectorField};
use crate::scalar::Rational;

/// `gr(F)_p` together with the fiber data it was read from.
#[derive(Clone, Debug)]
pub struct Osculating {
    pub algebra: GradedLieAlgebra,
    pub analysis: FiberAnalysis<Rational>,
    /// Fiber dims agree between jet orders K and K+1.
    pub stable: bool,
}

/// Text label of a fiber basis element, e.g. `[X1,[X1,X2]]` or `d/dy`.
pub fn basis_label_text(label: &BasisLabel, dim: usize) -> String {
    match label {
        BasisLabel::Coordinate(a) => basis_name(dim, *a),
        BasisLabel::Word(letters) => {
            let mut s = format!("X{}", letters[letters.len() - 1] + 1);
            for l in letters[..letters.len() - 1].iter().rev() {
                s = format!("[X{},{}]", l + 1, s);
            }
            s
        }
    }
}

/// Structure constants of the osculating algebra at a rational point.
/// `k = None` uses the default jet order.
pub fn osculating_at(gen: &WeightedGenerators, p: &[Rational], k: Option<u32>) -> Result<Osculating> {
    let filt = generate_filtration(gen)?;
    if !check_hormander_with(gen, &filt, p, 0.0)?.holds {
        return Err(Error::HormanderFails);
    }
    let k = k.unwrap_or_else(|| default_jet_order(gen, &filt));
    let analysis = analyze_fibers(gen, &filt, p, k, 0.0)?;
    let stable = analyze_fibers(gen, &filt, p, k + 1, 0.0)?.dims == analysis.dims;
    let basis = &analysis.basis;
    let mut entries = Vec::new();
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            let w = basis[i].weight + basis[j].weight;
            if w > gen.depth {
                continue;
            }
            let b = basis[i].field.bracket(&basis[j].field)?;
            let c = analysis.class_of(&b, w).ok_or(Error::ProjectionResidual { i, j, weight: w })?;
            for (kk, v) in c.into_iter().enumerate() {
                if !v.is_zero() {
                    entries.push((i, j, kk, v));
                }
            }
        }
    }
    let labels = basis.iter().map(|b| basis_label_text(&b.label, gen.dim())).collect();
    let algebra = GradedLieAlgebra::new(analysis.weights(), gen.depth, entries)?.with_labels(labels);
    Ok(Osculating { algebra, analysis, stable })
}

/// The natural map from the free nilpotent algebra on the generators onto
/// `gr(F)_p`, with both homomorphism checks.
#[derive(Clone, Debug)]
pub struct NaturalMap {
    /// Column j holds the class of the j-th free basis element.
    pub matrix: Matrix<Rational>,
    /// Realized fields satisfy the free structure relations exactly.
    pub fields_respect_brackets: bool,
    /// `♮[a,b] = [♮a, ♮b]` at the level of fiber classes.
    pub is_homomorphism: bool,
}

pub fn natural_map(free: &FreeNilpotent, gen: &WeightedGenerators, osc: &Osculating) -> Result<NaturalMap> {
    if free.generator_weights != gen.weights {
        return Err(Error::InvalidInput("free algebra weights differ from the generator weights".into()));
    }
    let fields = free.realize(&gen.fields, |a, b| a.bracket(b))?;
    let weights = free.algebra.weights();
    let d = osc.algebra.dim();
    let mut cols: Vec<Vec<Rational>> = Vec::with_capacity(free.dim());
    for (f, &w) in fields.iter().zip(weights) {
        let c =
            osc.analysis.class_of(f, w).ok_or_else(|| Error::Internal(format!("free basis field of weight {w} has no class")))?;
        cols.push(c);
    }
    let matrix: Matrix<Rational> = (0..d).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();

    let n = free.dim();
    let mut fields_ok = true;
    let mut hom_ok = true;
    for i in 0..n {
        for j in i + 1..n {
            if weights[i] + weights[j] > gen.depth {
                continue;
            }
            let lhs = fields[i].bracket(&fields[j])?;
            let mut rhs = VectorField::zero(gen.dim());
            let mut image = AlgebraElement::<Rational>::zero(d);
            for (k, c) in free.algebra.bracket_basis(i, j) {
                rhs = rhs.add(&fields[k].scale(&c));
                image = image.add(&AlgebraElement::new(cols[k].clone()).scale(&c));
            }
            fields_ok &= lhs == rhs;
            let br = osc.algebra.bracket(&AlgebraElement::new(cols[i].clone()), &AlgebraElement::new(cols[j].clone()));
            hom_ok &= br == image;
        }
    }
    Ok(NaturalMap { matrix, fields_respect_brackets: fields_ok, is_homomorphism: hom_ok })
}
