//! Weighted filtrations generated by bracket words, Hörmander checks and
//! fiber dimensions of `Fⁱ/(Fⁱ⁻¹ + I_p Fⁱ)` by jet linear algebra.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Echelon;
use crate::polyfield::{Monomial, VectorField};
use crate::scalar::{Field, Rational, Ring};
use crate::PolyVectorField;

pub const DEFAULT_WORD_CAP: usize = 10_000;
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct WeightedGenerators {
    pub fields: Vec<PolyVectorField>,
    pub weights: Vec<u32>,
    pub depth: u32,
    /// `Fᴺ` is the full module of vector fields by declaration rather than
    /// by bracket generation.
    pub declared_full: bool,
}

impl WeightedGenerators {
    pub fn new(fields: Vec<PolyVectorField>, weights: Vec<u32>, depth: u32) -> Result<Self> {
        if fields.is_empty() {
            return Err(Error::InvalidInput("at least one generator is required".into()));
        }
        if fields.len() != weights.len() {
            return Err(Error::InvalidInput(format!("{} generators but {} weights", fields.len(), weights.len())));
        }
        let dim = fields[0].dim();
        if fields.iter().any(|f| f.dim() != dim) {
            return Err(Error::DimensionMismatch("generators live on different R^m".into()));
        }
        if let Some(w) = weights.iter().find(|&&w| w == 0 || w > depth) {
            return Err(Error::InvalidInput(format!("weight {w} outside 1..={depth}")));
        }
        Ok(WeightedGenerators { fields, weights, depth, declared_full: false })
    }

    pub fn with_declared_full(mut self, full: bool) -> Self {
        self.declared_full = full;
        self
    }

    pub fn dim(&self) -> usize {
        self.fields[0].dim()
    }
}

/// Left-nested bracket `[X_{i₁},[X_{i₂},…,X_{i_k}]…]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BracketWord {
    pub letters: Vec<usize>,
    pub weight: u32,
    pub field: PolyVectorField,
}

impl BracketWord {
    /// Recomputes the bracket from the letters.
    pub fn realize(gen: &WeightedGenerators, letters: &[usize]) -> Result<PolyVectorField> {
        let (last, rest) = letters.split_last().ok_or_else(|| Error::InvalidInput("empty word".into()))?;
        let mut f = gen.fields[*last].clone();
        for &a in rest.iter().rev() {
            f = gen.fields[a].bracket(&f)?;
        }
        Ok(f)
    }
}

#[derive(Clone, Debug)]
pub struct Filtration {
    pub depth: u32,
    pub full_at_depth: bool,
    /// Nonzero, pairwise distinct words sorted by (weight, length, letters).
    pub words: Vec<BracketWord>,
}

impl Filtration {
    /// Words of weight ≤ j.
    pub fn level(&self, j: u32) -> Vec<&BracketWord> {
        self.words.iter().filter(|w| w.weight <= j).collect()
    }

    pub fn levels(&self) -> Vec<Vec<&BracketWord>> {
        (1..=self.depth).map(|j| self.level(j)).collect()
    }

    pub fn max_degree(&self) -> u32 {
        self.words.iter().filter_map(|w| w.field.degree()).max().unwrap_or(0)
    }
}

pub fn generate_filtration(gen: &WeightedGenerators) -> Result<Filtration> {
    generate_filtration_capped(gen, DEFAULT_WORD_CAP)
}

/// Words are built weight by weight. A word whose field is a scalar multiple
/// of an earlier one is dropped together with its extensions, which would only repeat
/// extensions of the earlier, lighter word.
pub fn generate_filtration_capped(gen: &WeightedGenerators, cap: usize) -> Result<Filtration> {
    let mut words: Vec<BracketWord> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut by_weight: Vec<Vec<usize>> = vec![Vec::new(); gen.depth as usize + 1];
    for s in 1..=gen.depth {
        let mut cands: Vec<(Vec<usize>, PolyVectorField)> = Vec::new();
        for (a, &w) in gen.weights.iter().enumerate() {
            if w == s {
                cands.push((vec![a], gen.fields[a].clone()));
            } else if w < s {
                for &wi in &by_weight[(s - w) as usize] {
                    let inner = &words[wi];
                    let f = gen.fields[a].bracket(&inner.field)?;
                    let mut letters = vec![a];
                    letters.extend_from_slice(&inner.letters);
                    cands.push((letters, f));
                }
            }
        }
        cands.sort_by(|x, y| x.0.len().cmp(&y.0.len()).then_with(|| x.0.cmp(&y.0)));
        for (letters, field) in cands {
            if field.is_zero() {
                continue;
            }
            // Scalar multiples span the same submodule.
            let key = normalize(&field).0.to_string();
            if seen.contains_key(&key) {
                continue;
            }
            if words.len() >= cap {
                return Err(Error::BracketBlowup(cap));
            }
            seen.insert(key, words.len());
            by_weight[s as usize].push(words.len());
            words.push(BracketWord { letters, weight: s, field });
        }
    }
    Ok(Filtration { depth: gen.depth, full_at_depth: gen.declared_full, words })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HormanderCheck {
    pub holds: bool,
    /// True when only the declared `Fᴺ = 𝒳` makes the condition hold.
    pub by_convention: bool,
    /// Letters of words whose values at p span the tangent space.
    pub witness: Vec<Vec<usize>>,
}

pub fn check_hormander<T: Field>(gen: &WeightedGenerators, p: &[T], tol: f64) -> Result<HormanderCheck> {
    let filt = generate_filtration(gen)?;
    check_hormander_with(gen, &filt, p, tol)
}

pub fn check_hormander_with<T: Field>(gen: &WeightedGenerators, filt: &Filtration, p: &[T], tol: f64) -> Result<HormanderCheck> {
    let m = gen.dim();
    if p.len() != m {
        return Err(Error::DimensionMismatch(format!("point of length {} on R^{m}", p.len())));
    }
    let mut ech = Echelon::<T>::new(m, tol);
    let mut witness = Vec::new();
    for w in &filt.words {
        let v = convert_field::<T>(&w.field).eval(p)?;
        if ech.insert(&v, None) {
            witness.push(w.letters.clone());
            if ech.rank() == m {
                break;
            }
        }
    }
    let spans = ech.rank() == m;
    Ok(HormanderCheck { holds: spans || gen.declared_full, by_convention: !spans && gen.declared_full, witness })
}

pub fn convert_field<T: Ring>(f: &PolyVectorField) -> VectorField<T> {
    f.map_coeffs(|c| T::from_rational(c))
}

/// Default jet order: the depth, raised to the highest polynomial degree
/// among the bracket words so that no word is truncated away.
pub fn default_jet_order(gen: &WeightedGenerators, filt: &Filtration) -> u32 {
    gen.depth.max(filt.max_degree())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisLabel {
    Word(Vec<usize>),
    /// Coordinate field `∂_a`, available at the declared-full depth.
    Coordinate(usize),
}

#[derive(Clone, Debug)]
pub struct BasisElement<T> {
    pub weight: u32,
    pub label: BasisLabel,
    /// Representative normalized so its leading coefficient is 1.
    pub field: VectorField<T>,
    /// `field = scale · (field of the label)`.
    pub scale: T,
}

#[derive(Clone, Debug)]
struct LevelGen<T> {
    /// Field recentered at p (coordinates u = x − p).
    shifted: VectorField<T>,
}

/// Fiber data at a point: per-level quotient spans plus the chosen basis.
#[derive(Clone, Debug)]
pub struct FiberAnalysis<T> {
    pub point: Vec<T>,
    pub jet_order: u32,
    pub depth: u32,
    pub dims: Vec<usize>,
    pub basis: Vec<BasisElement<T>>,
    monos: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
    /// Echelon of level i holds `Fⁱ⁻¹ + I_pFⁱ` untagged and the level-i
    /// basis tagged by its global basis index.
    levels: Vec<Echelon<T>>,
}

pub fn analyze_fibers<T: Field>(
    gen: &WeightedGenerators,
    filt: &Filtration,
    p: &[T],
    k: u32,
    tol: f64,
) -> Result<FiberAnalysis<T>> {
    let m = gen.dim();
    if p.len() != m {
        return Err(Error::DimensionMismatch(format!("point of length {} on R^{m}", p.len())));
    }
    let monos = Monomial::all_up_to(m, k);
    let index: HashMap<Monomial, usize> = monos.iter().cloned().enumerate().map(|(i, mo)| (mo, i)).collect();
    let ncols = monos.len() * m;
    let n = gen.depth;

    // (weight, label, field) for every module generator; coordinate fields
    // enter at the declared-full depth.
    let mut gens: Vec<(u32, BasisLabel, VectorField<T>)> =
        filt.words.iter().map(|w| (w.weight, BasisLabel::Word(w.letters.clone()), convert_field::<T>(&w.field))).collect();
    if gen.declared_full {
        for a in 0..m {
            gens.push((n, BasisLabel::Coordinate(a), VectorField::coordinate(m, a)));
        }
    }
    let shifted: Vec<LevelGen<T>> = gens.iter().map(|(_, _, f)| LevelGen { shifted: f.recenter(p) }).collect();

    let mut dims = Vec::with_capacity(n as usize);
    let mut basis: Vec<BasisElement<T>> = Vec::new();
    let mut levels = Vec::with_capacity(n as usize);
    let mut ctx = JetCtx { monos: &monos, index: &index, m, k };
    for i in 1..=n {
        let mut ech = Echelon::<T>::new(ncols, tol);
        let has_new = gens.iter().any(|g| g.0 == i);
        if has_new {
            for (g, s) in gens.iter().zip(&shifted) {
                if ech.rank() == ncols {
                    break;
                }
                let min_shift = if g.0 < i {
                    0
                } else if g.0 == i {
                    1
                } else {
                    continue;
                };
                ctx.insert_multiples(&mut ech, &s.shifted, min_shift);
            }
        }
        let mut count = 0;
        for (g, s) in gens.iter().zip(&shifted) {
            if g.0 != i {
                continue;
            }
            let v = ctx.jet_vector(&s.shifted);
            let tag = basis.len();
            if ech.insert(&v, Some(tag)) {
                let (field, scale) = normalize(&g.2);
                basis.push(BasisElement { weight: i, label: g.1.clone(), field, scale });
                count += 1;
            }
        }
        dims.push(count);
        levels.push(ech);
    }
    Ok(FiberAnalysis { point: p.to_vec(), jet_order: k, depth: n, dims, basis, monos, index, levels })
}

struct JetCtx<'a> {
    monos: &'a [Monomial],
    index: &'a HashMap<Monomial, usize>,
    m: usize,
    k: u32,
}

impl JetCtx<'_> {
    fn jet_vector<T: Ring>(&self, f: &VectorField<T>) -> Vec<T> {
        self.shifted_vector(f, &Monomial::one(self.m)).unwrap_or_else(|| vec![T::zero(); self.monos.len() * self.m])
    }

    /// K-jet of `u^β · f`, or `None` when it vanishes identically.
    fn shifted_vector<T: Ring>(&self, f: &VectorField<T>, beta: &Monomial) -> Option<Vec<T>> {
        let nm = self.monos.len();
        let mut v = vec![T::zero(); nm * self.m];
        let mut any = false;
        let bdeg = beta.degree();
        for (i, c) in f.components().iter().enumerate() {
            for (mo, a) in c.terms() {
                if mo.degree() + bdeg > self.k {
                    continue;
                }
                let j = self.index[&mo.mul(beta)];
                v[i * nm + j] = a.clone();
                any = true;
            }
        }
        any.then_some(v)
    }

    fn insert_multiples<T: Field>(&mut self, ech: &mut Echelon<T>, f: &VectorField<T>, min_shift: u32) {
        let low = f.components().iter().filter_map(|c| c.terms().next().map(|(mo, _)| mo.degree())).min();
        let Some(low) = low else { return };
        let ncols = ech.ncols();
        for beta in self.monos {
            let d = beta.degree();
            if d < min_shift || d + low > self.k {
                continue;
            }
            if ech.rank() == ncols {
                return;
            }
            if let Some(v) = self.shifted_vector(f, beta) {
                ech.insert(&v, None);
            }
        }
    }
}

fn normalize<T: Field>(f: &VectorField<T>) -> (VectorField<T>, T) {
    let lead = f
        .components()
        .iter()
        .find(|c| !c.is_zero())
        .and_then(|c| c.terms().next_back().map(|(_, a)| a.clone()))
        .unwrap_or_else(T::one);
    let s = T::one() / lead;
    (f.scale(&s), s)
}

impl<T: Field> FiberAnalysis<T> {
    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn weights(&self) -> Vec<u32> {
        self.basis.iter().map(|b| b.weight).collect()
    }

    /// Indices of the basis elements of weight `w`.
    pub fn slot(&self, w: u32) -> std::ops::Range<usize> {
        let start = self.basis.iter().position(|b| b.weight == w).unwrap_or(0);
        let len = self.basis.iter().filter(|b| b.weight == w).count();
        start..start + len
    }

    /// Coordinates of the class `[f]_{w,p}` over the full basis (zero
    /// outside the weight-w slot). `None` when `f` is not in `F^w + I_p F^w`
    /// as seen by the jets, which signals a jet order that is too small or
    /// a field outside `F^w`.
    pub fn class_of(&self, f: &VectorField<T>, w: u32) -> Option<Vec<T>> {
        let mut out = vec![T::zero(); self.basis.len()];
        if w == 0 {
            return None;
        }
        if w > self.depth {
            return Some(out);
        }
        let ctx = JetCtx { monos: &self.monos, index: &self.index, m: f.dim(), k: self.jet_order };
        let v = ctx.jet_vector(&f.recenter(&self.point));
        let red = self.levels[(w - 1) as usize].reduce(&v);
        if !red.in_span {
            return None;
        }
        for (tag, c) in red.coeffs {
            // Tagged jets are the unnormalized fields: source = field / scale.
            out[tag] = c / self.basis[tag].scale.clone();
        }
        Some(out)
    }

    pub fn report(&self, stable: bool) -> FiberReport {
        let mut basis_words = vec![Vec::new(); self.depth as usize];
        for b in &self.basis {
            basis_words[(b.weight - 1) as usize].push(b.label.clone());
        }
        FiberReport {
            point: self.point.iter().map(Ring::to_text).collect(),
            dims: self.dims.clone(),
            total_dim: self.total_dim(),
            basis_words,
            jet_order: self.jet_order,
            stable,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberReport {
    pub point: Vec<String>,
    pub dims: Vec<usize>,
    pub total_dim: usize,
    pub basis_words: Vec<Vec<BasisLabel>>,
    pub jet_order: u32,
    /// Dims agree between jet orders K and K+1.
    pub stable: bool,
}

/// Fiber dimensions with the K vs K+1 stability check. `k = None` uses
/// [`default_jet_order`].
pub fn fiber_dims<T: Field>(gen: &WeightedGenerators, p: &[T], k: Option<u32>, tol: f64) -> Result<FiberReport> {
    let filt = generate_filtration(gen)?;
    let k = k.unwrap_or_else(|| default_jet_order(gen, &filt));
    let a = analyze_fibers(gen, &filt, p, k, tol)?;
    let b = analyze_fibers(gen, &filt, p, k + 1, tol)?;
    Ok(a.report(a.dims == b.dims))
}

/// One representative per fiber-basis class at p, with weights.
#[derive(Clone, Debug)]
pub struct GradedBasisData<T> {
    pub point: Vec<T>,
    pub weights: Vec<u32>,
    pub fields: Vec<VectorField<T>>,
    pub labels: Vec<BasisLabel>,
    pub dims: Vec<usize>,
    pub jet_order: u32,
    pub stable: bool,
}

pub fn minimal_graded_basis<T: Field>(gen: &WeightedGenerators, p: &[T], k: Option<u32>, tol: f64) -> Result<GradedBasisData<T>> {
    let filt = generate_filtration(gen)?;
    if !check_hormander_with(gen, &filt, p, tol)?.holds {
        return Err(Error::HormanderFails);
    }
    let k = k.unwrap_or_else(|| default_jet_order(gen, &filt));
    let a = analyze_fibers(gen, &filt, p, k, tol)?;
    let b = analyze_fibers(gen, &filt, p, k + 1, tol)?;
    Ok(GradedBasisData {
        point: p.to_vec(),
        weights: a.weights(),
        fields: a.basis.iter().map(|e| e.field.clone()).collect(),
        labels: a.basis.iter().map(|e| e.label.clone()).collect(),
        dims: a.dims.clone(),
        jet_order: k,
        stable: a.dims == b.dims,
    })
}

impl GradedBasisData<Rational> {
    pub fn fields_f64(&self) -> Vec<VectorField<f64>> {
        self.fields.iter().map(|f| f.to_f64()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfield::parse_field;
    use crate::scalar::int;

    fn gen(fields: &[&str], weights: &[u32], depth: u32, dim: usize) -> WeightedGenerators {
        let f = fields.iter().map(|s| parse_field(s, dim).unwrap()).collect();
        WeightedGenerators::new(f, weights.to_vec(), depth).unwrap()
    }

    #[test]
    fn heisenberg_levels() {
        let g = gen(&["dx", "x*dy"], &[1, 2], 3, 2);
        let f = generate_filtration(&g).unwrap();
        let l3 = f.level(3);
        assert_eq!(l3.len(), 3);
        assert_eq!(l3[2].letters, vec![0, 1]);
        assert_eq!(l3[2].field, parse_field("dy", 2).unwrap());
        assert_eq!(f.level(2).len(), 2);
    }

    #[test]
    fn heisenberg_fibers() {
        let g = gen(&["dx", "x*dy"], &[1, 2], 3, 2);
        let r0 = fiber_dims(&g, &[int(0), int(5)], None, 0.0).unwrap();
        assert_eq!(r0.dims, vec![1, 1, 1]);
        assert!(r0.stable);
        let r1 = fiber_dims(&g, &[int(2), int(5)], None, 0.0).unwrap();
        assert_eq!(r1.dims, vec![1, 1, 0]);
    }

    #[test]
    fn blowup_guard() {
        let g = gen(&["x^2*dy", "y^2*dx"], &[1, 1], 8, 2);
        assert!(matches!(generate_filtration_capped(&g, 5), Err(Error::BracketBlowup(5))));
    }

    #[test]
    fn validation() {
        let f = vec![parse_field("dx", 1).unwrap()];
        assert!(WeightedGenerators::new(f.clone(), vec![2], 1).is_err());
        assert!(WeightedGenerators::new(f, vec![1, 1], 1).is_err());
        assert!(WeightedGenerators::new(vec![], vec![], 1).is_err());
    }
}
