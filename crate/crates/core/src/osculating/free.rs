//! Free graded nilpotent Lie algebras in the Lyndon basis.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use super::algebra::GradedLieAlgebra;
use crate::error::{Error, Result};
use crate::scalar::Rational;

pub const DEFAULT_FREE_CAP: usize = 500;

/// How a basis element is built from earlier ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BracketTree {
    Generator(usize),
    /// `[basis[left], basis[right]]`.
    Bracket(usize, usize),
}

#[derive(Clone, Debug)]
pub struct FreeNilpotent {
    pub algebra: GradedLieAlgebra,
    /// Lyndon word of each basis element.
    pub words: Vec<Vec<usize>>,
    pub trees: Vec<BracketTree>,
    pub generator_weights: Vec<u32>,
}

type Assoc = BTreeMap<Vec<usize>, Rational>;

fn assoc_mul(a: &Assoc, b: &Assoc) -> Assoc {
    let mut out = Assoc::new();
    for (wa, ca) in a {
        for (wb, cb) in b {
            let mut w = wa.clone();
            w.extend_from_slice(wb);
            *out.entry(w).or_insert_with(Rational::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn assoc_commutator(a: &Assoc, b: &Assoc) -> Assoc {
    let mut out = assoc_mul(a, b);
    for (w, c) in assoc_mul(b, a) {
        *out.entry(w).or_insert_with(Rational::zero) -= c;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

pub fn generator_name(i: usize, count: usize) -> String {
    if count <= 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("g{}", i + 1)
    }
}

/// Free Lie algebra on generators of the given weights, truncated to
/// weighted degree ≤ `depth`.
pub fn free_nilpotent(generator_weights: &[u32], depth: u32) -> Result<FreeNilpotent> {
    free_nilpotent_capped(generator_weights, depth, DEFAULT_FREE_CAP)
}

pub fn free_nilpotent_capped(generator_weights: &[u32], depth: u32, cap: usize) -> Result<FreeNilpotent> {
    let g = generator_weights.len();
    if g == 0 {
        return Err(Error::InvalidInput("no generators".into()));
    }
    if let Some(w) = generator_weights.iter().find(|&&w| w == 0 || w > depth) {
        return Err(Error::InvalidInput(format!("generator weight {w} outside 1..={depth}")));
    }
    // Lyndon words with their standard factorization, built by weight:
    // uv is Lyndon with standard factorization (u, v) iff u < v and either
    // u is a letter or the right factor of u is ≥ v.
    let mut words: Vec<Vec<usize>> = Vec::new();
    let mut weights: Vec<u32> = Vec::new();
    let mut trees: Vec<BracketTree> = Vec::new();
    for (i, &w) in generator_weights.iter().enumerate() {
        words.push(vec![i]);
        weights.push(w);
        trees.push(BracketTree::Generator(i));
    }
    for total in 2..=depth {
        let mut fresh: Vec<(Vec<usize>, usize, usize)> = Vec::new();
        for u in 0..words.len() {
            for v in 0..words.len() {
                if weights[u] + weights[v] != total || words[u] >= words[v] {
                    continue;
                }
                let ok = match trees[u] {
                    BracketTree::Generator(_) => true,
                    BracketTree::Bracket(_, r) => words[r] >= words[v],
                };
                if ok {
                    let mut w = words[u].clone();
                    w.extend_from_slice(&words[v]);
                    fresh.push((w, u, v));
                }
            }
        }
        fresh.sort();
        for (w, u, v) in fresh {
            words.push(w);
            weights.push(total);
            trees.push(BracketTree::Bracket(u, v));
            if words.len() > cap {
                return Err(Error::FreeAlgebraTooLarge { dim: words.len(), cap });
            }
        }
    }
    if words.len() > cap {
        return Err(Error::FreeAlgebraTooLarge { dim: words.len(), cap });
    }

    // Canonical order: weight, length, lex.
    let mut order: Vec<usize> = (0..words.len()).collect();
    order.sort_by(|&a, &b| weights[a].cmp(&weights[b]).then(words[a].len().cmp(&words[b].len())).then(words[a].cmp(&words[b])));
    let mut pos = vec![0; words.len()];
    for (new, &old) in order.iter().enumerate() {
        pos[old] = new;
    }
    let words: Vec<Vec<usize>> = order.iter().map(|&o| words[o].clone()).collect();
    let weights: Vec<u32> = order.iter().map(|&o| weights[o]).collect();
    let trees: Vec<BracketTree> = order
        .iter()
        .map(|&o| match trees[o] {
            BracketTree::Generator(i) => BracketTree::Generator(i),
            BracketTree::Bracket(u, v) => BracketTree::Bracket(pos[u], pos[v]),
        })
        .collect();

    // Expansions in the free associative algebra; each has leading
    // (lexicographically smallest) word equal to its Lyndon word.
    let mut polys: Vec<Assoc> = vec![Assoc::new(); words.len()];
    let mut done = vec![false; words.len()];
    fn expand(i: usize, trees: &[BracketTree], polys: &mut [Assoc], done: &mut [bool]) {
        if done[i] {
            return;
        }
        let p = match trees[i] {
            BracketTree::Generator(a) => Assoc::from([(vec![a], Rational::one())]),
            BracketTree::Bracket(u, v) => {
                expand(u, trees, polys, done);
                expand(v, trees, polys, done);
                assoc_commutator(&polys[u], &polys[v])
            }
        };
        polys[i] = p;
        done[i] = true;
    }
    for i in 0..words.len() {
        expand(i, &trees, &mut polys, &mut done);
    }
    let index: HashMap<&Vec<usize>, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();

    let mut entries = Vec::new();
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            if weights[i] + weights[j] > depth {
                continue;
            }
            let mut rem = assoc_commutator(&polys[i], &polys[j]);
            while let Some((w, c)) = rem.iter().next().map(|(w, c)| (w.clone(), c.clone())) {
                let &k = index.get(&w).ok_or_else(|| Error::Internal(format!("leading word {w:?} is not a basis word")))?;
                entries.push((i, j, k, c.clone()));
                for (x, a) in &polys[k] {
                    *rem.entry(x.clone()).or_insert_with(Rational::zero) -= &c * a;
                }
                rem.retain(|_, v| !v.is_zero());
            }
        }
    }
    let mut labels: Vec<String> = Vec::with_capacity(words.len());
    for t in &trees {
        labels.push(match t {
            BracketTree::Generator(a) => generator_name(*a, g),
            BracketTree::Bracket(u, v) => format!("[{},{}]", labels[*u], labels[*v]),
        });
    }
    let algebra = GradedLieAlgebra::new(weights, depth, entries)?.with_labels(labels);
    Ok(FreeNilpotent { algebra, words, trees, generator_weights: generator_weights.to_vec() })
}

impl FreeNilpotent {
    pub fn dim(&self) -> usize {
        self.words.len()
    }

    /// Evaluates every basis bracket tree on concrete generator values.
    pub fn realize<V: Clone>(&self, generators: &[V], mut bracket: impl FnMut(&V, &V) -> Result<V>) -> Result<Vec<V>> {
        if generators.len() != self.generator_weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} generator values for {} generators",
                generators.len(),
                self.generator_weights.len()
            )));
        }
        let mut out: Vec<V> = Vec::with_capacity(self.dim());
        for t in &self.trees {
            let v = match t {
                BracketTree::Generator(a) => generators[*a].clone(),
                BracketTree::Bracket(u, v) => bracket(&out[*u], &out[*v])?,
            };
            out.push(v);
        }
        Ok(out)
    }
}
