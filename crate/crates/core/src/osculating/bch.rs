//! Truncated Baker–Campbell–Hausdorff series in Dynkin form, evaluated in
//! any Lie algebra that implements [`LieOps`].

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::scalar::{int, Rational};

/// Which product the series computes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BchConvention {
    /// `X + Y − ½[X,Y] + …`, i.e. `log(e^Y e^X)`: the group law of
    /// right-invariant vector fields.
    #[default]
    RightInvariant,
    /// `X + Y + ½[X,Y] + …`, i.e. `log(e^X e^Y)`.
    LeftInvariant,
}

pub trait LieOps {
    type Elem: Clone;

    fn zero(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn scale(&self, a: &Self::Elem, q: &Rational) -> Self::Elem;
    fn bracket(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
}

/// Words over {X=0, Y=1} with coefficients such that the degree-≤n part of
/// the series equals `Σ c_w r(w)` with `r(a₁…a_k) = [a₁,[a₂,…,a_k]]`.
#[derive(Clone, Debug)]
pub struct BchSeries {
    pub order: usize,
    pub terms: Vec<(Vec<u8>, Rational)>,
}

type Word = Vec<u8>;

fn mul_trunc(a: &BTreeMap<Word, Rational>, b: &BTreeMap<Word, Rational>, n: usize) -> BTreeMap<Word, Rational> {
    let mut out: BTreeMap<Word, Rational> = BTreeMap::new();
    for (wa, ca) in a {
        for (wb, cb) in b {
            if wa.len() + wb.len() > n {
                continue;
            }
            let mut w = wa.clone();
            w.extend_from_slice(wb);
            let e = out.entry(w).or_insert_with(Rational::zero);
            *e += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn exp_letter(letter: u8, n: usize) -> BTreeMap<Word, Rational> {
    let mut out = BTreeMap::new();
    let mut fact = Rational::one();
    for k in 0..=n {
        if k > 0 {
            fact *= int(k as i64);
        }
        out.insert(vec![letter; k], Rational::one() / fact.clone());
    }
    out
}

impl BchSeries {
    /// `log(e^X e^Y)` truncated at word length n, in right-nested Dynkin form.
    pub fn left_invariant(n: usize) -> Self {
        let prod = mul_trunc(&exp_letter(0, n), &exp_letter(1, n), n);
        let mut a = prod;
        a.remove(&Vec::new());
        let mut log: BTreeMap<Word, Rational> = BTreeMap::new();
        let mut power = a.clone();
        for k in 1..=n {
            let sign = if k % 2 == 1 { Rational::one() } else { -Rational::one() };
            let c = sign / int(k as i64);
            for (w, v) in &power {
                let e = log.entry(w.clone()).or_insert_with(Rational::zero);
                *e += &c * v;
            }
            power = mul_trunc(&power, &a, n);
            if power.is_empty() {
                break;
            }
        }
        let mut terms = Vec::new();
        for (w, c) in log {
            if c.is_zero() {
                continue;
            }
            let k = w.len();
            if k >= 2 && w[k - 1] == w[k - 2] {
                continue;
            }
            terms.push((w, c / int(k as i64)));
        }
        terms.sort_by(|x, y| x.0.len().cmp(&y.0.len()).then_with(|| x.0.cmp(&y.0)));
        BchSeries { order: n, terms }
    }

    pub fn new(n: usize, conv: BchConvention) -> Self {
        let s = Self::left_invariant(n);
        match conv {
            BchConvention::LeftInvariant => s,
            BchConvention::RightInvariant => {
                BchSeries { order: n, terms: s.terms.into_iter().map(|(w, c)| (w.iter().map(|l| 1 - l).collect(), c)).collect() }
            }
        }
    }

    /// Shared, lazily built series.
    pub fn cached(n: usize, conv: BchConvention) -> Arc<BchSeries> {
        type Cache = Mutex<HashMap<(usize, BchConvention), Arc<BchSeries>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap();
        guard.entry((n, conv)).or_insert_with(|| Arc::new(BchSeries::new(n, conv))).clone()
    }

    pub fn eval<L: LieOps>(&self, ops: &L, x: &L::Elem, y: &L::Elem) -> L::Elem {
        let mut memo: HashMap<Vec<u8>, L::Elem> = HashMap::new();
        let mut acc = ops.zero();
        for (w, c) in &self.terms {
            let r = right_nested(ops, x, y, w, &mut memo);
            acc = ops.add(&acc, &ops.scale(&r, c));
        }
        acc
    }
}

fn right_nested<L: LieOps>(ops: &L, x: &L::Elem, y: &L::Elem, w: &[u8], memo: &mut HashMap<Vec<u8>, L::Elem>) -> L::Elem {
    if w.len() == 1 {
        return if w[0] == 0 { x.clone() } else { y.clone() };
    }
    if let Some(v) = memo.get(w) {
        return v.clone();
    }
    let inner = right_nested(ops, x, y, &w[1..], memo);
    let head = if w[0] == 0 { x } else { y };
    let v = ops.bracket(head, &inner);
    memo.insert(w.to_vec(), v.clone());
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn coeff(s: &BchSeries, w: &[u8]) -> Rational {
        s.terms.iter().find(|(x, _)| x == w).map(|(_, c)| c.clone()).unwrap_or_else(Rational::zero)
    }

    #[test]
    fn low_order_terms() {
        let s = BchSeries::left_invariant(3);
        assert_eq!(coeff(&s, &[0]), rat(1, 1));
        assert_eq!(coeff(&s, &[1]), rat(1, 1));
        // ½[X,Y] is split over the words XY (¼) and YX (−¼).
        assert_eq!(coeff(&s, &[0, 1]) - coeff(&s, &[1, 0]), rat(1, 2));
    }
}
