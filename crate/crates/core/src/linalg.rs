//! Incremental row echelon form over exact or floating scalars.

use std::collections::BTreeMap;

use crate::scalar::Field;

/// Row-reduced span of inserted vectors. Each accepted vector may carry a
/// tag; reductions report coefficients on tagged vectors only, so untagged
/// rows act as a subspace being quotiented out.
#[derive(Clone, Debug)]
pub struct Echelon<T> {
    ncols: usize,
    tol: f64,
    rows: Vec<Row<T>>,
}

#[derive(Clone, Debug)]
struct Row<T> {
    pivot: usize,
    data: Vec<T>,
    combo: BTreeMap<usize, T>,
}

/// Outcome of reducing a vector against the current span.
#[derive(Clone, Debug)]
pub struct Reduction<T> {
    pub residual: Vec<T>,
    pub in_span: bool,
    /// `v = Σ coeffs[tag]·(tagged vector) + (untagged part) + residual`.
    pub coeffs: BTreeMap<usize, T>,
}

impl<T: Field> Echelon<T> {
    /// `tol` is the relative zero threshold for floating scalars; exact
    /// scalars ignore it.
    pub fn new(ncols: usize, tol: f64) -> Self {
        Echelon { ncols, tol, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn reduce(&self, v: &[T]) -> Reduction<T> {
        assert_eq!(v.len(), self.ncols, "vector length mismatch");
        let scale = v.iter().map(|c| c.magnitude()).fold(0.0, f64::max);
        let mut r = v.to_vec();
        let mut coeffs: BTreeMap<usize, T> = BTreeMap::new();
        for row in &self.rows {
            let a = r[row.pivot].clone();
            if a.is_zero() {
                continue;
            }
            // Exact rows pivot on their first nonzero; float rows on their largest entry.
            let start = if T::EXACT { row.pivot } else { 0 };
            for (x, y) in r.iter_mut().zip(&row.data).skip(start) {
                if !y.is_zero() {
                    *x = x.clone() - a.clone() * y.clone();
                }
            }
            r[row.pivot] = T::zero();
            for (tag, c) in &row.combo {
                let e = coeffs.entry(*tag).or_insert_with(T::zero);
                *e = e.clone() + a.clone() * c.clone();
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        let in_span = r.iter().all(|c| c.negligible(scale, self.tol));
        Reduction { residual: r, in_span, coeffs }
    }

    pub fn contains(&self, v: &[T]) -> bool {
        self.reduce(v).in_span
    }

    /// Adds `v`; returns false (and changes nothing) if it is already in the span.
    pub fn insert(&mut self, v: &[T], tag: Option<usize>) -> bool {
        let red = self.reduce(v);
        if red.in_span {
            return false;
        }
        let r = red.residual;
        let pivot = if T::EXACT {
            r.iter().position(|c| !c.is_zero()).unwrap()
        } else {
            let mut best = 0;
            for (i, c) in r.iter().enumerate() {
                if c.magnitude() > r[best].magnitude() {
                    best = i;
                }
            }
            best
        };
        let inv = T::one() / r[pivot].clone();
        let mut data: Vec<T> = r.into_iter().map(|c| c * inv.clone()).collect();
        data[pivot] = T::one();
        if !T::EXACT {
            // Entries left behind by cancellation are flushed so they cannot pose as pivots later.
            let eps = self.tol * 1e-3;
            for c in data.iter_mut() {
                if c.magnitude() < eps {
                    *c = T::zero();
                }
            }
            data[pivot] = T::one();
        }
        // combo(new row) = (v − Σ a_k row_k)/r_p, expressed on tags.
        let mut combo: BTreeMap<usize, T> = BTreeMap::new();
        if let Some(t) = tag {
            combo.insert(t, inv.clone());
        }
        for (t, c) in red.coeffs {
            let e = combo.entry(t).or_insert_with(T::zero);
            *e = e.clone() - c * inv.clone();
        }
        combo.retain(|_, c| !c.is_zero());
        self.rows.push(Row { pivot, data, combo });
        true
    }
}

/// Basis of `{v : A v = 0}` for an exact matrix given by rows.
pub fn nullspace<T: Field>(rows: &[Vec<T>], ncols: usize) -> Vec<Vec<T>> {
    let mut a: Vec<Vec<T>> = rows.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = T::one() / a[r][c].clone();
        for x in a[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                let pivot_row = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&pivot_row) {
                    *x = x.clone() - f.clone() * y.clone();
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == a.len() {
            break;
        }
    }
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![T::zero(); ncols];
            v[free] = T::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][free].clone();
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, Rational};

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn nullspace_of_rank_one() {
        let n = nullspace(&[v(&[1, 2, 3])], 3);
        assert_eq!(n.len(), 2);
        for x in n {
            assert_eq!(x[0].clone() + x[1].clone() * int(2) + x[2].clone() * int(3), int(0));
        }
    }

    #[test]
    fn rank_and_membership() {
        let mut e = Echelon::new(3, 0.0);
        assert!(e.insert(&v(&[1, 2, 3]), Some(0)));
        assert!(e.insert(&v(&[0, 1, 1]), Some(1)));
        assert!(!e.insert(&v(&[1, 3, 4]), Some(2)));
        assert_eq!(e.rank(), 2);
        let red = e.reduce(&v(&[2, 5, 7]));
        assert!(red.in_span);
        assert_eq!(red.coeffs.get(&0), Some(&int(2)));
        assert_eq!(red.coeffs.get(&1), Some(&int(1)));
    }

    #[test]
    fn untagged_rows_are_quotiented() {
        let mut e = Echelon::new(2, 0.0);
        e.insert(&v(&[0, 1]), None);
        e.insert(&v(&[1, 1]), Some(7));
        let red = e.reduce(&v(&[3, 10]));
        assert!(red.in_span);
        assert_eq!(red.coeffs.len(), 1);
        assert_eq!(red.coeffs[&7], int(3));
    }

    #[test]
    fn float_threshold() {
        let mut e = Echelon::<f64>::new(2, 1e-10);
        e.insert(&[1.0, 1.0], Some(0));
        assert!(!e.insert(&[1.0, 1.0 + 1e-13], Some(1)));
        assert!(e.insert(&[1.0, 1.0 + 1e-6], Some(1)));
    }
}
