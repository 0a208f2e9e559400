//! Hermite–Galerkin truncations of realized symbols: spectra, injectivity
//! evidence and the hypoellipticity criterion for the model family
//! `(−1)^{n(k+n)} ∂^{2n(k+n)} + β^{2(k+n)} y^{2k(k+n)} + λ(−1)^n β^{2n}`.
//!
//! Verdicts are numerical evidence from finite truncations, not proofs.

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyfield::MultiPoly;
use crate::scalar::{int, rational_to_f64, Rational};
use crate::symbols::{complexify, SymbolOperator};

/// Largest number of matrix entries a truncation may have.
pub const TRUNCATION_CAP: usize = 1_000_000;
pub const DEFAULT_LADDER: [usize; 3] = [64, 128, 256];
pub const DEFAULT_THRESHOLD: f64 = 1e-6;
pub const DEFAULT_SPECTRAL_TOL: f64 = 1e-6;

type C64 = Complex<f64>;

/// Matrix of an operator on `span(h_0..h_{M−1})^{⊗q}`.
#[derive(Clone, Debug)]
pub struct HermiteTruncation {
    pub q: usize,
    pub m: usize,
    pub matrix: DMatrix<C64>,
}

impl HermiteTruncation {
    /// `max |A − A*| / max |A|`.
    pub fn hermitian_error(&self) -> f64 {
        let a = &self.matrix;
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut err = 0.0f64;
        for i in 0..a.nrows() {
            for j in i..a.ncols() {
                err = err.max((a[(i, j)] - a[(j, i)].conj()).norm());
            }
        }
        err / scale
    }
}

/// Position `y` and derivative `∂` in the first `n` Hermite functions:
/// `y h_m = √(m/2) h_{m−1} + √((m+1)/2) h_{m+1}`,
/// `∂ h_m = √(m/2) h_{m−1} − √((m+1)/2) h_{m+1}`.
pub fn ladder_matrices(n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut y = DMatrix::zeros(n, n);
    let mut d = DMatrix::zeros(n, n);
    for m in 0..n.saturating_sub(1) {
        let a = ((m + 1) as f64 / 2.0).sqrt();
        y[(m + 1, m)] = a;
        y[(m, m + 1)] = a;
        d[(m + 1, m)] = -a;
        d[(m, m + 1)] = a;
    }
    (y, d)
}

/// Rows `0..rows` of `y^a ∂^b` applied to `h_0..h_{m−1}`; exact because the
/// working size leaves room for every raising step.
fn factor(a: u32, b: u32, m: usize, rows: usize) -> DMatrix<f64> {
    let n = rows.max(m) + (a + b) as usize;
    let (y, d) = ladder_matrices(n);
    let mut cols = DMatrix::<f64>::identity(n, m);
    for _ in 0..b {
        cols = &d * cols;
    }
    for _ in 0..a {
        cols = &y * cols;
    }
    cols.rows(0, rows).into_owned()
}

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == 0.0 {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

fn to_c64(z: &Complex<Rational>) -> C64 {
    Complex::new(rational_to_f64(&z.re), rational_to_f64(&z.im))
}

/// Extra rows that hold the full image of the first `m` basis functions.
pub fn image_padding(s: &SymbolOperator) -> usize {
    (s.order().unwrap_or(0) + s.coefficient_degree()) as usize
}

fn assemble(s: &SymbolOperator, m: usize, rows: usize) -> Result<DMatrix<C64>> {
    let q = s.nvars();
    if q > 2 {
        return Err(Error::InvalidInput(format!("{q} carrier variables; at most 2 are supported")));
    }
    let (nr, nc) = (rows.pow(q as u32), m.pow(q as u32));
    if nr.saturating_mul(nc) > TRUNCATION_CAP {
        return Err(Error::TruncationTooLarge { dim: nr.max(nc), cap: (TRUNCATION_CAP as f64).sqrt() as usize });
    }
    let mut out = DMatrix::<C64>::zeros(nr, nc);
    if q == 0 {
        for (_, c) in s.terms() {
            out[(0, 0)] += to_c64(&c.constant_term());
        }
        return Ok(out);
    }
    for (alpha, c) in s.terms() {
        for (mono, coef) in c.terms() {
            let z = to_c64(coef);
            let block = if q == 1 {
                factor(mono.0[0], alpha[0], m, rows)
            } else {
                kron(&factor(mono.0[0], alpha[0], m, rows), &factor(mono.0[1], alpha[1], m, rows))
            };
            for (o, v) in out.iter_mut().zip(block.iter()) {
                *o += z * *v;
            }
        }
    }
    Ok(out)
}

/// Galerkin matrix `P S P` on `M` Hermite functions per variable.
pub fn discretize(s: &SymbolOperator, m: usize) -> Result<HermiteTruncation> {
    Ok(HermiteTruncation { q: s.nvars(), m, matrix: assemble(s, m, m)? })
}

/// `‖S v‖ / ‖v‖` with the image computed exactly (no cropping).
pub fn residual(s: &SymbolOperator, m: usize, v: &[C64]) -> Result<f64> {
    let a = assemble(s, m, m + image_padding(s))?;
    let v = nalgebra::DVector::from_column_slice(v);
    let n = v.norm();
    if n == 0.0 {
        return Err(Error::InvalidInput("zero vector".into()));
    }
    Ok((a * v).norm() / n)
}

impl HermiteTruncation {
    /// The matrix itself when every entry is real.
    pub fn real_matrix(&self) -> Option<DMatrix<f64>> {
        self.matrix.iter().all(|z| z.im == 0.0).then(|| self.matrix.map(|z| z.re))
    }
}

pub fn smallest_singular_value(t: &HermiteTruncation) -> f64 {
    let sv: Vec<f64> = match t.real_matrix() {
        Some(a) => a.singular_values().iter().cloned().collect(),
        None => t.matrix.clone().singular_values().iter().cloned().collect(),
    };
    sv.into_iter().fold(f64::INFINITY, f64::min)
}

/// Smallest singular value with its right singular vector.
fn smallest_singular_pair(t: &HermiteTruncation) -> (f64, Vec<C64>) {
    fn pick(sv: &[f64]) -> usize {
        (0..sv.len()).min_by(|&i, &j| sv[i].partial_cmp(&sv[j]).unwrap()).unwrap()
    }
    match t.real_matrix() {
        Some(a) => {
            let svd = a.svd(false, true);
            let k = pick(svd.singular_values.as_slice());
            let v_t = svd.v_t.expect("requested right singular vectors");
            (svd.singular_values[k], v_t.row(k).iter().map(|&x| Complex::new(x, 0.0)).collect())
        }
        None => {
            let svd = t.matrix.clone().svd(false, true);
            let k = pick(svd.singular_values.as_slice());
            let v_t = svd.v_t.expect("requested right singular vectors");
            (svd.singular_values[k], v_t.row(k).iter().map(|z| z.conj()).collect())
        }
    }
}

fn symmetric_eigenvalues(t: &HermiteTruncation) -> Result<Vec<f64>> {
    let err = t.hermitian_error();
    if err > 1e-10 {
        return Err(Error::InvalidInput(format!("truncation is not Hermitian (relative error {err:e})")));
    }
    // Rayleigh quotients of the computed eigenvectors: for the smooth low
    // modes they are far less exposed to rounding at the scale of ‖A‖.
    let mut e: Vec<f64> = match t.real_matrix() {
        Some(a) => {
            let h = (&a + a.transpose()).scale(0.5);
            let eig = h.clone().symmetric_eigen();
            eig.eigenvectors.column_iter().map(|v| v.dot(&(&h * v)) / v.norm_squared()).collect()
        }
        None => {
            let a = &t.matrix;
            let h = (a + a.adjoint()).scale(0.5);
            let eig = h.clone().symmetric_eigen();
            eig.eigenvectors.column_iter().map(|v| v.dotc(&(&h * v)).re / v.norm_squared()).collect()
        }
    };
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(e)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpectralReport {
    pub sizes: Vec<usize>,
    /// Lowest eigenvalues at the finer truncation.
    pub eigenvalues: Vec<f64>,
    /// The same eigenvalues at the coarser truncation.
    pub coarse: Vec<f64>,
    /// Number of leading eigenvalues on which both truncations agree.
    pub converged_count: usize,
    pub converged: bool,
    pub smallest_singular_values: Vec<f64>,
    pub tol: f64,
}

impl SpectralReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,eigenvalue,coarse,converged\n");
        for (i, (e, c)) in self.eigenvalues.iter().zip(&self.coarse).enumerate() {
            s.push_str(&format!("{i},{e:?},{c:?},{}\n", i < self.converged_count));
        }
        s
    }
}

/// Lowest `count` eigenvalues of a formally symmetric operator from
/// truncations `M` and `2M`.
pub fn spectrum_1d(s: &SymbolOperator, count: usize, m: usize, tol: f64) -> Result<SpectralReport> {
    let coarse_t = discretize(s, m)?;
    let fine_t = discretize(s, 2 * m)?;
    let coarse_all = symmetric_eigenvalues(&coarse_t)?;
    let fine_all = symmetric_eigenvalues(&fine_t)?;
    let count = count.min(coarse_all.len());
    let coarse: Vec<f64> = coarse_all[..count].to_vec();
    let eigenvalues: Vec<f64> = fine_all[..count].to_vec();
    let converged_count = eigenvalues.iter().zip(&coarse).take_while(|(a, b)| (*a - *b).abs() <= tol * a.abs().max(1.0)).count();
    let smin = |e: &[f64]| e.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    Ok(SpectralReport {
        sizes: vec![m, 2 * m],
        converged: converged_count == count,
        converged_count,
        smallest_singular_values: vec![smin(&coarse_all), smin(&fine_all)],
        eigenvalues,
        coarse,
        tol,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Injectivity {
    Injective,
    NotInjective,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InjectivityReport {
    pub verdict: Injectivity,
    pub sizes: Vec<usize>,
    pub smallest_singular_values: Vec<f64>,
    /// `‖S v‖/‖v‖` for the near-null vector of the largest truncation.
    pub residual: Option<f64>,
    /// Eigenvalue of smallest modulus, when the operator is symmetric.
    pub eigenvalue_near_zero: Option<f64>,
    pub null_vector: Option<Vec<(f64, f64)>>,
}

/// Injective when `s_min` stays above `threshold` and settles (relative
/// change below 10⁻³ between the last two sizes); not injective when
/// `s_min` is below `threshold` on the last two sizes and the near-null
/// vector has residual below `threshold`.
pub fn injectivity_test(s: &SymbolOperator, ladder: &[usize], threshold: f64) -> Result<InjectivityReport> {
    if ladder.len() < 2 {
        return Err(Error::InvalidInput("the truncation ladder needs at least two sizes".into()));
    }
    let mut smin = Vec::with_capacity(ladder.len());
    let mut last = None;
    for (i, &m) in ladder.iter().enumerate() {
        let t = discretize(s, m)?;
        if i + 1 == ladder.len() {
            let (v, vec) = smallest_singular_pair(&t);
            smin.push(v);
            last = Some((t, vec));
        } else {
            smin.push(smallest_singular_value(&t));
        }
    }
    let n = smin.len();
    let (a, b) = (smin[n - 2], smin[n - 1]);
    let mut report = InjectivityReport {
        verdict: Injectivity::Inconclusive,
        sizes: ladder.to_vec(),
        smallest_singular_values: smin.clone(),
        residual: None,
        eigenvalue_near_zero: None,
        null_vector: None,
    };
    if smin.iter().all(|&v| v > threshold) && (a - b).abs() <= 1e-3 * b {
        report.verdict = Injectivity::Injective;
        return Ok(report);
    }
    if a < threshold && b < threshold {
        let (t, v) = last.expect("ladder is nonempty");
        let r = residual(s, t.m, &v)?;
        report.residual = Some(r);
        let symmetric = t.hermitian_error() <= 1e-10;
        if symmetric {
            let e = symmetric_eigenvalues(&t)?;
            report.eigenvalue_near_zero = e.iter().cloned().min_by(|x, y| x.abs().partial_cmp(&y.abs()).unwrap());
        }
        let pinned = report.eigenvalue_near_zero.is_none_or(|e| e.abs() < threshold);
        report.null_vector = Some(v.iter().map(|z| (z.re, z.im)).collect());
        if r < threshold && pinned {
            report.verdict = Injectivity::NotInjective;
        }
    }
    Ok(report)
}

fn sign(e: u32) -> i64 {
    if e.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `(−1)^{n(k+n)} ∂^{2n(k+n)} + β^{2(k+n)} y^{2k(k+n)} + c`.
pub fn grushin_symbol(k: u32, n: u32, beta: &Rational, constant: Complex<Rational>) -> SymbolOperator {
    let kn = k + n;
    let one = Complex::new(int(1), Rational::zero());
    let d = SymbolOperator::term(vec![2 * n * kn], MultiPoly::constant(1, one.scale(int(sign(n * kn)))));
    let mut b = Rational::from_integer(1.into());
    for _ in 0..2 * kn {
        b *= beta;
    }
    let y = SymbolOperator::multiplication(complexify(&MultiPoly::var(1, 0).pow(2 * k * kn).scale(&b)));
    d.add(&y).add(&SymbolOperator::multiplication(MultiPoly::constant(1, constant)))
}

/// The model operator `(−1)^{n(k+n)} ∂^{2n(k+n)} + y^{2k(k+n)}`.
pub fn grushin_model(k: u32, n: u32) -> SymbolOperator {
    grushin_symbol(k, n, &int(1), Complex::zero())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CritBasis {
    /// `(−1)^{n+1}λ` lies in a gap of the converged spectrum.
    Gap,
    /// `(−1)^{n+1}λ` is within tolerance of a converged eigenvalue.
    Eigenvalue,
    /// `(−1)^{n+1}λ` lies above the converged part of the spectrum.
    BeyondCeiling,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CritVerdict {
    pub k: u32,
    pub n: u32,
    pub lambda: (f64, f64),
    /// `None` when the target lies beyond the converged spectrum.
    pub hypoelliptic: Option<bool>,
    pub basis: CritBasis,
    pub target: (f64, f64),
    pub nearest_index: Option<usize>,
    pub distance: f64,
    pub ceiling: f64,
    pub spectrum: SpectralReport,
    /// Verdicts recomputed from the symbol at `β` and `1/β` agree.
    pub beta_invariant: bool,
    /// Largest relative gap between `spec(β)/β^{2n}` and the model spectrum.
    pub beta_scaling_error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CritOptions {
    pub size: usize,
    pub count: usize,
    pub tol: f64,
    /// `β` for the `β ↔ 1/β` check.
    pub beta: f64,
}

impl Default for CritOptions {
    fn default() -> Self {
        CritOptions { size: 128, count: 12, tol: DEFAULT_SPECTRAL_TOL, beta: 2.0 }
    }
}

fn classify(target: C64, spec: &SpectralReport, tol: f64) -> (Option<bool>, CritBasis, Option<usize>, f64, f64) {
    let conv = &spec.eigenvalues[..spec.converged_count];
    let ceiling = conv.last().cloned().unwrap_or(f64::NEG_INFINITY);
    let nearest = conv
        .iter()
        .enumerate()
        .map(|(i, &e)| (i, (target - Complex::new(e, 0.0)).norm()))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let (idx, dist) = nearest.map_or((None, f64::INFINITY), |(i, d)| (Some(i), d));
    if dist <= tol {
        return (Some(false), CritBasis::Eigenvalue, idx, dist, ceiling);
    }
    if target.re > ceiling {
        return (None, CritBasis::BeyondCeiling, idx, dist, ceiling);
    }
    (Some(true), CritBasis::Gap, idx, dist, ceiling)
}

/// Maximal hypoellipticity of the model family at `λ`: true iff
/// `(−1)^{n+1}λ ∉ spec((−1)^{n(k+n)}∂^{2n(k+n)} + y^{2k(k+n)})`.
pub fn hypoellipticity_verdict(k: u32, n: u32, lambda: C64, opts: &CritOptions) -> Result<CritVerdict> {
    if k == 0 || n == 0 {
        return Err(Error::InvalidInput("k and n must be at least 1".into()));
    }
    let spectrum = spectrum_1d(&grushin_model(k, n), opts.count, opts.size, opts.tol)?;
    let target = lambda.scale(sign(n + 1) as f64);
    let (hypoelliptic, basis, nearest_index, distance, ceiling) = classify(target, &spectrum, opts.tol);

    // Same question asked of the symbol at β and 1/β: the λ term there is
    // λ(−1)ⁿβ^{2n}, and spec(β) = β^{2n} spec(model).
    let mut beta_invariant = true;
    let mut beta_scaling_error = 0.0f64;
    for b in [opts.beta, 1.0 / opts.beta] {
        let bq = Rational::from_float(b).ok_or_else(|| Error::InvalidInput("β must be finite".into()))?;
        let sb = spectrum_1d(&grushin_symbol(k, n, &bq, Complex::zero()), opts.count, opts.size, opts.tol)?;
        let f = b.abs().powi(2 * n as i32);
        let scaled = SpectralReport {
            eigenvalues: sb.eigenvalues.iter().map(|e| e / f).collect(),
            coarse: sb.coarse.iter().map(|e| e / f).collect(),
            ..sb.clone()
        };
        let verdict_b = classify(target, &scaled, opts.tol).0;
        beta_invariant &= verdict_b == hypoelliptic;
        for (a, e) in
            scaled.eigenvalues.iter().zip(&spectrum.eigenvalues).take(scaled.converged_count.min(spectrum.converged_count))
        {
            beta_scaling_error = beta_scaling_error.max((a - e).abs() / e.abs().max(1.0));
        }
    }
    Ok(CritVerdict {
        k,
        n,
        lambda: (lambda.re, lambda.im),
        hypoelliptic,
        basis,
        target: (target.re, target.im),
        nearest_index,
        distance,
        ceiling,
        spectrum,
        beta_invariant,
        beta_scaling_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator() -> SymbolOperator {
        let one = Complex::new(int(1), Rational::zero());
        SymbolOperator::term(vec![2], MultiPoly::constant(1, -one.clone()))
            .add(&SymbolOperator::multiplication(complexify(&MultiPoly::var(1, 0).pow(2))))
    }

    #[test]
    fn oscillator_spectrum_is_odd_integers() {
        let r = spectrum_1d(&oscillator(), 5, 64, 1e-8).unwrap();
        for (i, e) in r.eigenvalues.iter().enumerate() {
            assert!((e - (2 * i + 1) as f64).abs() < 1e-8);
        }
    }

    #[test]
    fn position_is_tridiagonal() {
        let y = SymbolOperator::multiplication(complexify(&MultiPoly::var(1, 0)));
        let t = discretize(&y, 6).unwrap();
        assert!((t.matrix[(1, 0)].re - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((t.matrix[(2, 3)].re - 1.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(t.matrix[(0, 2)], Complex::zero());
    }

    #[test]
    fn size_guard() {
        assert!(matches!(discretize(&oscillator(), 2000), Err(Error::TruncationTooLarge { .. })));
    }
}
