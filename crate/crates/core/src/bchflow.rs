//! Numerical checks of the flow form of the BCH formula, the local inverse
//! `k` of the exponential map of a graded basis and the map `φ` that
//! interpolates between flows (`t > 0`) and the osculating group law
//! (`t = 0`).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::osculating::{AlgebraElement, BchConvention, BchSeries, GradedLieAlgebra, LieOps, Osculating};
use crate::polyfield::flow::flow_compiled;
use crate::polyfield::{CompiledField, FlowOptions, VectorField};
use crate::scalar::Rational;
use crate::PolyVectorField;

/// `Σ_{i=1}^n t^i X_i`; `coefficients[i-1]` holds `X_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalSeriesField {
    pub coefficients: Vec<PolyVectorField>,
}

impl FormalSeriesField {
    pub fn new(coefficients: Vec<PolyVectorField>) -> Result<Self> {
        let Some(first) = coefficients.first() else {
            return Err(Error::InvalidInput("a formal series needs at least one coefficient".into()));
        };
        let dim = first.dim();
        if coefficients.iter().any(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch("series coefficients live on different R^m".into()));
        }
        Ok(FormalSeriesField { coefficients })
    }

    pub fn zero(dim: usize, order: usize) -> Self {
        FormalSeriesField { coefficients: vec![VectorField::zero(dim); order.max(1)] }
    }

    pub fn dim(&self) -> usize {
        self.coefficients[0].dim()
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    /// Coefficient of `t^i`, zero beyond the stored order.
    pub fn coefficient(&self, i: usize) -> PolyVectorField {
        self.coefficients.get(i - 1).cloned().unwrap_or_else(|| VectorField::zero(self.dim()))
    }

    pub fn truncate(&self, n: usize) -> Self {
        FormalSeriesField { coefficients: (1..=n.max(1)).map(|i| self.coefficient(i)).collect() }
    }

    /// The field `X_n(t)` with `t` substituted.
    pub fn at(&self, t: f64) -> VectorField<f64> {
        let mut out = VectorField::zero(self.dim());
        let mut s = 1.0;
        for c in &self.coefficients {
            s *= t;
            out = out.add(&c.to_f64().scale(&s));
        }
        out
    }
}

struct SeriesOps {
    dim: usize,
    n: usize,
}

impl LieOps for SeriesOps {
    type Elem = Vec<PolyVectorField>;

    fn zero(&self) -> Self::Elem {
        vec![VectorField::zero(self.dim); self.n]
    }

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
    }

    fn scale(&self, a: &Self::Elem, q: &Rational) -> Self::Elem {
        a.iter().map(|x| x.scale(q)).collect()
    }

    fn bracket(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let mut out = self.zero();
        for i in 0..self.n {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..self.n - i - 1 {
                if b[j].is_zero() {
                    continue;
                }
                // t^{i+1} t^{j+1} lands in slot i + j + 1.
                let br = a[i].bracket(&b[j]).expect("series share a dimension");
                out[i + j + 1] = out[i + j + 1].add(&br);
            }
        }
        out
    }
}

/// `BCH(X, Y) = X + Y − ½[X,Y] + …` truncated at `t^n`, exactly.
pub fn bch_series(x: &FormalSeriesField, y: &FormalSeriesField, n: usize) -> Result<FormalSeriesField> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch("series on different R^m".into()));
    }
    let n = n.max(1);
    let ops = SeriesOps { dim: x.dim(), n };
    let xs = x.truncate(n).coefficients;
    let ys = y.truncate(n).coefficients;
    let series = BchSeries::cached(n, BchConvention::RightInvariant);
    FormalSeriesField::new(series.eval(&ops, &xs, &ys))
}

/// `2^{-3}, 2^{-4}, …, 2^{-10}`.
pub fn default_t_grid() -> Vec<f64> {
    (3..=10).map(|k| 2f64.powi(-k)).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrderFit {
    pub n: usize,
    pub t_grid: Vec<f64>,
    /// `None` where the flows failed.
    pub errors: Vec<Option<f64>>,
    pub slope: Option<f64>,
    /// RMS residual of the log-log fit.
    pub fit_residual: Option<f64>,
    /// Every error sits at the rounding floor.
    pub exactly_zero: bool,
    pub inconclusive: bool,
    pub passed: bool,
    pub flow_tol: f64,
}

impl OrderFit {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,error\n");
        for (t, e) in self.t_grid.iter().zip(&self.errors) {
            match e {
                Some(e) => s.push_str(&format!("{t:?},{e:?}\n")),
                None => s.push_str(&format!("{t:?},\n")),
            }
        }
        s
    }
}

/// Least-squares slope and RMS residual of `log e` against `log t`.
pub fn log_log_fit(ts: &[f64], es: &[f64]) -> (f64, f64) {
    let n = ts.len() as f64;
    let lx: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = es.iter().map(|e| e.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let rms = (lx.iter().zip(&ly).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum::<f64>() / n).sqrt();
    (slope, rms)
}

/// Compares `exp(X_n(t))·(exp(Y_n(t))·x)` with `exp(BCH(X,Y)_n(t))·x`
/// on a grid and fits the decay rate. Passes when the slope is at least
/// `n + 0.8` or every error is at the rounding floor.
pub fn flow_order_test(
    x: &FormalSeriesField,
    y: &FormalSeriesField,
    point: &[f64],
    n: usize,
    t_grid: &[f64],
) -> Result<OrderFit> {
    if point.len() != x.dim() {
        return Err(Error::DimensionMismatch(format!("point of length {} on R^{}", point.len(), x.dim())));
    }
    let z = bch_series(x, y, n)?;
    let (xn, yn) = (x.truncate(n), y.truncate(n));
    let t_min = t_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let flow_tol = 1e-3 * t_min.powi(n as i32 + 2);
    let opts = FlowOptions::with_tol(flow_tol);
    let run = |t: f64| -> Result<(f64, f64)> {
        let inner = flow_compiled(&CompiledField::new(&yn.at(t)), point, 1.0, &opts)?;
        let lhs = flow_compiled(&CompiledField::new(&xn.at(t)), &inner, 1.0, &opts)?;
        let rhs = flow_compiled(&CompiledField::new(&z.at(t)), point, 1.0, &opts)?;
        let err = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale = lhs.iter().map(|a| a * a).sum::<f64>().sqrt().max(1.0);
        Ok((err, scale))
    };
    let results: Vec<Option<(f64, f64)>> = t_grid.par_iter().map(|&t| run(t).ok()).collect();
    let errors: Vec<Option<f64>> = results.iter().map(|r| r.map(|(e, _)| e)).collect();
    let alive: Vec<(f64, f64, f64)> = t_grid.iter().zip(&results).filter_map(|(&t, r)| r.map(|(e, s)| (t, e, s))).collect();
    // Rounding floor of a few dozen ulps of the state.
    let above: Vec<(f64, f64)> = alive.iter().filter(|(_, e, s)| *e > 32.0 * f64::EPSILON * s).map(|&(t, e, _)| (t, e)).collect();
    let exactly_zero = !alive.is_empty() && above.is_empty();
    let mut fit = OrderFit {
        n,
        t_grid: t_grid.to_vec(),
        errors,
        slope: None,
        fit_residual: None,
        exactly_zero,
        inconclusive: false,
        passed: exactly_zero && alive.len() >= 5,
        flow_tol,
    };
    if exactly_zero {
        fit.inconclusive = alive.len() < 5;
        return Ok(fit);
    }
    if above.len() < 5 {
        fit.inconclusive = true;
        return Ok(fit);
    }
    let (ts, es): (Vec<f64>, Vec<f64>) = above.into_iter().unzip();
    let (slope, rms) = log_log_fit(&ts, &es);
    fit.slope = Some(slope);
    fit.fit_residual = Some(rms);
    fit.passed = slope >= n as f64 + 0.8;
    Ok(fit)
}

/// Graded Lie basis data: the osculating algebra with one float field per
/// basis element, so that `♮(v) = Σ v_i B_i`.
#[derive(Clone, Debug)]
pub struct GradedLieBasis {
    pub algebra: GradedLieAlgebra,
    pub fields: Vec<VectorField<f64>>,
}

impl GradedLieBasis {
    pub fn from_osculating(osc: &Osculating) -> Self {
        GradedLieBasis { algebra: osc.algebra.clone(), fields: osc.analysis.basis.iter().map(|b| b.field.to_f64()).collect() }
    }

    pub fn manifold_dim(&self) -> usize {
        self.fields[0].dim()
    }

    /// `♮(v)`.
    pub fn natural(&self, v: &[f64]) -> VectorField<f64> {
        let mut out = VectorField::zero(self.manifold_dim());
        for (c, f) in v.iter().zip(&self.fields) {
            if *c != 0.0 {
                out = out.add(&f.scale(c));
            }
        }
        out
    }

    /// `exp(♮(v))·x`.
    pub fn exp_act(&self, v: &[f64], x: &[f64], opts: &FlowOptions) -> Result<Vec<f64>> {
        flow_compiled(&CompiledField::new(&self.natural(v)), x, 1.0, opts)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseOptions {
    /// Target for `‖exp(♮(v))·x − y‖`.
    pub tol: f64,
    pub max_steps: usize,
    pub flow_tol: f64,
    /// Central-difference step for the Jacobian.
    pub fd_step: f64,
}

impl Default for InverseOptions {
    fn default() -> Self {
        InverseOptions { tol: 1e-12, max_steps: 50, flow_tol: 1e-13, fd_step: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InverseResult {
    pub v: Vec<f64>,
    pub residual: f64,
    pub steps: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// `k(v₀, y, x)`: solves `exp(♮(v))·x = y` by damped Gauss–Newton from
/// `v₀`. Each step is the minimum-norm correction, i.e. it is projected
/// onto the orthogonal complement of the kernel of the linearization.
pub fn local_inverse_k(basis: &GradedLieBasis, v0: &[f64], y: &[f64], x: &[f64], opts: &InverseOptions) -> Result<InverseResult> {
    let d = basis.fields.len();
    let m = basis.manifold_dim();
    if v0.len() != d || y.len() != m || x.len() != m {
        return Err(Error::DimensionMismatch("seed or points have the wrong length".into()));
    }
    let flow = FlowOptions::with_tol(opts.flow_tol);
    let f = |v: &[f64]| -> Result<Vec<f64>> {
        let p = basis.exp_act(v, x, &flow)?;
        Ok(p.iter().zip(y).map(|(a, b)| a - b).collect())
    };
    let mut v = v0.to_vec();
    let mut r = f(&v)?;
    let mut res = norm(&r);
    for step in 0..opts.max_steps {
        if res < opts.tol {
            return Ok(InverseResult { v, residual: res, steps: step });
        }
        let mut jac = DMatrix::<f64>::zeros(m, d);
        for j in 0..d {
            let h = opts.fd_step * v[j].abs().max(1.0);
            let mut vp = v.clone();
            vp[j] += h;
            let mut vm = v.clone();
            vm[j] -= h;
            let (fp, fm) = (f(&vp)?, f(&vm)?);
            for i in 0..m {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let rhs = DVector::from_column_slice(&r);
        let delta = jac.svd(true, true).solve(&rhs, 1e-12).map_err(|e| Error::Internal(format!("pseudo-inverse failed: {e}")))?;
        let mut lam = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let trial: Vec<f64> = v.iter().zip(delta.iter()).map(|(a, b)| a - lam * b).collect();
            if let Ok(rt) = f(&trial) {
                let nr = norm(&rt);
                if nr < res {
                    v = trial;
                    r = rt;
                    res = nr;
                    improved = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if !improved {
            return Err(Error::OutsideDomain { residual: res, steps: step + 1 });
        }
    }
    if res < opts.tol {
        return Ok(InverseResult { v, residual: res, steps: opts.max_steps });
    }
    Err(Error::OutsideDomain { residual: res, steps: opts.max_steps })
}

/// First component of `φ(Y, X, x, t)`:
/// `α_{1/t} k(BCH(α_t Y, α_t X), exp(♮α_tY)·(exp(♮α_tX)·x), x)` for `t > 0`
/// and `BCH(Y, X)` at `t = 0`.
///
/// By homogeneity `α_{1/t} BCH(α_t Y, α_t X) = BCH(Y, X)`, so the result is
/// formed as `BCH(Y, X) + α_{1/t}(k − seed)`; only the Newton correction
/// is rescaled.
pub fn phi_map(
    basis: &GradedLieBasis,
    y: &AlgebraElement<f64>,
    x: &AlgebraElement<f64>,
    point: &[f64],
    t: f64,
    opts: &InverseOptions,
) -> Result<AlgebraElement<f64>> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidInput(format!("t = {t} must be finite and nonnegative")));
    }
    let g = &basis.algebra;
    if y.dim() != g.dim() || x.dim() != g.dim() {
        return Err(Error::DimensionMismatch(format!("elements of a {}-dimensional algebra expected", g.dim())));
    }
    let group = g.bch(y, x);
    if t == 0.0 {
        return Ok(group);
    }
    let (yt, xt) = (g.dilate(&t, y), g.dilate(&t, x));
    let seed = g.bch(&yt, &xt);
    // The correction is magnified by up to t^{-w_max}; tighten accordingly.
    let w_max = g.weights().iter().copied().max().unwrap_or(1) as i32;
    let shrink = t.min(1.0).powi(w_max);
    let inner_opts =
        InverseOptions { tol: (opts.tol * shrink).max(1e-14), flow_tol: (opts.flow_tol * shrink).max(1e-15), ..*opts };
    let flow = FlowOptions::with_tol(inner_opts.flow_tol);
    let inner = basis.exp_act(&xt.coords, point, &flow)?;
    let target = basis.exp_act(&yt.coords, &inner, &flow)?;
    let k = local_inverse_k(basis, &seed.coords, &target, point, &inner_opts)?;
    let correction = AlgebraElement::new(k.v.iter().zip(&seed.coords).map(|(a, b)| a - b).collect());
    Ok(group.add(&g.dilate(&(1.0 / t), &correction)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfield::parse_field;
    use crate::scalar::rat;

    fn series(src: &[&str], dim: usize) -> FormalSeriesField {
        FormalSeriesField::new(src.iter().map(|s| parse_field(s, dim).unwrap()).collect()).unwrap()
    }

    #[test]
    fn heisenberg_pair_bch() {
        let x = series(&["dx"], 2);
        let y = series(&["x*dy"], 2);
        let z = bch_series(&x, &y, 2).unwrap();
        assert_eq!(z.coefficient(1), parse_field("dx + x*dy", 2).unwrap());
        assert_eq!(z.coefficient(2), parse_field("dy", 2).unwrap().scale(&rat(-1, 2)));
    }

    #[test]
    fn zero_second_argument() {
        let x = series(&["x^2*dx", "x*dx"], 1);
        let z = bch_series(&x, &FormalSeriesField::zero(1, 2), 2).unwrap();
        assert_eq!(z, x);
    }

    #[test]
    fn fit_recovers_power() {
        let ts = default_t_grid();
        let es: Vec<f64> = ts.iter().map(|t| 3.0 * t.powi(4)).collect();
        let (s, r) = log_log_fit(&ts, &es);
        assert!((s - 4.0).abs() < 1e-12 && r < 1e-12);
    }
}
