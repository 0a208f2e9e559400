//! Helffer–Nourrigat cone: sampling of the weighted pairing map, membership
//! by optimization, and invariance checks.
//!
//! Component k of the pairing map is `Φ_k(x, η, t) = t^{w_k} ⟨η, B_k(x)⟩`.
//! The cone at p is the set of limits of `Φ(x_n, η_n, t_n)` with `x_n → p`
//! and `t_n → 0`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::osculating::{AlgebraElement, DualElement, GradedLieAlgebra, Osculating};
use crate::polyfield::{CompiledField, MultiPoly, VectorField};
use crate::scalar::{Rational, Real};

pub type FieldCallback = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A basis field of the pairing map: polynomial, or a numeric callback for
/// coefficients outside the polynomial class.
#[derive(Clone)]
pub enum BasisField {
    Poly(CompiledField),
    Callback { name: String, dim: usize, f: FieldCallback },
}

impl fmt::Debug for BasisField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisField::Poly(c) => write!(f, "Poly(dim {})", c.dim()),
            BasisField::Callback { name, dim, .. } => write!(f, "Callback({name}, dim {dim})"),
        }
    }
}

impl BasisField {
    pub fn poly<R: Real>(x: &VectorField<R>) -> Self {
        BasisField::Poly(CompiledField::new(x))
    }

    pub fn dim(&self) -> usize {
        match self {
            BasisField::Poly(c) => c.dim(),
            BasisField::Callback { dim, .. } => *dim,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        match self {
            BasisField::Poly(c) => {
                let mut out = vec![0.0; c.dim()];
                c.eval_into(x, &mut out);
                out
            }
            BasisField::Callback { f, .. } => f(x),
        }
    }
}

/// `e^{−a}` for `a ≥ 0`, or NaN once the result leaves the normal float
/// range, so that callers drop the evaluation instead of reading a false 0.
fn flat_exp(a: f64) -> f64 {
    if a > 700.0 {
        f64::NAN
    } else {
        (-a).exp()
    }
}

/// Built-in flat fields on ℝ², both vanishing to infinite order at 0:
/// `flat_radial = e^{−1/r²} ∂x` and `flat_angular = (x/r + 2) e^{−2/r²} ∂x`.
/// Points where the exponential underflows evaluate to NaN.
pub fn builtin_callback(name: &str) -> Option<BasisField> {
    let f: FieldCallback = match name {
        "flat_radial" => Arc::new(|p: &[f64]| {
            let r2 = p[0] * p[0] + p[1] * p[1];
            let v = if r2 == 0.0 { 0.0 } else { flat_exp(1.0 / r2) };
            vec![v, 0.0]
        }),
        "flat_angular" => Arc::new(|p: &[f64]| {
            let r2 = p[0] * p[0] + p[1] * p[1];
            let v = if r2 == 0.0 { 0.0 } else { (p[0] / r2.sqrt() + 2.0) * flat_exp(2.0 / r2) };
            vec![v, 0.0]
        }),
        _ => return None,
    };
    Some(BasisField::Callback { name: name.to_string(), dim: 2, f })
}

#[derive(Clone, Debug)]
pub struct PairingMap {
    pub fields: Vec<BasisField>,
    pub weights: Vec<u32>,
    pub point: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeParams {
    pub x: Vec<f64>,
    pub eta: Vec<f64>,
    pub t: f64,
}

impl PairingMap {
    pub fn new(fields: Vec<BasisField>, weights: Vec<u32>, point: Vec<f64>) -> Result<Self> {
        if fields.is_empty() || fields.len() != weights.len() {
            return Err(Error::InvalidInput(format!("{} fields with {} weights", fields.len(), weights.len())));
        }
        if let Some(f) = fields.iter().find(|f| f.dim() != point.len()) {
            return Err(Error::DimensionMismatch(format!("field on R^{} at a point of R^{}", f.dim(), point.len())));
        }
        if weights.contains(&0) {
            return Err(Error::InvalidInput("weights must be positive".into()));
        }
        Ok(PairingMap { fields, weights, point })
    }

    pub fn from_fields<R: Real>(fields: &[VectorField<R>], weights: Vec<u32>, point: Vec<f64>) -> Result<Self> {
        Self::new(fields.iter().map(BasisField::poly).collect(), weights, point)
    }

    /// Pairing map on the fiber basis of an osculating algebra.
    pub fn from_osculating(osc: &Osculating) -> Result<Self> {
        let fields: Vec<VectorField<Rational>> = osc.analysis.basis.iter().map(|b| b.field.clone()).collect();
        let point = osc.analysis.point.iter().map(|q| q.to_f64()).collect();
        Self::from_fields(&fields, osc.analysis.weights(), point)
    }

    /// Number of cone coordinates.
    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn manifold_dim(&self) -> usize {
        self.point.len()
    }

    /// Rows `t^{w_k} B_k(x)`, so that `Φ = A η`.
    fn matrix(&self, x: &[f64], t: f64) -> Vec<Vec<f64>> {
        self.fields
            .iter()
            .zip(&self.weights)
            .map(|(b, &w)| {
                let s = t.powi(w as i32);
                b.eval(x).into_iter().map(|v| v * s).collect()
            })
            .collect()
    }

    pub fn pairing(&self, x: &[f64], eta: &[f64], t: f64) -> DualElement<f64> {
        let a = self.matrix(x, t);
        DualElement::new(a.iter().map(|row| row.iter().zip(eta).map(|(r, e)| r * e).sum()).collect())
    }

    pub fn pairing_at(&self, p: &ConeParams) -> DualElement<f64> {
        self.pairing(&p.x, &p.eta, p.t)
    }

    /// Best `‖A η − ξ‖` over η, with the minimizing η.
    fn least_squares(&self, x: &[f64], t: f64, xi: &[f64]) -> (f64, Vec<f64>) {
        let a = self.matrix(x, t);
        let d = a.len();
        let m = self.manifold_dim();
        let norms: Vec<f64> = (0..m).map(|j| a.iter().map(|r| r[j] * r[j]).sum::<f64>().sqrt()).collect();
        let cols: Vec<usize> = (0..m).filter(|&j| norms[j] > 0.0 && norms[j].is_finite()).collect();
        let b = DVector::from_column_slice(xi);
        let mut eta = vec![0.0; m];
        if cols.is_empty() {
            return (b.norm(), eta);
        }
        let am = DMatrix::from_fn(d, cols.len(), |i, j| a[i][cols[j]] / norms[cols[j]]);
        let svd = am.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let Ok(sol) = svd.solve(&b, smax * 1e-14) else {
            return (b.norm(), eta);
        };
        for (j, &c) in cols.iter().enumerate() {
            eta[c] = sol[j] / norms[c];
        }
        ((am * sol - b).norm(), eta)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

/// Max-abs gauge; zero stays zero.
pub fn normalize(v: &[f64]) -> (Vec<f64>, f64) {
    let s = max_abs(v);
    if s == 0.0 || !s.is_finite() {
        (v.to_vec(), 1.0)
    } else {
        (v.iter().map(|c| c / s).collect(), s)
    }
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleOptions {
    pub budget: usize,
    pub t_max: f64,
    /// Half-width of the box around p from which x is drawn.
    pub radius: f64,
    /// log10 range of |η|.
    pub eta_decades: (f64, f64),
    /// Grid spacing of the ε-net used for deduplication.
    pub dedup_eps: f64,
    pub seed: u64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions { budget: 2000, t_max: 0.5, radius: 0.5, eta_decades: (-3.0, 3.0), dedup_eps: 1e-9, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeSample {
    /// Gauge-normalized representatives.
    pub points: Vec<Vec<f64>>,
    pub parameters: Vec<ConeParams>,
    /// Max-abs of the raw pairing value, divided out of each point.
    pub scales: Vec<f64>,
    pub normalization: String,
}

impl ConeSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> DualElement<f64> {
        DualElement::new(self.points[i].clone())
    }

    /// Largest relative mismatch when re-evaluating stored parameters.
    pub fn reachability_error(&self, phi: &PairingMap) -> f64 {
        self.points
            .iter()
            .zip(&self.parameters)
            .zip(&self.scales)
            .map(|((p, par), s)| {
                let v = phi.pairing_at(par).coords;
                let err = v.iter().zip(p).map(|(a, b)| (a / s - b).abs()).fold(0.0, f64::max);
                err / max_abs(p).max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }

    /// One row per representative: the coordinates followed by t.
    pub fn to_csv(&self) -> String {
        let d = self.points.first().map_or(0, |p| p.len());
        let mut s: String = (1..=d).map(|i| format!("xi{i},")).collect();
        s.push_str("t\n");
        for (p, par) in self.points.iter().zip(&self.parameters) {
            for v in p {
                s.push_str(&format!("{v:e},"));
            }
            s.push_str(&format!("{:e}\n", par.t));
        }
        s
    }
}

/// Quasi-random sweep over `(x, η, t)` using a seeded shift of the Halton
/// sequence. Output order and content depend only on the options.
pub fn sample_cone(phi: &PairingMap, opts: &SampleOptions) -> Result<ConeSample> {
    if opts.budget == 0 {
        return Err(Error::InvalidInput("sample budget must be at least 1".into()));
    }
    let m = phi.manifold_dim();
    let dims = 2 * m + 2;
    if dims > PRIMES.len() {
        return Err(Error::InvalidInput(format!("sampling supports manifolds of dimension ≤ {}", PRIMES.len() / 2 - 1)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let shift: Vec<f64> = (0..dims).map(|_| rng.gen::<f64>()).collect();
    let (lo, hi) = opts.eta_decades;
    let raw: Vec<(Vec<f64>, ConeParams)> = (0..opts.budget)
        .into_par_iter()
        .map(|i| {
            let u: Vec<f64> = (0..dims).map(|k| (radical_inverse(i as u64 + 1, PRIMES[k]) + shift[k]).fract()).collect();
            let x: Vec<f64> = (0..m).map(|a| phi.point[a] + opts.radius * (2.0 * u[a] - 1.0)).collect();
            let mut dir: Vec<f64> = (0..m).map(|a| 2.0 * u[m + a] - 1.0).collect();
            let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            let r = 10f64.powf(lo + (hi - lo) * u[2 * m]);
            dir.iter_mut().for_each(|v| *v *= r / n);
            // t = t_max·10^{−3u}, never zero.
            let t = opts.t_max * 10f64.powf(-3.0 * u[2 * m + 1]);
            let par = ConeParams { x, eta: dir, t };
            (phi.pairing_at(&par).coords, par)
        })
        .collect();
    let mut seen = std::collections::HashSet::new();
    let mut out = ConeSample { points: Vec::new(), parameters: Vec::new(), scales: Vec::new(), normalization: "max_abs".into() };
    for (v, par) in raw {
        if v.iter().any(|c| !c.is_finite()) {
            continue;
        }
        let (p, s) = normalize(&v);
        let key: Vec<i64> = p.iter().map(|c| (c / opts.dedup_eps).round() as i64).collect();
        if !seen.insert(key) {
            continue;
        }
        out.points.push(p);
        out.parameters.push(par);
        out.scales.push(s);
    }
    Ok(out)
}

/// Largest `|r(ξ)|` over the sample, for a polynomial relation in the cone
/// coordinates `x1..xd`.
pub fn relation_residual(sample: &ConeSample, relation: &MultiPoly<Rational>) -> f64 {
    let r = relation.to_f64();
    sample.points.iter().map(|p| r.eval_f64(p).abs()).fold(0.0, f64::max)
}

/// Smallest value of a polynomial over the sample (for sign constraints).
pub fn relation_minimum(sample: &ConeSample, expr: &MultiPoly<Rational>) -> f64 {
    let r = expr.to_f64();
    sample.points.iter().map(|p| r.eval_f64(p)).fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    In,
    Out,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipOptions {
    pub starts: usize,
    pub iterations: usize,
    pub eps_in: f64,
    pub eps_out: f64,
    /// Largest t on the first rung of the t-ladder.
    pub t_small: f64,
    /// Half-width of the x-box on the first rung.
    pub radius: f64,
    /// Each rung shrinks t and the x-box by a factor 10.
    pub rungs: usize,
    pub seed: u64,
}

impl Default for MembershipOptions {
    fn default() -> Self {
        MembershipOptions {
            starts: 64,
            iterations: 500,
            eps_in: 1e-6,
            eps_out: 1e-2,
            t_small: 1e-3,
            radius: 1.0,
            rungs: 3,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RungTrace {
    pub t_cap: f64,
    pub radius: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipVerdict {
    pub candidate: Vec<f64>,
    /// Residual on the last (smallest-t) rung, in the max-abs gauge of ξ.
    pub residual: f64,
    pub verdict: Verdict,
    /// "out" verdicts come from a finite search and are only evidence.
    pub heuristic: bool,
    pub trace: Vec<RungTrace>,
    pub witness: Option<ConeParams>,
}

/// Derivative-free minimization; returns the best point and value.
pub fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: f64, iterations: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = f(&x);
        simplex.push((x, v));
    }
    let key = |v: f64| if v.is_nan() { f64::INFINITY } else { v };
    for _ in 0..iterations {
        simplex.sort_by(|a, b| key(a.1).total_cmp(&key(b.1)));
        if key(simplex[n].1) - key(simplex[0].1) <= 1e-32 || simplex[0].1 == 0.0 {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64).collect();
        let along = |c: f64| -> Vec<f64> { centroid.iter().zip(&simplex[n].0).map(|(m, w)| m + c * (m - w)).collect() };
        let xr = along(1.0);
        let fr = f(&xr);
        if key(fr) < key(simplex[0].1) {
            let xe = along(2.0);
            let fe = f(&xe);
            simplex[n] = if key(fe) < key(fr) { (xe, fe) } else { (xr, fr) };
        } else if key(fr) < key(simplex[n - 1].1) {
            simplex[n] = (xr, fr);
        } else {
            let xc = if key(fr) < key(simplex[n].1) { along(0.5) } else { along(-0.5) };
            let fc = f(&xc);
            if key(fc) < key(simplex[n].1).min(key(fr)) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    s.0 = best.iter().zip(&s.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    s.1 = f(&s.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| key(a.1).total_cmp(&key(b.1)));
    let (x, v) = simplex.swap_remove(0);
    (x, v)
}

/// Minimizes `‖Φ(x,η,t) − ξ‖` (η eliminated by least squares) over a
/// shrinking ladder of `(x, t)` windows by multi-start Nelder–Mead.
pub fn membership(phi: &PairingMap, xi: &DualElement<f64>, opts: &MembershipOptions) -> Result<MembershipVerdict> {
    if xi.dim() != phi.len() {
        return Err(Error::DimensionMismatch(format!("candidate of length {} for a cone in R^{}", xi.dim(), phi.len())));
    }
    if xi.coords.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidInput("candidate must be finite".into()));
    }
    let (target, _) = normalize(&xi.coords);
    if max_abs(&target) == 0.0 {
        let m = phi.manifold_dim();
        return Ok(MembershipVerdict {
            candidate: xi.coords.clone(),
            residual: 0.0,
            verdict: Verdict::In,
            heuristic: false,
            trace: Vec::new(),
            witness: Some(ConeParams { x: phi.point.clone(), eta: vec![0.0; m], t: opts.t_small }),
        });
    }
    let m = phi.manifold_dim();
    let mut trace = Vec::new();
    let mut last = (f64::INFINITY, None);
    for rung in 0..opts.rungs.max(1) {
        let scale = 10f64.powi(-(rung as i32));
        let t_cap = opts.t_small * scale;
        let radius = opts.radius * scale;
        let decode = |v: &[f64]| -> (Vec<f64>, f64) {
            let x = (0..m).map(|a| phi.point[a] + radius * v[a].tanh()).collect();
            (x, t_cap * (-v[m] * v[m]).exp())
        };
        let objective = |v: &[f64]| -> f64 {
            let (x, t) = decode(v);
            if t <= 0.0 {
                return f64::INFINITY;
            }
            let (r, _) = phi.least_squares(&x, t, &target);
            r * r
        };
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ ((rung as u64 + 1) << 32));
        let seeds: Vec<Vec<f64>> = (0..opts.starts.max(1))
            .map(|_| {
                let mut v: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
                v.push(rng.gen_range(0.0..3.0));
                v
            })
            .collect();
        let results: Vec<(Vec<f64>, f64)> = seeds.par_iter().map(|s| nelder_mead(&objective, s, 0.5, opts.iterations)).collect();
        // First minimum in start order keeps the choice deterministic.
        let (best_v, best_f) = results.into_iter().fold((Vec::new(), f64::INFINITY), |acc, r| if r.1 < acc.1 { r } else { acc });
        let residual = best_f.max(0.0).sqrt();
        let witness = (!best_v.is_empty()).then(|| {
            let (x, t) = decode(&best_v);
            let (_, eta) = phi.least_squares(&x, t, &target);
            ConeParams { x, eta, t }
        });
        trace.push(RungTrace { t_cap, radius, residual });
        last = (residual, witness);
    }
    let residual = last.0;
    let verdict = if residual < opts.eps_in {
        Verdict::In
    } else if residual >= opts.eps_out {
        Verdict::Out
    } else {
        Verdict::Inconclusive
    };
    Ok(MembershipVerdict {
        candidate: xi.coords.clone(),
        residual,
        verdict,
        heuristic: verdict == Verdict::Out,
        trace,
        witness: last.1,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Dilation,
    Scalar,
    Coadjoint,
    /// `α_{−1}`; not a symmetry of the cone in general, so only recorded.
    NegativeDilation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceCase {
    pub transform: Transform,
    pub sample_index: usize,
    pub parameter: Vec<f64>,
    pub image: Vec<f64>,
    pub verdict: Verdict,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceOptions {
    /// Number of sample points tested (taken evenly through the sample).
    pub points: usize,
    pub negative_dilation: bool,
    pub seed: u64,
    pub membership: MembershipOptions,
}

impl Default for InvarianceOptions {
    fn default() -> Self {
        InvarianceOptions { points: 5, negative_dilation: false, seed: 0, membership: MembershipOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub cases: Vec<InvarianceCase>,
    /// Dilation, scalar and coadjoint images that were not certified "in".
    pub counterexamples: Vec<InvarianceCase>,
    pub holds: bool,
}

/// Re-certifies images of sampled cone points under `α_λ`, `μ·` and
/// `Ad*(exp a)`.
pub fn invariance_check(
    phi: &PairingMap,
    sample: &ConeSample,
    g: &GradedLieAlgebra,
    opts: &InvarianceOptions,
) -> Result<InvarianceReport> {
    if g.dim() != phi.len() {
        return Err(Error::DimensionMismatch(format!("algebra of dim {} for a cone in R^{}", g.dim(), phi.len())));
    }
    if sample.is_empty() {
        return Ok(InvarianceReport { cases: Vec::new(), counterexamples: Vec::new(), holds: true });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let count = opts.points.min(sample.len()).max(1);
    let step = sample.len() / count;
    let mut jobs: Vec<(Transform, usize, Vec<f64>, Vec<f64>)> = Vec::new();
    for c in 0..count {
        let idx = c * step;
        let xi = sample.point(idx);
        let lambda = rng.gen_range(0.5..2.0);
        jobs.push((Transform::Dilation, idx, vec![lambda], g.dilate_dual(&lambda, &xi).coords));
        let mu = if rng.gen_bool(0.5) { -1.0 } else { rng.gen_range(-2.0..2.0) };
        jobs.push((Transform::Scalar, idx, vec![mu], xi.scale(&mu).coords));
        let a: Vec<f64> = (0..g.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let img = g.coadjoint(&AlgebraElement::new(a.clone()), &xi).coords;
        jobs.push((Transform::Coadjoint, idx, a, img));
        if opts.negative_dilation {
            jobs.push((Transform::NegativeDilation, idx, vec![-1.0], g.dilate_dual(&-1.0, &xi).coords));
        }
    }
    let cases: Vec<InvarianceCase> = jobs
        .into_iter()
        .map(|(transform, sample_index, parameter, image)| {
            let v = membership(phi, &DualElement::new(image.clone()), &opts.membership)?;
            Ok(InvarianceCase { transform, sample_index, parameter, image, verdict: v.verdict, residual: v.residual })
        })
        .collect::<Result<_>>()?;
    let counterexamples: Vec<InvarianceCase> =
        cases.iter().filter(|c| c.transform != Transform::NegativeDilation && c.verdict != Verdict::In).cloned().collect();
    let holds = counterexamples.is_empty();
    Ok(InvarianceReport { cases, counterexamples, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfield::parse_field;

    fn example_b() -> PairingMap {
        let f: Vec<_> = ["x^2*dx", "x*dx", "dx"].iter().map(|s| parse_field(s, 1).unwrap()).collect();
        PairingMap::from_fields(&f, vec![1, 2, 3], vec![0.0]).unwrap()
    }

    #[test]
    fn pairing_components() {
        let phi = example_b();
        let v = phi.pairing(&[0.5], &[2.0], 0.1).coords;
        let want = [0.25 * 0.1 * 2.0, 0.5 * 0.01 * 2.0, 0.001 * 2.0];
        for (a, b) in v.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_candidate_is_in() {
        let v = membership(&example_b(), &DualElement::zero(3), &MembershipOptions::default()).unwrap();
        assert_eq!(v.verdict, Verdict::In);
    }

    #[test]
    fn nelder_mead_quadratic() {
        let (x, v) = nelder_mead(&|p: &[f64]| (p[0] - 1.0).powi(2) + (p[1] + 2.0).powi(2), &[0.0, 0.0], 0.5, 400);
        assert!(v < 1e-12 && (x[0] - 1.0).abs() < 1e-5);
    }
}
