//! Time-one flows by the Dormand–Prince 5(4) embedded pair.

use super::field::VectorField;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowOptions {
    /// Per-step local error bound (mixed absolute/relative).
    pub tol: f64,
    /// Divergence guard on the Euclidean norm of the state.
    pub bound: f64,
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { tol: 1e-10, bound: 1e9, max_steps: 1_000_000 }
    }
}

impl FlowOptions {
    pub fn with_tol(tol: f64) -> Self {
        FlowOptions { tol, ..Default::default() }
    }
}

/// A polynomial field flattened to float monomials for fast evaluation.
#[derive(Clone, Debug)]
pub struct CompiledField {
    dim: usize,
    /// Per component: (coefficient, exponents).
    terms: Vec<Vec<(f64, Vec<u32>)>>,
    max_exp: Vec<u32>,
}

impl CompiledField {
    pub fn new<R: Real>(x: &VectorField<R>) -> Self {
        let dim = x.dim();
        let mut max_exp = vec![0; dim];
        let terms = x
            .components()
            .iter()
            .map(|c| {
                c.terms()
                    .map(|(m, a)| {
                        for (k, &e) in m.0.iter().enumerate() {
                            max_exp[k] = max_exp[k].max(e);
                        }
                        (a.to_f64(), m.0.clone())
                    })
                    .collect()
            })
            .collect();
        CompiledField { dim, terms, max_exp }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval_into(&self, p: &[f64], out: &mut [f64]) {
        let mut pw: Vec<Vec<f64>> = Vec::with_capacity(self.dim);
        for (k, &e) in self.max_exp.iter().enumerate() {
            let mut v = Vec::with_capacity(e as usize + 1);
            v.push(1.0);
            for j in 1..=e as usize {
                v.push(v[j - 1] * p[k]);
            }
            pw.push(v);
        }
        for (o, comp) in out.iter_mut().zip(&self.terms) {
            let mut acc = 0.0;
            for (c, e) in comp {
                let mut t = *c;
                for (k, &ek) in e.iter().enumerate() {
                    if ek > 0 {
                        t *= pw[k][ek as usize];
                    }
                }
                acc += t;
            }
            *o = acc;
        }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `ẋ = f(x)` from `p` over `[0, t_end]`.
pub fn integrate(f: &dyn Fn(&[f64], &mut [f64]), p: &[f64], t_end: f64, opts: &FlowOptions) -> Result<Vec<f64>> {
    let n = p.len();
    let mut y = p.to_vec();
    if t_end == 0.0 || n == 0 {
        return Ok(y);
    }
    let dir = t_end.signum();
    let span = t_end.abs();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let g = |y: &[f64], out: &mut [f64]| {
        f(y, out);
        if dir < 0.0 {
            out.iter_mut().for_each(|v| *v = -*v);
        }
    };
    g(&y, &mut k[0]);
    let tol = opts.tol.max(1e-300);
    // Relative part floored near machine precision so tiny tolerances stay reachable.
    let rtol = tol.max(4.0 * f64::EPSILON);
    let mut h = initial_step(&y, &k[0], span, tol);
    let mut t = 0.0;
    let mut steps = 0;
    while t < span {
        if steps >= opts.max_steps {
            return Err(Error::FlowStepLimit(opts.max_steps));
        }
        steps += 1;
        let last = t + h >= span * (1.0 - 1e-15);
        if last {
            h = span - t;
        }
        let stage = |coef: &[(usize, f64)], k: &Vec<Vec<f64>>, tmp: &mut Vec<f64>| {
            for i in 0..n {
                let mut s = y[i];
                for &(j, a) in coef {
                    s += h * a * k[j][i];
                }
                tmp[i] = s;
            }
        };
        stage(&[(0, A21)], &k, &mut tmp);
        g(&tmp, &mut k[1]);
        stage(&[(0, A31), (1, A32)], &k, &mut tmp);
        g(&tmp, &mut k[2]);
        stage(&[(0, A41), (1, A42), (2, A43)], &k, &mut tmp);
        g(&tmp, &mut k[3]);
        stage(&[(0, A51), (1, A52), (2, A53), (3, A54)], &k, &mut tmp);
        g(&tmp, &mut k[4]);
        stage(&[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)], &k, &mut tmp);
        g(&tmp, &mut k[5]);
        stage(&[(0, B1), (2, B3), (3, B4), (4, B5), (5, B6)], &k, &mut ynew);
        g(&ynew, &mut k[6]);
        let mut err = 0.0f64;
        for i in 0..n {
            let e = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            let sc = tol + rtol * y[i].abs().max(ynew[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            h *= 0.1;
            if h < span * 1e-14 {
                return Err(Error::FlowEscaped { t: dir * t, norm: f64::INFINITY });
            }
            continue;
        }
        if err <= 1.0 {
            t = if last { span } else { t + h };
            std::mem::swap(&mut y, &mut ynew);
            k.swap(0, 6);
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !norm.is_finite() || norm > opts.bound {
                return Err(Error::FlowEscaped { t: dir * t, norm });
            }
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
        if h < span * 1e-14 && t < span {
            return Err(Error::FlowEscaped { t: dir * t, norm: y.iter().map(|v| v * v).sum::<f64>().sqrt() });
        }
    }
    Ok(y)
}

fn initial_step(y: &[f64], f0: &[f64], span: f64, tol: f64) -> f64 {
    let d0 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let d1 = f0.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = if d1 < 1e-12 { span } else { 0.1 * (d0.max(tol.powf(0.2)) / d1).min(span) };
    h.clamp(span * 1e-6, span)
}

/// Time-one flow `exp(X)·p`.
pub fn flow_time_one<R: Real>(x: &VectorField<R>, p: &[f64], opts: &FlowOptions) -> Result<Vec<f64>> {
    if p.len() != x.dim() {
        return Err(Error::DimensionMismatch(format!("point of length {} for a field on R^{}", p.len(), x.dim())));
    }
    let c = CompiledField::new(x);
    flow_compiled(&c, p, 1.0, opts)
}

pub fn flow_compiled(c: &CompiledField, p: &[f64], t: f64, opts: &FlowOptions) -> Result<Vec<f64>> {
    integrate(&|y, out| c.eval_into(y, out), p, t, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfield::parse::parse_field;

    #[test]
    fn linear_field_gives_e() {
        let x = parse_field("x*dx", 1).unwrap();
        let y = flow_time_one(&x, &[1.0], &FlowOptions::with_tol(1e-12)).unwrap();
        assert!((y[0] - std::f64::consts::E).abs() < 1e-10);
    }

    #[test]
    fn zero_field_is_identity() {
        let x = parse_field("0", 2).unwrap();
        assert_eq!(flow_time_one(&x, &[0.3, -1.0], &FlowOptions::default()).unwrap(), vec![0.3, -1.0]);
    }

    #[test]
    fn blowup_trips_the_guard() {
        // ẋ = x² from x=2 escapes at t = 1/2.
        let x = parse_field("x^2*dx", 1).unwrap();
        match flow_time_one(&x, &[2.0], &FlowOptions::default()) {
            Err(Error::FlowEscaped { .. }) => {}
            other => panic!("expected escape, got {other:?}"),
        }
    }

    #[test]
    fn backward_time() {
        let x = parse_field("x*dx", 1).unwrap();
        let c = CompiledField::new(&x);
        let y = flow_compiled(&c, &[1.0], -1.0, &FlowOptions::with_tol(1e-12)).unwrap();
        assert!((y[0] - (-1f64).exp()).abs() < 1e-11);
    }
}
