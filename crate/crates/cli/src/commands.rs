//! The six subcommands. Each returns a JSON payload, CSV side tables and
//! whether any verdict was numerically inconclusive.

use hypocalc::bchflow::{flow_order_test, local_inverse_k, phi_map, FormalSeriesField, GradedLieBasis, InverseOptions};
use hypocalc::filtration::{check_hormander, fiber_dims, generate_filtration};
use hypocalc::hncone::{
    builtin_callback, invariance_check, membership, relation_minimum, relation_residual, sample_cone, BasisField,
    InvarianceOptions, MembershipOptions, PairingMap, SampleOptions, Verdict,
};
use hypocalc::osculating::{basis_label_text, osculating_at, AlgebraElement, DualElement, Osculating};
use hypocalc::polyfield::{parse_field, parse_poly, MultiPoly};
use hypocalc::rockland::{
    grushin_model, grushin_symbol, hypoellipticity_verdict, injectivity_test, spectrum_1d, CritOptions, Injectivity,
};
use hypocalc::scalar::{rational_string, rational_to_f64};
use hypocalc::symbols::{
    exact_pairing, induce_representation, letter_classes, parse_nc, principal_part, realize_symbol, symbol_character,
    weighted_order, PrincipalPart, SymbolOperator,
};
use hypocalc::Rational;
use num_complex::Complex;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{self, check_point_index, errors, rationals, require, Config, ConfigError, ProblemData};

pub struct Outcome {
    pub results: Value,
    /// `(file stem, contents)`; the first table is the one `--format csv` prints.
    pub tables: Vec<(String, String)>,
    pub inconclusive: bool,
}

#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<hypocalc::Error> for Failure {
    fn from(e: hypocalc::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Run = Result<Outcome, Failure>;

fn point_text(p: &[Rational]) -> Vec<String> {
    p.iter().map(rational_string).collect()
}

fn osculating(data: &ProblemData, idx: usize) -> Result<Osculating, Failure> {
    Ok(osculating_at(&data.generators, &data.points[idx], data.jet_order)?)
}

fn labels(osc: &Osculating) -> Vec<String> {
    let m = osc.analysis.point.len();
    osc.analysis.basis.iter().map(|b| basis_label_text(&b.label, m)).collect()
}

pub fn filtration(cfg: &Config) -> Run {
    let data = cfg.problem_data()?;
    let filt = generate_filtration(&data.generators)?;
    let words: Vec<Value> = filt
        .words
        .iter()
        .map(|w| {
            let letters: Vec<usize> = w.letters.iter().map(|l| l + 1).collect();
            json!({ "letters": letters, "weight": w.weight, "field": w.field.to_string() })
        })
        .collect();
    let mut csv = String::from("point,weight,dim\n");
    let mut points = Vec::new();
    for (i, p) in data.points.iter().enumerate() {
        let h = check_hormander(&data.generators, p, 0.0)?;
        let r = fiber_dims(&data.generators, p, data.jet_order, 0.0)?;
        for (w, d) in r.dims.iter().enumerate() {
            csv.push_str(&format!("{i},{},{d}\n", w + 1));
        }
        points.push(json!({
            "point": point_text(p),
            "hormander": h,
            "dims": r.dims,
            "total_dim": r.total_dim,
            "jet_order": r.jet_order,
            "stable": r.stable,
        }));
    }
    Ok(Outcome {
        results: json!({ "depth": data.generators.depth, "bracket_words": words, "points": points }),
        tables: vec![("fibers".into(), csv)],
        inconclusive: false,
    })
}

pub fn osculating_cmd(cfg: &Config) -> Run {
    let data = cfg.problem_data()?;
    let mut csv = String::from("point,i,j,k,c\n");
    let mut points = Vec::new();
    for i in 0..data.points.len() {
        let osc = osculating(&data, i)?;
        let g = &osc.algebra;
        for (a, b, c, q) in g.entries() {
            csv.push_str(&format!("{i},{},{},{},{}\n", a + 1, b + 1, c + 1, rational_string(&q)));
        }
        points.push(json!({
            "point": point_text(&data.points[i]),
            "dims": osc.analysis.dims,
            "basis": labels(&osc),
            "algebra": g.to_json(),
            "abelian": g.is_abelian(),
            "heisenberg": g.is_heisenberg(),
            "jacobi": g.check_jacobi(),
            "stable": osc.stable,
        }));
    }
    Ok(Outcome { results: json!({ "points": points }), tables: vec![("structure_constants".into(), csv)], inconclusive: false })
}

fn pairing_map(cfg: &Config, c: &config::ConeConfig) -> Result<(PairingMap, Option<Osculating>), Failure> {
    if c.basis.is_empty() {
        let data = cfg.problem_data()?;
        check_point_index(c.point, &data, "cone.point")?;
        let osc = osculating(&data, c.point)?;
        return Ok((PairingMap::from_osculating(&osc)?, Some(osc)));
    }
    let dim = c.at.len();
    let mut problems = Vec::new();
    if dim == 0 {
        problems.push("missing key `cone.at` (base point for an explicit basis)".into());
    }
    let mut fields = Vec::new();
    for (i, b) in c.basis.iter().enumerate() {
        match (&b.field, &b.callback) {
            (Some(f), None) => match parse_field(f, dim.max(1)) {
                Ok(f) => fields.push(BasisField::poly(&f)),
                Err(e) => problems.push(format!("`cone.basis[{i}].field`: {e}")),
            },
            (None, Some(name)) => match builtin_callback(name) {
                Some(f) if f.dim() == dim => fields.push(f),
                Some(f) => problems.push(format!("`cone.basis[{i}].callback` `{name}` lives on R^{}", f.dim())),
                None => problems.push(format!("`cone.basis[{i}].callback`: unknown callback `{name}`")),
            },
            _ => problems.push(format!("`cone.basis[{i}]` needs exactly one of `field` and `callback`")),
        }
    }
    errors(problems)?;
    let weights = c.basis.iter().map(|b| b.weight).collect();
    Ok((PairingMap::new(fields, weights, c.at.clone())?, None))
}

fn cone_polys(src: &[String], d: usize, key: &str, problems: &mut Vec<String>) -> Vec<MultiPoly<Rational>> {
    src.iter()
        .enumerate()
        .filter_map(|(i, s)| match parse_poly(s, d) {
            Ok(p) => Some(p),
            Err(e) => {
                problems.push(format!("`{key}[{i}]`: {e}"));
                None
            }
        })
        .collect()
}

pub fn cone(cfg: &Config, seed: u64) -> Run {
    let c = require(&cfg.cone, "cone")?;
    let (phi, osc) = pairing_map(cfg, c)?;
    let d = phi.len();
    let mut problems = Vec::new();
    let relations = cone_polys(&c.relations, d, "cone.relations", &mut problems);
    let nonneg = cone_polys(&c.nonnegative, d, "cone.nonnegative", &mut problems);
    let mut ratios = Vec::new();
    for (i, r) in c.ratios.iter().enumerate() {
        let num = cone_polys(std::slice::from_ref(&r.numerator), d, &format!("cone.ratios[{i}].numerator"), &mut problems);
        let den = cone_polys(std::slice::from_ref(&r.denominator), d, &format!("cone.ratios[{i}].denominator"), &mut problems);
        if let (Some(n), Some(q)) = (num.into_iter().next(), den.into_iter().next()) {
            ratios.push((r, n.to_f64(), q.to_f64()));
        }
    }
    for (i, m) in c.membership.iter().enumerate() {
        if m.len() != d {
            problems.push(format!("`cone.membership[{i}]` has {} coordinates, expected {d}", m.len()));
        }
    }
    if c.samples == 0 {
        problems.push("`cone.samples` must be positive".into());
    }
    errors(problems)?;

    let opts = SampleOptions {
        budget: c.samples,
        t_max: c.t_max,
        radius: c.radius,
        eta_decades: c.eta_decades,
        dedup_eps: c.dedup_eps,
        seed,
    };
    let sample = sample_cone(&phi, &opts)?;
    let rel: Vec<Value> = c
        .relations
        .iter()
        .zip(&relations)
        .map(|(s, r)| {
            let v = relation_residual(&sample, r);
            json!({ "relation": s, "max_abs": v, "holds": v < c.tolerance })
        })
        .collect();
    let nn: Vec<Value> = c
        .nonnegative
        .iter()
        .zip(&nonneg)
        .map(|(s, r)| {
            let v = relation_minimum(&sample, r);
            json!({ "expression": s, "minimum": v, "holds": v >= -c.tolerance })
        })
        .collect();
    let rat: Vec<Value> = ratios
        .iter()
        .map(|(r, n, q)| {
            let vals: Vec<f64> = sample
                .points
                .iter()
                .filter_map(|p| {
                    let den = q.eval_f64(p);
                    (den.abs() > r.floor).then(|| n.eval_f64(p) / den)
                })
                .collect();
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let holds = !vals.is_empty() && lo >= r.min - 1e-3 && hi <= r.max + 1e-3;
            json!({
                "numerator": r.numerator, "denominator": r.denominator,
                "count": vals.len(), "min": lo, "max": hi, "holds": holds,
            })
        })
        .collect();

    let mopts = MembershipOptions {
        starts: c.starts,
        iterations: c.iterations,
        eps_in: c.eps_in,
        eps_out: c.eps_out,
        t_small: c.t_small,
        radius: c.radius.max(1e-3) * 2.0,
        rungs: c.rungs,
        seed: seed.wrapping_add(1),
    };
    let verdicts: Vec<_> = c
        .membership
        .par_iter()
        .map(|xi| membership(&phi, &DualElement::new(xi.clone()), &mopts))
        .collect::<hypocalc::Result<_>>()?;
    let mut inconclusive = verdicts.iter().any(|v| v.verdict == Verdict::Inconclusive);

    let invariance = match (&osc, c.invariance_points) {
        (_, 0) => Value::Null,
        (None, _) => {
            return Err(
                ConfigError { problems: vec!["`cone.invariance_points` needs the fiber basis (no `cone.basis`)".into()] }.into()
            )
        }
        (Some(o), n) => {
            let iopts =
                InvarianceOptions { points: n, negative_dilation: false, seed: seed.wrapping_add(2), membership: mopts.clone() };
            let r = invariance_check(&phi, &sample, &o.algebra, &iopts)?;
            inconclusive |= r.cases.iter().any(|c| c.verdict == Verdict::Inconclusive);
            serde_json::to_value(&r).expect("report serializes")
        }
    };

    Ok(Outcome {
        results: json!({
            "samples": sample.len(),
            "reachability_error": sample.reachability_error(&phi),
            "normalization": sample.normalization,
            "relations": rel,
            "nonnegative": nn,
            "ratios": rat,
            "membership": verdicts,
            "invariance": invariance,
        }),
        tables: vec![("cone_sample".into(), sample.to_csv())],
        inconclusive,
    })
}

fn complex_text(z: &Complex<Rational>) -> Value {
    json!({ "re": rational_string(&z.re), "im": rational_string(&z.im) })
}

fn pp_text(pp: &PrincipalPart) -> Vec<Value> {
    pp.monomials
        .iter()
        .map(|(w, c)| {
            let word: Vec<String> = w.iter().map(|j| format!("X{}", j + 1)).collect();
            json!({ "word": word.join("*"), "coefficient": rational_string(c) })
        })
        .collect()
}

fn small_rational(rng: &mut ChaCha8Rng, span: i64, den: i64) -> Rational {
    hypocalc::scalar::rat(rng.gen_range(-span * den..=span * den), den)
}

pub fn symbol(cfg: &Config, seed: u64) -> Run {
    let data = cfg.problem_data()?;
    let s = require(&cfg.symbol, "symbol")?;
    check_point_index(s.point, &data, "symbol.point")?;
    let mut problems = Vec::new();
    if s.operators.is_empty() {
        problems.push("missing key `symbol.operators`".into());
    }
    let mut ops = Vec::new();
    for (i, src) in s.operators.iter().enumerate() {
        match parse_nc(src, &data.generators) {
            Ok(p) => ops.push(p),
            Err(e) => problems.push(format!("`symbol.operators[{i}]`: {e}")),
        }
    }
    errors(problems)?;
    let point = &data.points[s.point];
    let osc = osculating(&data, s.point)?;
    let d = osc.algebra.dim();
    let classes = letter_classes(&data.generators, &osc)?;
    let mut problems = Vec::new();
    let covectors: Vec<Vec<Rational>> =
        s.covectors.iter().enumerate().map(|(i, v)| rationals(v, &format!("symbol.covectors[{i}]"), &mut problems)).collect();
    let functionals: Vec<Vec<Rational>> =
        s.functionals.iter().enumerate().map(|(i, v)| rationals(v, &format!("symbol.functionals[{i}]"), &mut problems)).collect();
    for (i, v) in covectors.iter().chain(&functionals).enumerate() {
        if v.len() != d {
            problems.push(format!("covector/functional #{i} has {} entries, the osculating algebra has dimension {d}", v.len()));
        }
    }
    let pps: Vec<PrincipalPart> = ops.iter().map(|p| principal_part(p, point)).collect::<hypocalc::Result<_>>()?;
    let order = s.order.unwrap_or_else(|| pps.iter().map(|p| p.order).max().unwrap_or(0));
    let mut padded = Vec::new();
    for (i, pp) in pps.iter().enumerate() {
        match pp.at_order(order) {
            Ok(p) => padded.push(p),
            Err(_) => problems.push(format!("`symbol.operators[{i}]` has order {} above `symbol.order` = {order}", pp.order)),
        }
    }
    errors(problems)?;

    let reps = functionals
        .iter()
        .map(|l| induce_representation(&osc.algebra, &DualElement::new(l.clone())))
        .collect::<hypocalc::Result<Vec<_>>>()?;

    let mut csv = String::from("operator,covector,re,im\n");
    let mut out_ops = Vec::new();
    for (i, (p, pp)) in ops.iter().zip(&padded).enumerate() {
        let chars: Vec<Value> = covectors
            .iter()
            .enumerate()
            .map(|(j, xi)| {
                let v = symbol_character(pp, &classes, &DualElement::new(xi.clone()));
                csv.push_str(&format!("{i},{j},{},{}\n", rational_string(&v.re), rational_string(&v.im)));
                json!({ "covector": point_text(xi), "value": complex_text(&v) })
            })
            .collect();
        let realized: Vec<Value> = reps
            .iter()
            .map(|rep| {
                let op = realize_symbol(pp, &classes, rep);
                json!({ "functional": point_text(&rep.functional.coords), "variables": rep.q(), "operator": op.to_text() })
            })
            .collect();
        out_ops.push(json!({
            "source": s.operators[i],
            "normal_form": p.to_text(),
            "weighted_order": weighted_order(p),
            "principal_part": pp_text(pp),
            "characters": chars,
            "realized": realized,
        }));
    }

    // Exact pairing points t^w⟨η, B(x)⟩ at random rational parameters.
    let comparison = if s.cone_samples > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = point.len();
        let mut max_abs = vec![Rational::zero(); padded.len()];
        let mut agree = 0usize;
        for _ in 0..s.cone_samples {
            let x: Vec<Rational> = point.iter().map(|c| c + small_rational(&mut rng, 1, 16)).collect();
            let eta: Vec<Rational> = (0..m).map(|_| small_rational(&mut rng, 5, 4)).collect();
            let t = hypocalc::scalar::rat(rng.gen_range(1..=16), 16);
            let xi = exact_pairing(&osc, &x, &eta, &t)?;
            let vals: Vec<Complex<Rational>> = padded.iter().map(|pp| symbol_character(pp, &classes, &xi)).collect();
            for (m, v) in max_abs.iter_mut().zip(&vals) {
                let a = hypocalc::scalar::abs_rational(&v.re).max(hypocalc::scalar::abs_rational(&v.im));
                if a > *m {
                    *m = a;
                }
            }
            if vals.windows(2).all(|w| w[0] == w[1]) {
                agree += 1;
            }
        }
        json!({
            "points": s.cone_samples,
            "agreeing": agree,
            "max_abs": max_abs.iter().map(rational_string).collect::<Vec<_>>(),
        })
    } else {
        Value::Null
    };

    Ok(Outcome {
        results: json!({
            "point": point_text(point),
            "order": order,
            "basis": labels(&osc),
            "letter_classes": classes.iter().map(|c| point_text(&c.coords)).collect::<Vec<_>>(),
            "operators": out_ops,
            "cone_comparison": comparison,
        }),
        tables: vec![("characters".into(), csv)],
        inconclusive: false,
    })
}

fn realize_operator(o: &config::OperatorSpec, data: Option<&ProblemData>, i: usize) -> Result<SymbolOperator, Failure> {
    let key = format!("rockland.operators[{i}]");
    let shift = SymbolOperator::multiplication(MultiPoly::constant(
        1,
        Complex::new(
            Rational::from_float(o.shift)
                .ok_or_else(|| ConfigError { problems: vec![format!("`{key}.shift` is not finite")] })?,
            Rational::zero(),
        ),
    ));
    match (&o.model, &o.polynomial) {
        (Some((k, n)), None) => {
            if *k == 0 || *n == 0 {
                return Err(ConfigError { problems: vec![format!("`{key}.model` needs positive k and n")] }.into());
            }
            Ok(grushin_model(*k, *n).add(&shift))
        }
        (None, Some(src)) => {
            let Some(data) = data else {
                return Err(ConfigError { problems: vec![format!("`{key}.polynomial` needs a `problem` section")] }.into());
            };
            check_point_index(o.point, data, &format!("{key}.point"))?;
            let Some(l) = &o.functional else {
                return Err(ConfigError { problems: vec![format!("missing key `{key}.functional`")] }.into());
            };
            let mut problems = Vec::new();
            let l = rationals(l, &format!("{key}.functional"), &mut problems);
            let p =
                parse_nc(src, &data.generators).map_err(|e| ConfigError { problems: vec![format!("`{key}.polynomial`: {e}")] });
            let p = match p {
                Ok(p) => Some(p),
                Err(e) => {
                    problems.extend(e.problems);
                    None
                }
            };
            errors(problems)?;
            let p = p.expect("parsed");
            let osc = osculating(data, o.point)?;
            if l.len() != osc.algebra.dim() {
                return Err(ConfigError {
                    problems: vec![format!("`{key}.functional` has {} entries, expected {}", l.len(), osc.algebra.dim())],
                }
                .into());
            }
            let classes = letter_classes(&data.generators, &osc)?;
            let pp = principal_part(&p, &data.points[o.point])?;
            let rep = induce_representation(&osc.algebra, &DualElement::new(l))?;
            if rep.q() != 1 {
                return Err(Failure::Runtime(format!(
                    "`{key}`: the representation acts on {} variables; one is supported",
                    rep.q()
                )));
            }
            Ok(realize_symbol(&pp, &classes, &rep).add(&shift))
        }
        _ => Err(ConfigError { problems: vec![format!("`{key}` needs exactly one of `model` and `polynomial`")] }.into()),
    }
}

fn resolve_lambda(v: &config::Num, model: &[f64], n: u32, key: &str) -> Result<f64, ConfigError> {
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let bad = |msg: String| ConfigError { problems: vec![format!("`{key}`: {msg}")] };
    if let config::Num::Text(s) = v {
        let pick = |j: &str| -> Result<usize, ConfigError> {
            let j: usize = j.parse().map_err(|_| bad(format!("bad index in `{s}`")))?;
            if j == 0 {
                return Err(bad("eigenvalues are numbered from 1".into()));
            }
            Ok(j - 1)
        };
        if let Some(j) = s.strip_prefix("eigen:") {
            let j = pick(j)?;
            let e = model.get(j).ok_or_else(|| bad(format!("only {} converged eigenvalues", model.len())))?;
            return Ok(sign * e);
        }
        if let Some(j) = s.strip_prefix("gap:") {
            let j = pick(j)?;
            if j + 1 >= model.len() {
                return Err(bad(format!("only {} converged eigenvalues", model.len())));
            }
            return Ok(sign * 0.5 * (model[j] + model[j + 1]));
        }
    }
    v.f64().ok_or_else(|| bad("expected a number, `eigen:j` or `gap:j`".into()))
}

pub fn rockland(cfg: &Config) -> Run {
    let r = require(&cfg.rockland, "rockland")?;
    let data = match &cfg.problem {
        Some(_) => Some(cfg.problem_data()?),
        None => None,
    };
    let mut problems = Vec::new();
    if r.operators.is_empty() && r.sweeps.is_empty() {
        problems.push("`rockland` needs `operators` or `sweeps`".into());
    }
    if r.ladder.len() < 2 {
        problems.push("`rockland.ladder` needs at least two sizes".into());
    }
    errors(problems)?;
    let mut inconclusive = false;
    let mut csv = String::from("operator,index,eigenvalue,converged\n");
    let mut ops = Vec::new();
    for (i, o) in r.operators.iter().enumerate() {
        let s = realize_operator(o, data.as_ref(), i)?;
        let spectrum = if o.spectrum && s.is_formally_symmetric() {
            let rep = spectrum_1d(&s, r.count, r.size, r.tol)?;
            for (j, e) in rep.eigenvalues.iter().enumerate() {
                csv.push_str(&format!("{},{},{e:?},{}\n", o.name, j + 1, j < rep.converged_count));
            }
            serde_json::to_value(&rep).expect("report serializes")
        } else {
            Value::Null
        };
        let injectivity = if o.injectivity {
            let mut rep = injectivity_test(&s, &r.ladder, r.threshold)?;
            inconclusive |= rep.verdict == Injectivity::Inconclusive;
            rep.null_vector = None;
            serde_json::to_value(&rep).expect("report serializes")
        } else {
            Value::Null
        };
        ops.push(json!({
            "name": o.name,
            "operator": s.to_text(),
            "symmetric": s.is_formally_symmetric(),
            "spectrum": spectrum,
            "injectivity": injectivity,
        }));
    }
    let copts = CritOptions { size: r.size, count: r.count, tol: r.tol, beta: r.beta };
    let mut sweeps = Vec::new();
    for (i, sw) in r.sweeps.iter().enumerate() {
        if sw.k == 0 || sw.n == 0 {
            return Err(ConfigError { problems: vec![format!("`rockland.sweeps[{i}]` needs positive k and n")] }.into());
        }
        let model = spectrum_1d(&grushin_model(sw.k, sw.n), r.count, r.size, r.tol)?;
        let conv = &model.eigenvalues[..model.converged_count];
        let lambdas: Vec<f64> = sw
            .lambdas
            .iter()
            .enumerate()
            .map(|(j, v)| resolve_lambda(v, conv, sw.n, &format!("rockland.sweeps[{i}].lambdas[{j}]")))
            .collect::<Result<_, _>>()?;
        let verdicts: Vec<Value> = lambdas
            .par_iter()
            .map(|&l| hypoellipticity_verdict(sw.k, sw.n, Complex::new(l, 0.0), &copts))
            .collect::<hypocalc::Result<Vec<_>>>()?
            .into_iter()
            .map(|mut v| {
                inconclusive |= v.hypoelliptic.is_none();
                v.spectrum.coarse.clear();
                json!({
                    "lambda": v.lambda.0,
                    "hypoelliptic": v.hypoelliptic,
                    "basis": v.basis,
                    "target": v.target.0,
                    "nearest_index": v.nearest_index.map(|j| j + 1),
                    "distance": v.distance,
                    "ceiling": v.ceiling,
                    "beta_invariant": v.beta_invariant,
                    "beta_scaling_error": v.beta_scaling_error,
                })
            })
            .collect();
        sweeps.push(json!({
            "k": sw.k,
            "n": sw.n,
            "model_operator": grushin_symbol(sw.k, sw.n, &Rational::from_integer(1.into()), Complex::zero()).to_text(),
            "model_eigenvalues": conv,
            "verdicts": verdicts,
        }));
    }
    Ok(Outcome { results: json!({ "operators": ops, "sweeps": sweeps }), tables: vec![("spectra".into(), csv)], inconclusive })
}

fn series(src: &[String], dim: usize, key: &str, problems: &mut Vec<String>) -> Option<FormalSeriesField> {
    let mut out = Vec::new();
    for (i, s) in src.iter().enumerate() {
        match parse_field(s, dim) {
            Ok(f) => out.push(f),
            Err(e) => problems.push(format!("`{key}[{i}]`: {e}")),
        }
    }
    if src.is_empty() {
        problems.push(format!("`{key}` needs at least one coefficient"));
    }
    FormalSeriesField::new(out).ok()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub fn bch(cfg: &Config, seed: u64) -> Run {
    let b = require(&cfg.bch, "bch")?;
    let mut problems = Vec::new();
    if b.pairs.is_empty() && b.phi.is_none() {
        problems.push("`bch` needs `pairs` or `phi`".into());
    }
    if b.grid.iter().any(|t| t.is_nan() || *t <= 0.0) {
        problems.push("`bch.grid` entries must be positive".into());
    }
    let mut pairs = Vec::new();
    for (i, p) in b.pairs.iter().enumerate() {
        let x = series(&p.x, p.dim, &format!("bch.pairs[{i}].x"), &mut problems);
        let y = series(&p.y, p.dim, &format!("bch.pairs[{i}].y"), &mut problems);
        if p.point.len() != p.dim {
            problems.push(format!("`bch.pairs[{i}].point` has {} coordinates, expected {}", p.point.len(), p.dim));
        }
        if let (Some(x), Some(y)) = (x, y) {
            pairs.push((p, x, y));
        }
    }
    errors(problems)?;

    let mut inconclusive = false;
    let mut csv = String::from("pair,n,t,error\n");
    let mut fits = Vec::new();
    for (p, x, y) in &pairs {
        for &n in &b.orders {
            let f = flow_order_test(x, y, &p.point, n, &b.grid)?;
            inconclusive |= f.inconclusive;
            for (t, e) in f.t_grid.iter().zip(&f.errors) {
                let e = e.map_or(String::new(), |e| format!("{e:?}"));
                csv.push_str(&format!("{},{n},{t:?},{e}\n", p.name));
            }
            fits.push(json!({
                "pair": p.name,
                "n": n,
                "slope": f.slope,
                "fit_residual": f.fit_residual,
                "exactly_zero": f.exactly_zero,
                "inconclusive": f.inconclusive,
                "passed": f.passed,
                "flow_tol": f.flow_tol,
            }));
        }
    }

    let phi = match &b.phi {
        None => Value::Null,
        Some(pc) => {
            let data = cfg.problem_data()?;
            check_point_index(pc.point, &data, "bch.phi.point")?;
            let osc = osculating(&data, pc.point)?;
            let basis = GradedLieBasis::from_osculating(&osc);
            let at: Vec<f64> =
                if pc.at.is_empty() { data.points[pc.point].iter().map(rational_to_f64).collect() } else { pc.at.clone() };
            if at.len() != basis.manifold_dim() || pc.ts.is_empty() {
                return Err(ConfigError { problems: vec!["`bch.phi.at` or `bch.phi.ts` has the wrong shape".into()] }.into());
            }
            let (report, failed) = phi_checks(&basis, &at, pc, seed)?;
            inconclusive |= failed > 0;
            report
        }
    };

    Ok(Outcome { results: json!({ "fits": fits, "phi": phi }), tables: vec![("order_fits".into(), csv)], inconclusive })
}

fn phi_checks(basis: &GradedLieBasis, at: &[f64], pc: &config::PhiConfig, seed: u64) -> Result<(Value, usize), Failure> {
    let g = &basis.algebra;
    let d = g.dim();
    let opts = InverseOptions::default();
    let flow = hypocalc::polyfield::FlowOptions::with_tol(opts.flow_tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let elem = |rng: &mut ChaCha8Rng| AlgebraElement::new((0..d).map(|_| rng.gen_range(-pc.scale..pc.scale)).collect());
    let cases: Vec<(AlgebraElement<f64>, AlgebraElement<f64>, f64, f64)> = (0..pc.instances)
        .map(|i| {
            let y = elem(&mut rng);
            let x = elem(&mut rng);
            (y, x, pc.ts[i % pc.ts.len()], rng.gen_range(0.5..2.0))
        })
        .collect();
    let rows: Vec<Result<[f64; 5], String>> = cases
        .par_iter()
        .map(|(y, x, t, lam)| {
            let run = || -> hypocalc::Result<[f64; 5]> {
                let zero = AlgebraElement::new(vec![0.0; d]);
                let t0 = dist(&phi_map(basis, y, x, at, 0.0, &opts)?.coords, &g.bch(y, x).coords);
                let y0 = dist(&phi_map(basis, &zero, x, at, *t, &opts)?.coords, &x.coords);
                let out = phi_map(basis, y, x, at, *t, &opts)?;
                let lhs = basis.exp_act(&g.dilate(t, &out).coords, at, &flow)?;
                let inner = basis.exp_act(&g.dilate(t, x).coords, at, &flow)?;
                let rhs = basis.exp_act(&g.dilate(t, y).coords, &inner, &flow)?;
                let scaled = phi_map(basis, &g.dilate(lam, y), &g.dilate(lam, x), at, t / lam, &opts)?;
                let equiv = dist(&scaled.coords, &g.dilate(lam, &out).coords);
                Ok([t0, y0, dist(&lhs, &rhs), equiv, dist(&out.coords, &g.bch(y, x).coords)])
            };
            run().map_err(|e| e.to_string())
        })
        .collect();
    let failures: Vec<String> = rows.iter().filter_map(|r| r.as_ref().err().cloned()).collect();
    let ok: Vec<[f64; 5]> = rows.into_iter().filter_map(|r| r.ok()).collect();
    let max = |k: usize| ok.iter().map(|r| r[k]).fold(0.0, f64::max);

    let inverse: Vec<Result<f64, String>> = (0..100)
        .map(|_| {
            let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.1..0.1)).collect();
            v
        })
        .collect::<Vec<_>>()
        .par_iter()
        .map(|v| {
            let run = || -> hypocalc::Result<f64> {
                let target = basis.exp_act(v, at, &flow)?;
                Ok(local_inverse_k(basis, &vec![0.0; d], &target, at, &opts)?.residual)
            };
            run().map_err(|e| e.to_string())
        })
        .collect();
    let inverse_failures = inverse.iter().filter(|r| r.is_err()).count();
    let inverse_max = inverse.iter().filter_map(|r| r.as_ref().ok()).cloned().fold(0.0, f64::max);
    let report = json!({
        "instances": pc.instances,
        "failures": failures,
        "group_law_error": max(0),
        "identity_error": max(1),
        "evaluation_error": max(2),
        "evaluation_tolerance": 10.0 * opts.flow_tol,
        "equivariance_error": max(3),
        "departure_from_group_law": max(4),
        "inverse_round_trips": 100,
        "inverse_failures": inverse_failures,
        "inverse_max_residual": inverse_max,
    });
    Ok((report, failures.len() + inverse_failures))
}
