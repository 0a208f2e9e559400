//! Problem configuration: TOML (or JSON) with every knob defaulted.
//!
//! Unknown keys are collected over the whole document and reported
//! together; semantic checks run afterwards and also report every problem.

use std::path::Path;

use hypocalc::filtration::WeightedGenerators;
use hypocalc::polyfield::parse_field;
use hypocalc::scalar::parse_rational;
use hypocalc::Rational;
use serde::{Deserialize, Serialize};

/// Number given either as a TOML/JSON number or as text such as `"1/3"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Num {
    pub fn rational(&self) -> Option<Rational> {
        match self {
            Num::Int(n) => Some(Rational::from_integer((*n).into())),
            // Shortest round-trip text, read as an exact decimal.
            Num::Float(x) if x.is_finite() => parse_rational(&format!("{x:?}")),
            Num::Float(_) => None,
            Num::Text(s) => parse_rational(s),
        }
    }

    pub fn f64(&self) -> Option<f64> {
        match self {
            Num::Int(n) => Some(*n as f64),
            Num::Float(x) => Some(*x),
            Num::Text(s) => parse_rational(s).map(|q| hypocalc::scalar::rational_to_f64(&q)),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Config {
    /// Base seed; `--seed` overrides it. Default 0.
    pub seed: Option<u64>,
    pub problem: Option<Problem>,
    pub cone: Option<ConeConfig>,
    pub symbol: Option<SymbolConfig>,
    pub rockland: Option<RocklandConfig>,
    pub bch: Option<BchConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Generator {
    pub field: String,
    pub weight: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Problem {
    pub dim: Option<usize>,
    pub depth: Option<u32>,
    #[serde(default)]
    pub generators: Vec<Generator>,
    #[serde(default)]
    pub points: Vec<Vec<Num>>,
    /// Treat `F^depth` as all vector fields.
    #[serde(default)]
    pub declared_full: bool,
    /// Jet order for fiber computations; default: depth raised to the
    /// largest polynomial degree among bracket words.
    pub jet_order: Option<u32>,
}

/// One basis field of the pairing map: a polynomial field or a built-in
/// callback (`flat_radial`, `flat_angular`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisSpec {
    pub field: Option<String>,
    pub callback: Option<String>,
    pub weight: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioCheck {
    pub numerator: String,
    pub denominator: String,
    pub min: f64,
    pub max: f64,
    /// Samples with `|denominator|` at or below this are skipped.
    #[serde(default = "default_ratio_floor")]
    pub floor: f64,
}

fn default_ratio_floor() -> f64 {
    1e-6
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ConeConfig {
    /// Index into `problem.points`.
    pub point: usize,
    /// Explicit pairing basis; when empty the fiber basis of the
    /// osculating algebra at `problem.points[point]` is used.
    pub basis: Vec<BasisSpec>,
    /// Base point for an explicit basis.
    pub at: Vec<f64>,
    pub samples: usize,
    pub t_max: f64,
    pub radius: f64,
    pub eta_decades: (f64, f64),
    pub dedup_eps: f64,
    /// Polynomials in `x1..xd` that must vanish on the cone.
    pub relations: Vec<String>,
    /// Polynomials in `x1..xd` that must be nonnegative on the cone.
    pub nonnegative: Vec<String>,
    pub ratios: Vec<RatioCheck>,
    pub tolerance: f64,
    pub membership: Vec<Vec<f64>>,
    pub starts: usize,
    pub iterations: usize,
    pub eps_in: f64,
    pub eps_out: f64,
    pub t_small: f64,
    pub rungs: usize,
    /// Sample points re-certified under dilation, scaling and coadjoint action; 0 disables.
    pub invariance_points: usize,
}

impl Default for ConeConfig {
    fn default() -> Self {
        ConeConfig {
            point: 0,
            basis: Vec::new(),
            at: Vec::new(),
            samples: 2000,
            t_max: 0.5,
            radius: 0.5,
            eta_decades: (-3.0, 3.0),
            dedup_eps: 1e-9,
            relations: Vec::new(),
            nonnegative: Vec::new(),
            ratios: Vec::new(),
            tolerance: 1e-8,
            membership: Vec::new(),
            starts: 64,
            iterations: 500,
            eps_in: 1e-6,
            eps_out: 1e-2,
            t_small: 1e-3,
            rungs: 3,
            invariance_points: 0,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SymbolConfig {
    pub point: usize,
    /// Words in `X1..Xm` with coordinate coefficients, e.g. `X1*X2 - X3*X3`.
    pub operators: Vec<String>,
    /// Common order `k`; default: the largest weighted order among the operators.
    pub order: Option<u32>,
    /// Covectors in the fiber basis dual coordinates.
    pub covectors: Vec<Vec<Num>>,
    /// Functionals whose induced representations realize the symbols.
    pub functionals: Vec<Vec<Num>>,
    /// Exact cone points `t^w ⟨η, B(x)⟩` on which all presentations are compared.
    pub cone_samples: usize,
}

/// A one-variable operator for the spectral tools.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub name: String,
    /// `[k, n]` selects the model family `(−1)^{n(k+n)}∂^{2n(k+n)} + y^{2k(k+n)}`.
    pub model: Option<(u32, u32)>,
    /// Alternatively an operator polynomial in the problem's generators,
    /// realized through the representation induced from `functional`.
    pub polynomial: Option<String>,
    pub functional: Option<Vec<Num>>,
    #[serde(default)]
    pub point: usize,
    /// Real constant added to the operator.
    #[serde(default)]
    pub shift: f64,
    #[serde(default = "default_true")]
    pub spectrum: bool,
    #[serde(default = "default_true")]
    pub injectivity: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSpec {
    pub k: u32,
    pub n: u32,
    /// Numbers, `"eigen:j"` (the j-th model eigenvalue) or `"gap:j"`
    /// (midpoint between eigenvalues j and j+1).
    pub lambdas: Vec<Num>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct RocklandConfig {
    pub operators: Vec<OperatorSpec>,
    pub sweeps: Vec<SweepSpec>,
    pub count: usize,
    pub size: usize,
    pub ladder: Vec<usize>,
    pub threshold: f64,
    pub tol: f64,
    pub beta: f64,
}

impl Default for RocklandConfig {
    fn default() -> Self {
        RocklandConfig {
            operators: Vec::new(),
            sweeps: Vec::new(),
            count: 12,
            size: 128,
            ladder: hypocalc::rockland::DEFAULT_LADDER.to_vec(),
            threshold: hypocalc::rockland::DEFAULT_THRESHOLD,
            tol: hypocalc::rockland::DEFAULT_SPECTRAL_TOL,
            beta: 2.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairSpec {
    pub name: String,
    pub dim: usize,
    /// Coefficients of `t, t², …`.
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub point: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct PhiConfig {
    pub point: usize,
    /// Evaluation point near the base point.
    pub at: Vec<f64>,
    pub instances: usize,
    /// Range of the random algebra coordinates.
    pub scale: f64,
    pub ts: Vec<f64>,
}

impl Default for PhiConfig {
    fn default() -> Self {
        PhiConfig { point: 0, at: Vec::new(), instances: 50, scale: 0.5, ts: vec![0.5, 0.25, 0.1, 0.05] }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct BchConfig {
    pub orders: Vec<usize>,
    pub grid: Vec<f64>,
    pub pairs: Vec<PairSpec>,
    pub phi: Option<PhiConfig>,
}

impl Default for BchConfig {
    fn default() -> Self {
        BchConfig { orders: vec![1, 2, 3], grid: hypocalc::bchflow::default_t_grid(), pairs: Vec::new(), phi: None }
    }
}

#[derive(Debug)]
pub struct ConfigError {
    pub problems: Vec<String>,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "invalid configuration:")?;
        for p in &self.problems {
            writeln!(f, "  {p}")?;
        }
        Ok(())
    }
}

pub struct Loaded {
    pub config: Config,
    pub bytes: Vec<u8>,
}

/// Dotted key path with `Option` and newtype wrappers elided.
fn key_path(p: &serde_ignored::Path) -> String {
    use serde_ignored::Path;
    let (parent, seg) = match p {
        Path::Root => return String::new(),
        Path::Seq { parent, index } => (parent, Some(index.to_string())),
        Path::Map { parent, key } => (parent, Some(key.clone())),
        Path::Some { parent } | Path::NewtypeStruct { parent } | Path::NewtypeVariant { parent } => (parent, None),
    };
    let head = key_path(parent);
    match seg {
        Some(s) if head.is_empty() => s,
        Some(s) => format!("{head}.{s}"),
        None => head,
    }
}

fn invalid(problems: Vec<String>) -> ConfigError {
    ConfigError { problems }
}

pub fn load(path: &Path) -> Result<Loaded, ConfigError> {
    let bytes = std::fs::read(path).map_err(|e| invalid(vec![format!("{}: {e}", path.display())]))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| invalid(vec![format!("{}: not UTF-8", path.display())]))?;
    let json = path.extension().is_some_and(|e| e == "json");
    let config = parse(text, json)?;
    Ok(Loaded { config, bytes })
}

pub fn parse(text: &str, json: bool) -> Result<Config, ConfigError> {
    let mut unknown = Vec::new();
    let parsed: Result<Config, String> = if json {
        let mut de = serde_json::Deserializer::from_str(text);
        serde_ignored::deserialize(&mut de, |p| unknown.push(key_path(&p))).map_err(|e| e.to_string())
    } else {
        let de = toml::Deserializer::new(text);
        serde_ignored::deserialize(de, |p| unknown.push(key_path(&p))).map_err(|e| e.to_string().trim_end().to_string())
    };
    let mut problems: Vec<String> = unknown.into_iter().map(|k| format!("unknown key `{k}`")).collect();
    match parsed {
        Ok(c) if problems.is_empty() => Ok(c),
        Ok(_) => Err(invalid(problems)),
        Err(e) => {
            problems.push(e);
            Err(invalid(problems))
        }
    }
}

/// The validated problem section.
pub struct ProblemData {
    pub generators: WeightedGenerators,
    pub points: Vec<Vec<Rational>>,
    pub jet_order: Option<u32>,
}

impl Config {
    /// Checks the `problem` section, listing every problem found.
    pub fn problem_data(&self) -> Result<ProblemData, ConfigError> {
        let Some(p) = &self.problem else {
            return Err(invalid(vec!["missing section `problem`".into()]));
        };
        let mut problems = Vec::new();
        if p.dim.is_none() {
            problems.push("missing key `problem.dim`".into());
        }
        if p.depth.is_none() {
            problems.push("missing key `problem.depth`".into());
        }
        if p.generators.is_empty() {
            problems.push("missing key `problem.generators` (at least one generator is required)".into());
        }
        if p.points.is_empty() {
            problems.push("missing key `problem.points` (at least one base point is required)".into());
        }
        let dim = p.dim.unwrap_or(0);
        if p.dim == Some(0) {
            problems.push("`problem.dim` must be positive".into());
        }
        let mut fields = Vec::new();
        for (i, g) in p.generators.iter().enumerate() {
            if g.weight == 0 {
                problems.push(format!("`problem.generators[{i}].weight` must be positive"));
            }
            if dim > 0 {
                match parse_field(&g.field, dim) {
                    Ok(f) => fields.push(f),
                    Err(e) => problems.push(format!("`problem.generators[{i}].field`: {e}")),
                }
            }
        }
        let mut points = Vec::new();
        for (i, pt) in p.points.iter().enumerate() {
            if dim > 0 && pt.len() != dim {
                problems.push(format!("`problem.points[{i}]` has {} coordinates, expected {dim}", pt.len()));
                continue;
            }
            let mut coords = Vec::new();
            for (j, c) in pt.iter().enumerate() {
                match c.rational() {
                    Some(q) => coords.push(q),
                    None => problems.push(format!("`problem.points[{i}][{j}]` is not a number")),
                }
            }
            points.push(coords);
        }
        if !problems.is_empty() {
            return Err(invalid(problems));
        }
        let weights = p.generators.iter().map(|g| g.weight).collect();
        let generators = WeightedGenerators::new(fields, weights, p.depth.unwrap_or(0))
            .map_err(|e| invalid(vec![format!("`problem`: {e}")]))?
            .with_declared_full(p.declared_full);
        Ok(ProblemData { generators, points, jet_order: p.jet_order })
    }
}

pub fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T, ConfigError> {
    section.as_ref().ok_or_else(|| invalid(vec![format!("missing section `{name}`")]))
}

pub fn check_point_index(idx: usize, data: &ProblemData, key: &str) -> Result<(), ConfigError> {
    if idx >= data.points.len() {
        return Err(invalid(vec![format!("`{key}` = {idx} but only {} points are listed", data.points.len())]));
    }
    Ok(())
}

pub fn rationals(v: &[Num], key: &str, problems: &mut Vec<String>) -> Vec<Rational> {
    v.iter()
        .enumerate()
        .filter_map(|(i, c)| {
            let q = c.rational();
            if q.is_none() {
                problems.push(format!("`{key}[{i}]` is not a number"));
            }
            q
        })
        .collect()
}

pub fn errors(problems: Vec<String>) -> Result<(), ConfigError> {
    if problems.is_empty() {
        Ok(())
    } else {
        Err(invalid(problems))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_unknown_key_is_listed() {
        let err = parse("[problem]\ndim = 1\nbogus = 2\n[cone]\nsampels = 3\n", false).unwrap_err();
        assert_eq!(err.problems.len(), 2);
        assert!(err.problems[0].contains("problem.bogus"));
        assert!(err.problems[1].contains("cone.sampels"));
    }

    #[test]
    fn json_is_accepted() {
        let c = parse(
            r#"{"problem": {"dim": 1, "depth": 2, "generators": [{"field": "dx", "weight": 1}], "points": [["1/2"]]}}"#,
            true,
        )
        .unwrap();
        let d = c.problem_data().unwrap();
        assert_eq!(d.points[0][0], hypocalc::scalar::rat(1, 2));
    }

    #[test]
    fn floats_read_as_decimals() {
        assert_eq!(Num::Float(0.1).rational(), Some(hypocalc::scalar::rat(1, 10)));
    }

    #[test]
    fn missing_generators_named() {
        let c = parse("[problem]\ndim = 1\ndepth = 2\npoints = [[0]]\n", false).unwrap();
        let err = c.problem_data().err().unwrap();
        assert!(err.problems.iter().any(|p| p.contains("problem.generators")));
    }
}
