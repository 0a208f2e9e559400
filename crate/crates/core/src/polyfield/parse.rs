//! Text grammar for polynomials and vector fields.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/' | <juxtaposition>) unary)*
//! unary := '-' unary | power
//! power := atom ('^' atom)?
//! atom  := number | name | '(' expr ')'
//! ```
//!
//! Names are resolved by a [`Grammar`], so the same engine reads vector
//! fields (`x1..xm`, `d/dx1..`) and operator polynomials (`X1..Xk`).

use num_traits::{ToPrimitive, Zero};

use super::field::VectorField;
use super::poly::MultiPoly;
use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Rational};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => out.push((i, Tok::Plus)),
            '-' => out.push((i, Tok::Minus)),
            '*' => out.push((i, Tok::Star)),
            '/' => out.push((i, Tok::Slash)),
            '^' => out.push((i, Tok::Caret)),
            '(' => out.push((i, Tok::LParen)),
            ')' => out.push((i, Tok::RParen)),
            _ if c.is_ascii_digit() || c == '.' => {
                while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                    i += 1;
                }
                if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                    let mut j = i + 1;
                    if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                        j += 1;
                    }
                    if j < b.len() && b[j].is_ascii_digit() {
                        i = j;
                        while i < b.len() && b[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let q = parse_rational(text).ok_or_else(|| Error::Parse { pos: start, msg: format!("bad number '{text}'") })?;
                out.push((start, Tok::Num(q)));
                continue;
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                if src[i..].starts_with("d/d") {
                    i += 3;
                }
                let ident_start = i;
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                    i += 1;
                }
                if i == ident_start {
                    return Err(Error::Parse { pos: start, msg: "expected a name after 'd/d'".into() });
                }
                out.push((start, Tok::Name(src[start..i].to_string())));
                continue;
            }
            _ => {
                return Err(Error::Parse { pos: i, msg: format!("unexpected character '{c}'") });
            }
        }
        i += 1;
    }
    Ok(out)
}

/// Value semantics for the expression engine. Errors are plain messages;
/// the engine attaches positions.
pub trait Grammar {
    type Value: Clone;

    fn number(&self, q: Rational) -> Self::Value;
    fn name(&self, name: &str) -> std::result::Result<Self::Value, String>;
    fn add(&self, a: Self::Value, b: Self::Value) -> std::result::Result<Self::Value, String>;
    fn mul(&self, a: Self::Value, b: Self::Value) -> std::result::Result<Self::Value, String>;
    fn scale(&self, a: Self::Value, q: &Rational) -> Self::Value;
    /// The value as a rational constant, if it is one.
    fn as_constant(&self, a: &Self::Value) -> Option<Rational>;

    fn pow(&self, a: Self::Value, e: u32) -> std::result::Result<Self::Value, String> {
        let mut acc = self.number(Rational::from_integer(1.into()));
        for _ in 0..e {
            acc = self.mul(acc, a.clone())?;
        }
        Ok(acc)
    }
}

pub fn parse_with<G: Grammar>(g: &G, src: &str) -> Result<G::Value> {
    let toks = tokenize(src)?;
    let mut p = Parser { g, toks, pos: 0, len: src.len() };
    if p.toks.is_empty() {
        return Err(Error::Parse { pos: 0, msg: "empty expression".into() });
    }
    let v = p.expr()?;
    if let Some((at, t)) = p.toks.get(p.pos) {
        return Err(Error::Parse { pos: *at, msg: format!("unexpected token {t:?}") });
    }
    Ok(v)
}

struct Parser<'g, G: Grammar> {
    g: &'g G,
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

impl<G: Grammar> Parser<'_, G> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn at(&self) -> usize {
        self.toks.get(self.pos).map_or(self.len, |(p, _)| *p)
    }

    fn fail<T>(&self, at: usize, msg: String) -> Result<T> {
        Err(Error::Parse { pos: at, msg })
    }

    fn expr(&mut self) -> Result<G::Value> {
        let mut acc = self.term()?;
        loop {
            let at = self.at();
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = self.g.add(acc, rhs).or_else(|m| self.fail(at, m))?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    let rhs = self.g.scale(rhs, &Rational::from_integer((-1).into()));
                    acc = self.g.add(acc, rhs).or_else(|m| self.fail(at, m))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<G::Value> {
        let mut acc = self.unary()?;
        loop {
            let at = self.at();
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = self.g.mul(acc, rhs).or_else(|m| self.fail(at, m))?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs_at = self.at();
                    let rhs = self.unary()?;
                    let q = match self.g.as_constant(&rhs) {
                        Some(q) if !q.is_zero() => q,
                        Some(_) => return self.fail(rhs_at, "division by zero".into()),
                        None => return self.fail(rhs_at, "only division by a nonzero constant is supported".into()),
                    };
                    acc = self.g.scale(acc, &(Rational::from_integer(1.into()) / q));
                }
                Some(Tok::Num(_)) | Some(Tok::Name(_)) | Some(Tok::LParen) => {
                    let rhs = self.unary()?;
                    acc = self.g.mul(acc, rhs).or_else(|m| self.fail(at, m))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<G::Value> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            let v = self.unary()?;
            return Ok(self.g.scale(v, &Rational::from_integer((-1).into())));
        }
        if self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<G::Value> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let at = self.at();
        let e = self.atom()?;
        let e = self.g.as_constant(&e).filter(|q| q.is_integer()).and_then(|q| q.to_integer().to_u32());
        match e {
            Some(e) => self.g.pow(base, e).or_else(|m| self.fail(at, m)),
            None => self.fail(at, "exponent must be a nonnegative integer".into()),
        }
    }

    fn atom(&mut self) -> Result<G::Value> {
        let at = self.at();
        let tok = self.toks.get(self.pos).map(|(_, t)| t.clone());
        match tok {
            Some(Tok::Num(q)) => {
                self.pos += 1;
                Ok(self.g.number(q))
            }
            Some(Tok::Name(n)) => {
                self.pos += 1;
                self.g.name(&n).or_else(|m| self.fail(at, m))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.fail(self.at(), "expected ')'".into());
                }
                self.pos += 1;
                Ok(v)
            }
            Some(t) => self.fail(at, format!("unexpected token {t:?}")),
            None => self.fail(at, "unexpected end of input".into()),
        }
    }
}

/// Resolves a coordinate name for ℝᵐ: `x1..xm`, plus `x,y,z` when `m ≤ 3`.
pub fn coordinate_index(name: &str, m: usize) -> Option<usize> {
    if m <= 3 {
        if let Some(i) = ["x", "y", "z"].iter().position(|v| *v == name) {
            return (i < m).then_some(i);
        }
    }
    let rest = name.strip_prefix('x')?;
    let i: usize = rest.parse().ok()?;
    (1..=m).contains(&i).then(|| i - 1)
}

/// Resolves `d/dx1`, `dx1`, `d/dx`, `dx` (and `y`, `z` analogues).
pub fn basis_index(name: &str, m: usize) -> Option<usize> {
    let var = name.strip_prefix("d/d").or_else(|| name.strip_prefix('d'))?;
    coordinate_index(var, m)
}

#[derive(Clone, Debug)]
pub enum FieldValue {
    Poly(MultiPoly<Rational>),
    Field(VectorField<Rational>),
}

pub struct FieldGrammar {
    pub dim: usize,
}

impl Grammar for FieldGrammar {
    type Value = FieldValue;

    fn number(&self, q: Rational) -> FieldValue {
        FieldValue::Poly(MultiPoly::constant(self.dim, q))
    }

    fn name(&self, name: &str) -> std::result::Result<FieldValue, String> {
        if let Some(i) = coordinate_index(name, self.dim) {
            return Ok(FieldValue::Poly(MultiPoly::var(self.dim, i)));
        }
        if let Some(i) = basis_index(name, self.dim) {
            return Ok(FieldValue::Field(VectorField::coordinate(self.dim, i)));
        }
        Err(format!("unknown name '{name}' on R^{}", self.dim))
    }

    fn add(&self, a: FieldValue, b: FieldValue) -> std::result::Result<FieldValue, String> {
        use FieldValue::*;
        match (a, b) {
            (Poly(a), Poly(b)) => Ok(Poly(a.add(&b))),
            (Field(a), Field(b)) => Ok(Field(a.add(&b))),
            (Poly(p), Field(f)) | (Field(f), Poly(p)) if p.is_zero() => Ok(Field(f)),
            _ => Err("cannot add a function and a vector field".into()),
        }
    }

    fn mul(&self, a: FieldValue, b: FieldValue) -> std::result::Result<FieldValue, String> {
        use FieldValue::*;
        match (a, b) {
            (Poly(a), Poly(b)) => Ok(Poly(a.mul(&b))),
            (Poly(p), Field(f)) | (Field(f), Poly(p)) => Ok(Field(f.mul_poly(&p))),
            (Field(_), Field(_)) => Err("product of two vector fields is not a vector field".into()),
        }
    }

    fn scale(&self, a: FieldValue, q: &Rational) -> FieldValue {
        match a {
            FieldValue::Poly(p) => FieldValue::Poly(p.scale(q)),
            FieldValue::Field(f) => FieldValue::Field(f.scale(q)),
        }
    }

    fn as_constant(&self, a: &FieldValue) -> Option<Rational> {
        match a {
            FieldValue::Poly(p) if p.degree().unwrap_or(0) == 0 => Some(p.constant_term()),
            _ => None,
        }
    }

    fn pow(&self, a: FieldValue, e: u32) -> std::result::Result<FieldValue, String> {
        match a {
            FieldValue::Poly(p) => Ok(FieldValue::Poly(p.pow(e))),
            FieldValue::Field(_) => Err("powers of vector fields are not vector fields".into()),
        }
    }
}

pub fn parse_poly(src: &str, nvars: usize) -> Result<MultiPoly<Rational>> {
    match parse_with(&FieldGrammar { dim: nvars }, src)? {
        FieldValue::Poly(p) => Ok(p),
        FieldValue::Field(_) => Err(Error::Parse { pos: 0, msg: "expected a polynomial, found a vector field".into() }),
    }
}

pub fn parse_field(src: &str, dim: usize) -> Result<VectorField<Rational>> {
    match parse_with(&FieldGrammar { dim }, src)? {
        FieldValue::Field(f) => Ok(f),
        FieldValue::Poly(p) if p.is_zero() => Ok(VectorField::zero(dim)),
        FieldValue::Poly(_) => Err(Error::Parse { pos: 0, msg: "expected a vector field, found a function".into() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn parses_aliases_and_basis_symbols() {
        let a = parse_field("x*dy", 2).unwrap();
        let b = parse_field("x1 * d/dx2", 2).unwrap();
        let c = parse_field("x d/dy", 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.to_string(), "x*d/dy");
    }

    #[test]
    fn rational_coefficients_and_powers() {
        let p = parse_poly("3/2*x^2 - (y - 1)^2 / 4", 2).unwrap();
        assert_eq!(p.eval(&[rat(2, 1), rat(3, 1)]), rat(5, 1));
        assert_eq!(parse_poly("0.25*x", 1).unwrap().to_string(), "1/4*x");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_field("dx*dy", 2).is_err());
        assert!(parse_field("x + dx", 2).is_err());
        assert!(parse_field("w*dx", 2).is_err());
        assert!(parse_field("x^(1/2)*dx", 2).is_err());
        assert!(parse_field("dz", 2).is_err());
        assert!(parse_poly("x/y", 2).is_err());
        assert!(parse_poly("(x", 1).is_err());
        assert!(parse_poly("", 1).is_err());
    }

    #[test]
    fn many_variables_use_indexed_names() {
        let f = parse_field("x4^2*d/dx1 - dx4", 4).unwrap();
        assert_eq!(f.to_string(), "x4^2*d/dx1 - d/dx4");
        assert!(parse_field("x*dx", 4).is_err());
    }
}
