//! Scalar traits shared by the symbolic and numeric layers.
//!
//! `Ring` covers everything a polynomial coefficient needs, `Field` adds
//! division plus a magnitude used for pivoting, and `Real` adds an order.
//! Exact rationals report `EXACT = true`, which turns every tolerance test
//! into an exact zero test.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub trait Ring:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    fn from_rational(q: &Rational) -> Self;

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)))
    }

    /// Absolute value (modulus for complex scalars) as a float.
    fn magnitude(&self) -> f64;

    /// Text form used in reports: `p/q` for rationals, shortest round-trip
    /// decimal for floats.
    fn to_text(&self) -> String;

    /// Zero test relative to `scale`; exact types ignore `tol`.
    fn negligible(&self, scale: f64, tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.magnitude() <= tol * scale.max(f64::MIN_POSITIVE)
        }
    }
}

pub trait Field: Ring + Div<Output = Self> {}

impl<T: Ring + Div<Output = T>> Field for T {}

pub trait Real: Field + PartialOrd {
    fn to_f64(&self) -> f64;

    /// Lossless for binary floats; `None` for non-finite input.
    fn from_f64(x: f64) -> Option<Self>;
}

impl Ring for Rational {
    const EXACT: bool = true;

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn magnitude(&self) -> f64 {
        rational_to_f64(self).abs()
    }

    fn to_text(&self) -> String {
        rational_string(self)
    }
}

impl Real for Rational {
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn from_f64(x: f64) -> Option<Self> {
        Rational::from_float(x)
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Ring for $t {
            const EXACT: bool = false;

            fn from_rational(q: &Rational) -> Self {
                rational_to_f64(q) as $t
            }

            fn from_i64(n: i64) -> Self {
                n as $t
            }

            fn magnitude(&self) -> f64 {
                (*self as f64).abs()
            }

            fn to_text(&self) -> String {
                format!("{:?}", self)
            }
        }

        impl Real for $t {
            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn from_f64(x: f64) -> Option<Self> {
                x.is_finite().then_some(x as $t)
            }
        }
    };
}

float_scalar!(f64);
float_scalar!(f32);

impl Ring for Complex<Rational> {
    const EXACT: bool = true;

    fn from_rational(q: &Rational) -> Self {
        Complex::new(q.clone(), Rational::zero())
    }

    fn magnitude(&self) -> f64 {
        rational_to_f64(&self.re).hypot(rational_to_f64(&self.im))
    }

    fn to_text(&self) -> String {
        format!("{}+{}i", rational_string(&self.re), rational_string(&self.im))
    }
}

impl Ring for Complex<f64> {
    const EXACT: bool = false;

    fn from_rational(q: &Rational) -> Self {
        Complex::new(rational_to_f64(q), 0.0)
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn to_text(&self) -> String {
        format!("{:?}+{:?}i", self.re, self.im)
    }
}

/// Correctly handles numerators and denominators beyond the f64 range.
pub fn rational_to_f64(q: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift = nb - db - 60;
    let (n, d) = if shift > 0 {
        (q.numer().clone(), q.denom() << (shift as usize))
    } else {
        (q.numer() << ((-shift) as usize), q.denom().clone())
    };
    let mant = (n / d).to_f64().unwrap_or(0.0);
    mant * 2f64.powi(shift as i32)
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Canonical text for an exact rational: `p` or `p/q`.
pub fn rational_string(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Some(Rational::from_integer(n));
    }
    let x: f64 = s.parse().ok()?;
    decimal_to_rational(s).or_else(|| Rational::from_float(x))
}

/// Reads a decimal literal such as `-1.25e-3` exactly.
fn decimal_to_rational(s: &str) -> Option<Rational> {
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    let digits = format!("{ip}{fp}");
    let mut n: BigInt = digits.parse().ok()?;
    if neg {
        n = -n;
    }
    let scale = exp - fp.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        Rational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

pub fn abs_rational(q: &Rational) -> Rational {
    q.abs()
}

pub fn rational_pow(q: &Rational, e: u32) -> Rational {
    num_traits::pow(q.clone(), e as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn huge_rational_converts() {
        let big = num_traits::pow(BigInt::from(10), 400);
        let q = Rational::new(big.clone() * 3, big);
        assert!((rational_to_f64(&q) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(parse_rational("0.1").unwrap(), rat(1, 10));
        assert_eq!(parse_rational("-2.5e-1").unwrap(), rat(-1, 4));
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_none());
    }

    #[test]
    fn negligible_is_exact_for_rationals() {
        assert!(!rat(1, 1_000_000_000).negligible(1.0, 1e-3));
        assert!(1e-12f64.negligible(1.0, 1e-10));
    }
}
