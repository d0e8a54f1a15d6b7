//! Number fields.
//!
//! Every algorithm in the crate is generic over [`Field`]. Three
//! realizations are provided:
//!
//! * [`Rational`] (`BigRational`): exact, canonical (gcd = 1, positive
//!   denominator), equality is structural. This is the default for the
//!   rational (XXX) regime and turns every identity into a zero-tolerance
//!   check.
//! * [`ComplexFloat`] (`Complex64`): double precision, compared with a
//!   relative tolerance. Required by the trigonometric (XXZ) regime and by
//!   Bethe roots that leave the real axis.
//! * `f64`: a real float field for callers that do not need complex values.

use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational field element.
pub type Rational = BigRational;
/// Double-precision complex field element.
pub type ComplexFloat = Complex64;

/// Default relative tolerance for float comparisons.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

pub trait Field:
    Clone + fmt::Debug + fmt::Display + PartialEq + Num + Neg<Output = Self> + Send + Sync + 'static
{
    /// True when arithmetic is exact and equality is structural.
    const EXACT: bool;
    /// Short name recorded in reports.
    const NAME: &'static str;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Nearest element of this field to `z`, if one is meaningful.
    ///
    /// Rationals only accept values with a negligible imaginary part and a
    /// small-denominator continued-fraction approximation; the caller is
    /// expected to confirm any identity exactly afterwards.
    fn from_c64(z: Complex64) -> Option<Self>;

    fn to_c64(&self) -> Complex64;

    /// Absolute value as a float, used for pivot selection and tolerances.
    fn magnitude(&self) -> f64;

    /// `None` when the field cannot represent transcendental values.
    fn sinh(&self) -> Option<Self>;
    fn cosh(&self) -> Option<Self>;

    /// JSON encoding: `"num/den"` for rationals, `{"re":..,"im":..}` for
    /// complex values, a bare number for reals.
    fn to_json(&self) -> serde_json::Value;

    /// `|a - b| <= tol * max(1, |a|, |b|)` for floats, exact equality for
    /// exact fields (`tol` is ignored).
    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if Self::EXACT {
            return self == other;
        }
        let scale = 1f64.max(self.magnitude()).max(other.magnitude());
        (self.clone() - other.clone()).magnitude() <= tol * scale
    }

    fn checked_div(&self, rhs: &Self, what: &str) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero(what.to_string()));
        }
        Ok(self.clone() / rhs.clone())
    }

    fn inv(&self, what: &str) -> Result<Self> {
        Self::one().checked_div(self, what)
    }

    fn from_usize(k: usize) -> Self {
        Self::from_ratio(k as i64, 1)
    }
}

impl Field for BigRational {
    const EXACT: bool = true;
    const NAME: &'static str = "exact-rational";

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_c64(z: Complex64) -> Option<Self> {
        if !z.re.is_finite() || z.im.abs() > 1e-9 * 1f64.max(z.re.abs()) {
            return None;
        }
        let (p, q) = continued_fraction(z.re, 1_000_000, 1e-9)?;
        Some(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }

    fn sinh(&self) -> Option<Self> {
        None
    }

    fn cosh(&self) -> Option<Self> {
        None
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(rational_to_string(self))
    }
}

impl Field for Complex64 {
    const EXACT: bool = false;
    const NAME: &'static str = "complex-float";

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }

    fn from_c64(z: Complex64) -> Option<Self> {
        Some(z)
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn sinh(&self) -> Option<Self> {
        Some(Complex64::sinh(*self))
    }

    fn cosh(&self) -> Option<Self> {
        Some(Complex64::cosh(*self))
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "re": self.re, "im": self.im })
    }
}

impl Field for f64 {
    const EXACT: bool = false;
    const NAME: &'static str = "real-float";

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_c64(z: Complex64) -> Option<Self> {
        (z.im.abs() <= 1e-12 * 1f64.max(z.re.abs())).then_some(z.re)
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }

    fn sinh(&self) -> Option<Self> {
        Some(f64::sinh(*self))
    }

    fn cosh(&self) -> Option<Self> {
        Some(f64::cosh(*self))
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::json!(self)
    }
}

/// Canonical `"num/den"` text, denominator always printed.
pub fn rational_to_string(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Best rational approximation with denominator at most `max_den`, accepted
/// only if it lies within `tol * max(1, |x|)` of `x`.
fn continued_fraction(x: f64, max_den: i64, tol: f64) -> Option<(i64, i64)> {
    if x.abs() > 1e12 {
        return None;
    }
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let ai = a as i64;
        let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
        let k2 = ai.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() <= tol * 1f64.max(x.abs()) {
            return Some((h1, k1));
        }
        let frac = r - a;
        if frac.abs() < 1e-300 {
            break;
        }
        r = 1.0 / frac;
    }
    ((x - h1 as f64 / k1 as f64).abs() <= tol * 1f64.max(x.abs()) && k1 > 0).then_some((h1, k1))
}

/// Spectral regime: rational (XXX, `phi(t) = t`) or trigonometric
/// (XXZ, `phi(t) = sinh t`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Xxx,
    Xxz,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Xxx => "xxx",
            Regime::Xxz => "xxz",
        }
    }

    /// The weight function `phi`.
    pub fn phi<T: Field>(self, t: &T) -> Result<T> {
        match self {
            Regime::Xxx => Ok(t.clone()),
            Regime::Xxz => t.sinh().ok_or(Error::TranscendentalInExactField { regime: "xxz" }),
        }
    }

    /// Logarithmic derivative `phi'(t) / phi(t)`: `1/t` or `coth t`.
    pub fn log_derivative<T: Field>(self, t: &T) -> Result<T> {
        match self {
            Regime::Xxx => t.inv("1/t"),
            Regime::Xxz => {
                let err = Error::TranscendentalInExactField { regime: "xxz" };
                let c = t.cosh().ok_or(err.clone())?;
                let s = t.sinh().ok_or(err)?;
                c.checked_div(&s, "coth t")
            }
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xxx" => Ok(Regime::Xxx),
            "xxz" => Ok(Regime::Xxz),
            _ => Err(Error::Parse(s.to_string())),
        }
    }
}

/// A scalar read from text, before a field has been chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum ParsedScalar {
    Rational(BigRational),
    Float(Complex64),
}

impl ParsedScalar {
    pub fn is_exact(&self) -> bool {
        matches!(self, ParsedScalar::Rational(_))
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            ParsedScalar::Rational(q) => q.to_c64(),
            ParsedScalar::Float(z) => *z,
        }
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        match self {
            ParsedScalar::Rational(q) => Some(q.clone()),
            ParsedScalar::Float(_) => None,
        }
    }
}

/// Parses `"3/2"`, `"-4"`, `"0.25"`, `"1e-3"`, `"0.5+0.3i"`, `"-2i"`.
///
/// Integers and fractions stay exact; anything with a decimal point,
/// exponent or imaginary unit becomes a float.
pub fn parse_scalar(s: &str) -> Result<ParsedScalar> {
    let s = s.trim();
    let bad = || Error::Parse(s.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    if let Some(body) = s.strip_suffix('i') {
        // split at the last sign that is not an exponent sign or leading sign
        let bytes = body.as_bytes();
        let mut split = None;
        for idx in (1..bytes.len()).rev() {
            if (bytes[idx] == b'+' || bytes[idx] == b'-') && !matches!(bytes[idx - 1], b'e' | b'E') {
                split = Some(idx);
                break;
            }
        }
        let (re, im) = match split {
            Some(idx) => (&body[..idx], &body[idx..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            other => other,
        };
        let re = parse_real(re).ok_or_else(bad)?;
        let im = parse_real(im).ok_or_else(bad)?;
        return Ok(ParsedScalar::Float(Complex64::new(re, im)));
    }
    if s.contains(['.', 'e', 'E']) {
        return parse_real(s).map(|x| ParsedScalar::Float(Complex64::new(x, 0.0))).ok_or_else(bad);
    }
    let body = s.strip_prefix('+').unwrap_or(s);
    let q = match body.split_once('/') {
        Some(_) => BigRational::from_str_radix(body, 10).map_err(|_| bad())?,
        None => BigRational::from_integer(body.parse::<BigInt>().map_err(|_| bad())?),
    };
    Ok(ParsedScalar::Rational(q))
}

fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim().trim_start_matches('+');
    if let Some((n, d)) = s.split_once('/') {
        return Some(n.parse::<f64>().ok()? / d.parse::<f64>().ok()?);
    }
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Decodes a JSON scalar: a string in [`parse_scalar`] syntax, a bare number,
/// or a `{"re":..,"im":..}` object.
pub fn scalar_from_json(v: &serde_json::Value) -> Result<ParsedScalar> {
    match v {
        serde_json::Value::String(s) => parse_scalar(s),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(ParsedScalar::Rational(BigRational::from_integer(BigInt::from(i))))
            } else {
                let x = n.as_f64().ok_or_else(|| Error::Parse(n.to_string()))?;
                Ok(ParsedScalar::Float(Complex64::new(x, 0.0)))
            }
        }
        serde_json::Value::Object(map) => {
            let re = map.get("re").and_then(|x| x.as_f64());
            let im = map.get("im").and_then(|x| x.as_f64());
            match (re, im) {
                (Some(re), Some(im)) => Ok(ParsedScalar::Float(Complex64::new(re, im))),
                _ => Err(Error::Parse(v.to_string())),
            }
        }
        _ => Err(Error::Parse(v.to_string())),
    }
}

/// Converts a rational into any field (exact for [`Rational`]).
pub fn from_rational<T: Field>(q: &BigRational) -> T {
    if let (Some(n), Some(d)) = (q.numer().to_i64(), q.denom().to_i64()) {
        return T::from_ratio(n, d);
    }
    T::from_c64(q.to_c64()).expect("rational value representable in every field")
}

/// Moves a parsed scalar into field `T`. Exact fields refuse float input.
pub fn scalar_into<T: Field>(p: &ParsedScalar) -> Result<T> {
    match p {
        ParsedScalar::Rational(q) => Ok(from_rational(q)),
        ParsedScalar::Float(z) if !T::EXACT => {
            T::from_c64(*z).ok_or_else(|| Error::Parse(format!("{z} is not representable in {}", T::NAME)))
        }
        ParsedScalar::Float(z) => Err(Error::Parse(format!("{z} is a float; {} needs an exact value", T::NAME))),
    }
}

/// `x^k` by repeated multiplication.
pub fn powi<T: Field>(x: &T, k: usize) -> T {
    (0..k).fold(T::one(), |acc, _| acc * x.clone())
}

/// Relative closeness after conversion to floats, for limits taken in an exact field.
pub fn numerically_close<T: Field>(a: &T, b: &T, tol: f64) -> bool {
    let (x, y) = (a.to_c64(), b.to_c64());
    (x - y).norm() <= tol * 1f64.max(x.norm()).max(y.norm())
}

/// `(-1)^k`.
pub fn sign<T: Field>(k: usize) -> T {
    if k % 2 == 0 {
        T::one()
    } else {
        -T::one()
    }
}
