//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! Exact types ([`Rational`](crate::Rational)) compare with zero tolerance;
//! floating types carry a small absolute tolerance so the same code paths
//! can be run as fast approximate cross-checks.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + Send + Sync + 'static
{
    /// `true` when arithmetic is exact and comparisons need no tolerance.
    const EXACT: bool;

    fn from_ratio(numer: i64, denom: i64) -> Self;

    fn from_rational(q: &BigRational) -> Self;

    fn to_f64(&self) -> f64;

    /// Absolute comparison slack; zero for exact types.
    fn tolerance() -> Self;

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= Self::tolerance()
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).is_negligible()
    }

    fn approx_le(&self, other: &Self) -> bool {
        *self <= other.clone() + Self::tolerance()
    }

    fn is_pos(&self) -> bool {
        *self > Self::tolerance()
    }

    fn is_neg(&self) -> bool {
        *self < -Self::tolerance()
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn approx_le(&self, other: &Self) -> bool {
        self <= other
    }

    fn is_pos(&self) -> bool {
        self.is_positive()
    }

    fn is_neg(&self) -> bool {
        self.is_negative()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }

    fn from_rational(q: &BigRational) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f32 / denom as f32
    }

    fn from_rational(q: &BigRational) -> Self {
        ToPrimitive::to_f32(q).unwrap_or(f32::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn tolerance() -> Self {
        1e-5
    }
}

/// Convert between scalar types through the exact rational value when the
/// source is exact, or through `f64` otherwise.
pub fn convert<S: Scalar, T: Scalar>(x: &S) -> T {
    if S::EXACT {
        // Round-trip through a textual rational keeps exactness when both are exact.
        let q: BigRational = parse_rational(&x.to_string()).unwrap_or_else(|_| BigRational::zero());
        T::from_rational(&q)
    } else {
        let q = BigRational::from_float(x.to_f64()).unwrap_or_else(BigRational::zero);
        T::from_rational(&q)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("malformed rational `{0}`")]
pub struct ParseRationalError(pub String);

/// Parse `p/q` or a bare integer. Denominators must be nonzero.
pub fn parse_rational(s: &str) -> Result<BigRational, ParseRationalError> {
    let bad = || ParseRationalError(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let valid_int = |t: &str| {
        let digits = t.strip_prefix('-').unwrap_or(t);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid_int(num) || !valid_int(den) || den.starts_with('-') {
        return Err(bad());
    }
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// Decimal rendering rounded half away from zero to `digits` fractional digits.
pub fn to_decimal(q: &BigRational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = q * BigRational::from_integer(scale.clone());
    let neg = scaled.is_negative();
    let abs = scaled.abs();
    let floor = abs.floor().to_integer();
    let frac = abs - BigRational::from_integer(floor.clone());
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let rounded = if frac >= half { floor + 1 } else { floor };
    let (int_part, frac_part) = rounded.div_rem(&scale);
    let mut out = String::new();
    if neg && !(int_part.is_zero() && frac_part.is_zero()) {
        out.push('-');
    }
    out.push_str(&int_part.to_string());
    if digits > 0 {
        let f = frac_part.to_string();
        out.push('.');
        out.push_str(&"0".repeat(digits - f.len()));
        out.push_str(&f);
    }
    out
}
