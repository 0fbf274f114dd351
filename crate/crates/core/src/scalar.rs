//! Numeric backends: double precision for everyday runs, exact rationals
//! for the oracle suites.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Exact rational numbers with arbitrary precision.
pub type Rational = BigRational;

/// Field operations plus the handful of conversions the solvers need.
///
/// Tolerances are always given as `f64`; an exact backend maps every
/// tolerance to zero so comparisons become exact.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Sum
{
    /// True when arithmetic is exact.
    const EXACT: bool;
    /// Short backend name used in reports.
    const NAME: &'static str;

    /// Converts a double. For rationals this is the exact dyadic value.
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn abs_val(&self) -> Self;
    fn is_finite_val(&self) -> bool;
    /// The exact value, when finite.
    fn to_rational(&self) -> Option<Rational>;
    /// Nearest representable value.
    fn from_rational(x: &Rational) -> Self;

    /// The tolerance as seen by this backend: `eps` for floats, zero for rationals.
    fn tolerance(eps: f64) -> Self {
        if Self::EXACT {
            Self::zero()
        } else {
            Self::from_f64(eps)
        }
    }

    fn min_val(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const NAME: &'static str = "f64";

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn is_finite_val(&self) -> bool {
        self.is_finite()
    }

    fn to_rational(&self) -> Option<Rational> {
        <BigRational as FromPrimitive>::from_f64(*self)
    }

    fn from_rational(x: &Rational) -> Self {
        ToPrimitive::to_f64(x).unwrap_or(f64::NAN)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;
    const NAME: &'static str = "rational";

    fn from_f64(x: f64) -> Self {
        <BigRational as FromPrimitive>::from_f64(x).unwrap_or_else(Zero::zero)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn is_finite_val(&self) -> bool {
        true
    }

    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }

    fn from_rational(x: &Rational) -> Self {
        x.clone()
    }
}

/// Parses a decimal literal (`0.25`, `-1e-3`, `7`) or a fraction (`3/8`)
/// into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(digits.parse::<BigInt>().ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let factor = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= factor;
    } else {
        value /= factor;
    }
    if negative {
        value = -value;
    }
    Some(value)
}

/// Renders a rational as `p/q`, or `p` when the denominator is one.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rational("0.1"), Some(r(1, 10)));
        assert_eq!(parse_rational("-2.5e-1"), Some(r(-1, 4)));
        assert_eq!(parse_rational("3"), Some(r(3, 1)));
        assert_eq!(parse_rational("1E2"), Some(r(100, 1)));
        assert_eq!(parse_rational(".5"), Some(r(1, 2)));
    }

    #[test]
    fn parses_fractions() {
        assert_eq!(parse_rational("3/9"), Some(r(1, 3)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational(""), None);
    }

    #[test]
    fn formats_round_trip() {
        for x in [r(1, 3), r(-7, 2), r(5, 1), r(0, 1)] {
            assert_eq!(parse_rational(&format_rational(&x)), Some(x));
        }
    }

    #[test]
    fn exact_backend_has_zero_tolerance() {
        assert!(<Rational as Scalar>::tolerance(1e-9).is_zero());
        assert_eq!(<f64 as Scalar>::tolerance(1e-9), 1e-9);
    }
}
