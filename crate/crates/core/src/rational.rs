//! Exact non-float arithmetic for weights, severities, risk exposure and minutes.
//!
//! Values are parsed from decimal text (JSON numbers) and rendered back as
//! decimals. Reports use at most six fractional digits with trailing zeros
//! trimmed; suite documents use the exact expansion when it terminates.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Fractional digits used by every report rendering.
pub const REPORT_DIGITS: usize = 6;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(Ratio<i128>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a decimal number: {0:?}")]
pub struct ParseRationalError(pub String);

impl Rational {
    pub const ZERO: Rational = Rational(Ratio::new_raw(0, 1));
    pub const ONE: Rational = Rational(Ratio::new_raw(1, 1));

    pub fn new(numer: i128, denom: i128) -> Self {
        Rational(Ratio::new(numer, denom))
    }

    pub fn from_integer(value: i128) -> Self {
        Rational(Ratio::from_integer(value))
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// Smallest integer not below `self`.
    pub fn ceil_int(&self) -> i128 {
        self.0.ceil().to_integer()
    }

    pub fn floor_int(&self) -> i128 {
        self.0.floor().to_integer()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Mean of a non-empty slice; zero for an empty one.
    pub fn mean(values: &[Rational]) -> Rational {
        if values.is_empty() {
            return Rational::ZERO;
        }
        values.iter().copied().sum::<Rational>() / Rational::from_integer(values.len() as i128)
    }

    /// `numer / denom`, or `fallback` when `denom` is zero.
    pub fn ratio_or(numer: usize, denom: usize, fallback: Rational) -> Rational {
        if denom == 0 {
            fallback
        } else {
            Rational::new(numer as i128, denom as i128)
        }
    }

    /// Exact decimal expansion if it terminates, `None` otherwise.
    pub fn to_exact_decimal(&self) -> Option<String> {
        let mut d = self.denom();
        while d % 2 == 0 {
            d /= 2;
        }
        while d % 5 == 0 {
            d /= 5;
        }
        if d != 1 {
            return None;
        }
        let mut digits = 0usize;
        let mut scaled = self.0;
        while !scaled.is_integer() {
            scaled *= Ratio::from_integer(10);
            digits += 1;
        }
        Some(render_scaled(scaled.to_integer(), digits))
    }

    /// Decimal rounded half away from zero to `max_digits`, trailing zeros trimmed.
    pub fn to_decimal(&self, max_digits: usize) -> String {
        let scale = 10i128.pow(max_digits as u32);
        let scaled = self.0 * Ratio::from_integer(scale);
        let rounded = scaled.round().to_integer();
        render_scaled(rounded, max_digits)
    }

    /// Rendering for suite documents: exact when possible.
    pub fn to_document_string(&self) -> String {
        self.to_exact_decimal()
            .unwrap_or_else(|| self.to_decimal(REPORT_DIGITS))
    }
}

fn render_scaled(value: i128, digits: usize) -> String {
    let negative = value < 0;
    let abs = value.unsigned_abs();
    let scale = 10u128.pow(digits as u32);
    let int_part = abs / scale;
    let frac_part = abs % scale;
    let mut out = String::new();
    if negative && abs != 0 {
        out.push('-');
    }
    out.push_str(&int_part.to_string());
    if digits > 0 && frac_part != 0 {
        let frac = format!("{:0width$}", frac_part, width = digits);
        out.push('.');
        out.push_str(frac.trim_end_matches('0'));
    }
    out
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let text = s.trim();
        if text.is_empty() {
            return Err(err());
        }
        let (mantissa, exponent) = match text.find(['e', 'E']) {
            Some(pos) => {
                let exp: i32 = text[pos + 1..].parse().map_err(|_| err())?;
                (&text[..pos], exp)
            }
            None => (text, 0),
        };
        let (negative, body) = match mantissa.as_bytes().first() {
            Some(b'-') => (true, &mantissa[1..]),
            Some(b'+') => (false, &mantissa[1..]),
            _ => (false, mantissa),
        };
        let (int_digits, frac_digits) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_digits.is_empty() && frac_digits.is_empty() {
            return Err(err());
        }
        if !int_digits.bytes().chain(frac_digits.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let all_digits = format!("{int_digits}{frac_digits}");
        let all_digits = all_digits.trim_start_matches('0');
        let numer: i128 = if all_digits.is_empty() {
            0
        } else {
            all_digits.parse().map_err(|_| err())?
        };
        let scale_exp = frac_digits.len() as i32 - exponent;
        if scale_exp.unsigned_abs() > 30 {
            return Err(err());
        }
        let pow = 10i128.pow(scale_exp.unsigned_abs());
        let value = if scale_exp >= 0 {
            Ratio::new(numer, pow)
        } else {
            Ratio::from_integer(numer.checked_mul(pow).ok_or_else(err)?)
        };
        Ok(Rational(if negative { -value } else { value }))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(REPORT_DIGITS))
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl From<i64> for Rational {
    fn from(value: i64) -> Self {
        Rational::from_integer(value as i128)
    }
}

impl From<u8> for Rational {
    fn from(value: u8) -> Self {
        Rational::from_integer(value as i128)
    }
}

impl From<usize> for Rational {
    fn from(value: usize) -> Self {
        Rational::from_integer(value as i128)
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        Rational(self.0 - rhs.0)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0 * rhs.0)
    }
}

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        Rational(self.0 / rhs.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, |acc, x| acc + *x)
    }
}

/// Orders two rationals; exposed for sort comparators.
pub fn cmp(a: &Rational, b: &Rational) -> Ordering {
    a.0.cmp(&b.0)
}

/// Converts a JSON number to an exact rational via its shortest decimal form.
pub fn from_json_number(n: &serde_json::Number) -> Result<Rational, ParseRationalError> {
    n.to_string().parse()
}

/// JSON number holding `value` rounded to the report precision.
pub fn to_json_number(value: Rational, exact: bool) -> serde_json::Value {
    let text = if exact {
        value.to_document_string()
    } else {
        value.to_decimal(REPORT_DIGITS)
    };
    serde_json::from_str::<serde_json::Number>(&text)
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let text = self.to_decimal(REPORT_DIGITS);
        if !text.contains('.') {
            serializer.serialize_i64(text.parse::<i64>().map_err(serde::ser::Error::custom)?)
        } else {
            serializer.serialize_f64(text.parse::<f64>().map_err(serde::ser::Error::custom)?)
        }
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RationalVisitor;

        impl Visitor<'_> for RationalVisitor {
            type Value = Rational;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a decimal number")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
                Ok(Rational::from(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
                Ok(Rational::from_integer(v as i128))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
                if !v.is_finite() {
                    return Err(E::custom("non-finite number"));
                }
                format!("{v}").parse().map_err(E::custom)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(RationalVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(r("0.1") + r("0.2"), r("0.3"));
        assert_eq!(r("1.5"), Rational::new(3, 2));
        assert_eq!(r("-2.25"), Rational::new(-9, 4));
        assert_eq!(r("1e-3"), Rational::new(1, 1000));
        assert_eq!(r("2.5E2"), Rational::from_integer(250));
        assert_eq!(r("007"), Rational::from_integer(7));
        assert!("".parse::<Rational>().is_err());
        assert!("1.2.3".parse::<Rational>().is_err());
        assert!("abc".parse::<Rational>().is_err());
        assert!(".".parse::<Rational>().is_err());
    }

    #[test]
    fn report_rendering_trims_and_rounds() {
        assert_eq!(Rational::new(1, 3).to_string(), "0.333333");
        assert_eq!(Rational::new(2, 3).to_string(), "0.666667");
        assert_eq!(Rational::from_integer(16).to_string(), "16");
        assert_eq!(r("2.50").to_string(), "2.5");
        assert_eq!(Rational::new(-1, 8).to_string(), "-0.125");
        assert_eq!(Rational::new(1, 10_000_000).to_string(), "0");
    }

    #[test]
    fn exact_decimal_only_for_terminating_expansions() {
        assert_eq!(Rational::new(1, 8).to_exact_decimal().as_deref(), Some("0.125"));
        assert_eq!(Rational::new(1, 3).to_exact_decimal(), None);
        assert_eq!(r("0.0000001").to_document_string(), "0.0000001");
    }

    #[test]
    fn ceiling() {
        assert_eq!((r("0.7") * Rational::from_integer(10)).ceil_int(), 7);
        assert_eq!((r("0.7") * Rational::from_integer(4)).ceil_int(), 3);
        assert_eq!(Rational::ZERO.ceil_int(), 0);
    }

    #[test]
    fn serde_round_trip() {
        let v: Rational = serde_json::from_str("1.25").unwrap();
        assert_eq!(v, Rational::new(5, 4));
        assert_eq!(serde_json::to_string(&v).unwrap(), "1.25");
        assert_eq!(serde_json::to_string(&Rational::from_integer(10)).unwrap(), "10");
    }
}
