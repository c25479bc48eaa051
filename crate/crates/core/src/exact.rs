//! Exact rational helpers: decimal parsing, `num/den` text form, and the
//! handful of conversions between `BigRational` and `f64` used at the
//! boundaries of the exact core.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid number `{text}`: {reason}")]
pub struct NumberError {
    pub text: String,
    pub reason: &'static str,
}

impl NumberError {
    fn new(text: &str, reason: &'static str) -> Self {
        NumberError {
            text: text.to_string(),
            reason,
        }
    }
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses an exact decimal: optional sign, digits, optional fraction and
/// optional exponent (`-12.5`, `0.1`, `3e-4`). No floating point is involved.
pub fn parse_decimal(text: &str) -> Result<Rational, NumberError> {
    let s = text.trim();
    let (negative, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => {
            let exp: i32 = body[i + 1..]
                .parse()
                .map_err(|_| NumberError::new(text, "bad exponent"))?;
            (&body[..i], exp)
        }
        None => (body, 0),
    };
    let (whole, frac) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return Err(NumberError::new(text, "no digits"));
    }
    if !whole.bytes().chain(frac.bytes()).all(|c| c.is_ascii_digit()) {
        return Err(NumberError::new(text, "unexpected character"));
    }
    if exponent.unsigned_abs() > 4000 {
        return Err(NumberError::new(text, "exponent out of range"));
    }
    let digits = format!("{whole}{frac}");
    let numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits })
        .map_err(|_| NumberError::new(text, "bad digits"))?;
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Parses either `num/den` or an exact decimal.
pub fn parse_rational(text: &str) -> Result<Rational, NumberError> {
    match text.split_once('/') {
        Some((n, d)) => {
            let n = parse_decimal(n)?;
            let d = parse_decimal(d)?;
            if d.is_zero() {
                return Err(NumberError::new(text, "zero denominator"));
            }
            Ok(n / d)
        }
        None => parse_decimal(text),
    }
}

/// `num/den` form in lowest terms; integers keep the `/1` suffix.
pub fn to_ratio_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// The exact rational denoted by the shortest decimal that round-trips to
/// `x`. Keeps values such as `0.1` short instead of expanding the binary
/// fraction.
pub fn from_f64_shortest(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    parse_decimal(&format!("{x:e}")).ok()
}

/// Exact value of a finite `f64`.
pub fn from_f64_exact(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

pub fn ceil(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

pub fn floor(r: &Rational) -> BigInt {
    r.floor().to_integer()
}

/// Rational upper bound for `x` with a short decimal expansion:
/// the result is `>= x` and within a relative `1e-12` of it.
pub fn decimal_upper_bound(x: f64) -> Rational {
    assert!(x.is_finite() && x >= 0.0);
    if x == 0.0 {
        return Rational::zero();
    }
    let exponent = x.log10().floor() as i32 - 13;
    let unit = if exponent >= 0 {
        Rational::from_integer(num_traits::pow(BigInt::from(10), exponent as usize))
    } else {
        Rational::new(
            BigInt::one(),
            num_traits::pow(BigInt::from(10), (-exponent) as usize),
        )
    };
    let exact = from_f64_exact(x).expect("finite");
    let steps = (&exact / &unit).floor() + Rational::one();
    steps * unit
}

/// Rational `r^n` for a non-negative integer exponent.
pub fn pow_int(r: &Rational, n: u32) -> Rational {
    num_traits::pow(r.clone(), n as usize)
}

/// Whether the rational is an integer that fits a `u32`.
pub fn as_small_integer(r: &Rational) -> Option<u32> {
    if r.is_integer() {
        r.to_integer().to_u32()
    } else {
        None
    }
}

/// Decimal rendering of a rational when it terminates, `num/den` otherwise.
pub struct Decimal<'a>(pub &'a Rational);

impl fmt::Display for Decimal<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.0;
        let mut d = r.denom().clone();
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        let mut twos = 0usize;
        let mut fives = 0usize;
        while d.is_even() {
            d /= &two;
            twos += 1;
        }
        while (&d % &five).is_zero() {
            d /= &five;
            fives += 1;
        }
        if !d.is_one() {
            return write!(f, "{}/{}", r.numer(), r.denom());
        }
        let places = twos.max(fives);
        let scaled = r * Rational::from_integer(num_traits::pow(BigInt::from(10), places));
        let n = scaled.to_integer();
        let negative = n.is_negative();
        let digits = n.abs().to_string();
        if places == 0 {
            return write!(f, "{}{}", if negative { "-" } else { "" }, digits);
        }
        let padded = format!("{digits:0>width$}", width = places + 1);
        let (int_part, frac_part) = padded.split_at(padded.len() - places);
        write!(
            f,
            "{}{}.{}",
            if negative { "-" } else { "" },
            int_part,
            frac_part
        )
    }
}
