//! Exact complex scalars: Gaussian rationals with arbitrary-precision parts.
//!
//! Every amplitude in this crate is a [`ExactComplex`] — a complex number
//! whose real and imaginary parts are reduced fractions of big integers.
//! Equality is exact, so separability verdicts never depend on a tolerance.
//! Inputs may be written as rationals (`-1/2`, `3`) or finite decimals
//! (`0.25`), both converted without rounding.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational number, always kept reduced.
pub type Rational = BigRational;

/// Complex number with exact rational real and imaginary parts.
pub type ExactComplex = Complex<Rational>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumberParseError {
    #[error("empty number")]
    Empty,
    #[error("malformed number `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Shorthand for small rational constants.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Real exact complex from a small rational.
pub fn real(num: i64, den: i64) -> ExactComplex {
    ExactComplex::new(ratio(num, den), Rational::zero())
}

/// Exact complex from small rational real and imaginary parts.
pub fn complex(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> ExactComplex {
    ExactComplex::new(ratio(re_num, re_den), ratio(im_num, im_den))
}

pub fn one() -> ExactComplex {
    ExactComplex::one()
}

/// Parses `p`, `p/q`, or a finite decimal such as `0.25` into an exact
/// rational. Decimals are converted by powers of ten, never through floats.
pub fn parse_rational(text: &str) -> Result<Rational, NumberParseError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(NumberParseError::Empty);
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num
            .parse()
            .map_err(|_| NumberParseError::Malformed(text.to_string()))?;
        let den: BigInt = den
            .parse()
            .map_err(|_| NumberParseError::Malformed(text.to_string()))?;
        if den.is_zero() {
            return Err(NumberParseError::ZeroDenominator(text.to_string()));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        // Sign belongs to the whole literal: -0.5 == -(0.5).
        let (negative, int_digits) = match int_part.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, int_part.strip_prefix('+').unwrap_or(int_part)),
        };
        if frac_part.is_empty()
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
            || !int_digits.bytes().all(|b| b.is_ascii_digit())
            || int_digits.is_empty()
        {
            return Err(NumberParseError::Malformed(text.to_string()));
        }
        let digits: BigInt = format!("{int_digits}{frac_part}")
            .parse()
            .map_err(|_| NumberParseError::Malformed(text.to_string()))?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let value = Rational::new(digits, scale);
        return Ok(if negative { -value } else { value });
    }
    let int: BigInt = s
        .parse()
        .map_err(|_| NumberParseError::Malformed(text.to_string()))?;
    Ok(Rational::from_integer(int))
}

/// Renders a rational as `p` or `p/q` so that `parse_rational` round-trips it.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Human-readable complex value: `1/2`, `3i`, `1/2-3/4i`.
pub fn format_complex(c: &ExactComplex) -> String {
    if c.im.is_zero() {
        return format_rational(&c.re);
    }
    let im = if c.im.abs().is_one() {
        String::new()
    } else {
        format_rational(&c.im.abs())
    };
    let sign = if c.im.is_negative() { "-" } else { "+" };
    if c.re.is_zero() {
        let lead = if c.im.is_negative() { "-" } else { "" };
        format!("{lead}{im}i")
    } else {
        format!("{}{}{}i", format_rational(&c.re), sign, im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!(parse_rational("3").unwrap(), ratio(3, 1));
        assert_eq!(parse_rational("-1/2").unwrap(), ratio(-1, 2));
        assert_eq!(parse_rational("4/6").unwrap(), ratio(2, 3));
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rational("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), ratio(-1, 2));
        assert_eq!(parse_rational("2.125").unwrap(), ratio(17, 8));
    }

    #[test]
    fn rejects_malformed_numbers() {
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1e-3").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational(".5").is_err());
        assert!(parse_rational("1.").is_err());
        assert!(parse_rational("0.2.5").is_err());
    }

    #[test]
    fn format_round_trips() {
        for r in [ratio(1, 2), ratio(-7, 3), ratio(5, 1), ratio(0, 1)] {
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
    }

    #[test]
    fn complex_formatting() {
        assert_eq!(format_complex(&real(1, 2)), "1/2");
        assert_eq!(format_complex(&complex(0, 1, -1, 1)), "-i");
        assert_eq!(format_complex(&complex(1, 2, 3, 4)), "1/2+3/4i");
        assert_eq!(format_complex(&complex(1, 1, -3, 4)), "1-3/4i");
    }
}
