//! Textual forms of machine numbers.
//!
//! * `sign 0bMANTISSA p EXP`: the raw triple, e.g. `+ 0b110 3 1` is 3.
//! * binary significand: `1.0100…01`, optionally followed by `×2^e`, `*2^e`
//!   or `x2^e`; a `0b` prefix forces this reading.
//! * decimal: `243`, `1.5`, `-2.5e-3`; a `0d` prefix forces this reading.
//!
//! A literal of the form `1.` followed only by the digits 0 and 1 is read as
//! a binary significand, so `1.1` means 3/2; write `0d1.1` for 11/10.

use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use super::{round, round_ratio, FpNumber, Precision, RoundingMode};
use crate::exact::ExactValue;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at position {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

fn err(position: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        position,
        message: message.into(),
    }
}

/// A parsed numeric literal, exact before any rounding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LiteralValue {
    Dyadic(ExactValue),
    /// Decimal literal that is not dyadic; `den > 0`, in lowest terms.
    Rational { num: BigInt, den: BigInt },
}

impl LiteralValue {
    /// Round to precision `p`; the flag is true when no rounding occurred.
    pub fn to_fp(&self, p: Precision, mode: RoundingMode) -> (FpNumber, bool) {
        match self {
            LiteralValue::Dyadic(v) => {
                let r = round(v, p, mode);
                let exact = &r.to_exact() == v;
                (r, exact)
            }
            LiteralValue::Rational { num, den } => (round_ratio(num, den, p, mode), false),
        }
    }
}

/// Parse a binary-significand or decimal literal.
pub fn parse_literal(s: &str) -> Result<LiteralValue, ParseError> {
    let trimmed = s.trim();
    let offset = s.len() - s.trim_start().len();
    if trimmed.is_empty() {
        return Err(err(0, "empty literal"));
    }
    let (negative, body, off) = match trimmed.as_bytes()[0] {
        b'-' => (true, &trimmed[1..], offset + 1),
        b'+' => (false, &trimmed[1..], offset + 1),
        _ => (false, trimmed, offset),
    };
    let v = if let Some(rest) = body.strip_prefix("0b") {
        LiteralValue::Dyadic(parse_binary(rest, off + 2)?)
    } else if let Some(rest) = body.strip_prefix("0d") {
        parse_decimal(rest, off + 2)?
    } else if looks_binary(body) {
        LiteralValue::Dyadic(parse_binary(body, off)?)
    } else {
        parse_decimal(body, off)?
    };
    Ok(if negative { negate(v) } else { v })
}

fn negate(v: LiteralValue) -> LiteralValue {
    match v {
        LiteralValue::Dyadic(x) => LiteralValue::Dyadic(-x),
        LiteralValue::Rational { num, den } => LiteralValue::Rational { num: -num, den },
    }
}

fn looks_binary(body: &str) -> bool {
    let digits = body.split(['×', '*', 'x']).next().unwrap_or("");
    digits
        .strip_prefix("1.")
        .is_some_and(|frac| frac.chars().all(|c| c == '0' || c == '1'))
}

fn parse_binary(s: &str, off: usize) -> Result<ExactValue, ParseError> {
    let (digits, exp) = split_binary_exponent(s, off)?;
    let mut mant = BigInt::zero();
    let mut frac_bits: i64 = 0;
    let mut seen_point = false;
    let mut any = false;
    for (i, c) in digits.char_indices() {
        match c {
            '0' | '1' => {
                mant = (mant << 1usize) + u8::from(c == '1');
                if seen_point {
                    frac_bits += 1;
                }
                any = true;
            }
            '.' if !seen_point => seen_point = true,
            '_' => {}
            _ => return Err(err(off + i, format!("unexpected character {c:?} in binary literal"))),
        }
    }
    if !any {
        return Err(err(off, "binary literal has no digits"));
    }
    Ok(ExactValue::new(mant, exp - frac_bits))
}

fn split_binary_exponent(s: &str, off: usize) -> Result<(&str, i64), ParseError> {
    for marker in ["×2^", "*2^", "x2^"] {
        if let Some(pos) = s.find(marker) {
            let e_str = &s[pos + marker.len()..];
            let e = e_str
                .parse::<i64>()
                .map_err(|_| err(off + pos + marker.len(), format!("bad exponent {e_str:?}")))?;
            return Ok((&s[..pos], e));
        }
    }
    Ok((s, 0))
}

fn parse_decimal(s: &str, off: usize) -> Result<LiteralValue, ParseError> {
    let (mant_str, exp10) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e = s[pos + 1..]
                .parse::<i64>()
                .map_err(|_| err(off + pos + 1, "bad decimal exponent"))?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let mut mant = BigInt::zero();
    let mut frac_digits: i64 = 0;
    let mut seen_point = false;
    let mut any = false;
    for (i, c) in mant_str.char_indices() {
        match c {
            '0'..='9' => {
                mant = mant * 10u8 + c.to_digit(10).unwrap();
                if seen_point {
                    frac_digits += 1;
                }
                any = true;
            }
            '.' if !seen_point => seen_point = true,
            '_' => {}
            _ => return Err(err(off + i, format!("unexpected character {c:?} in decimal literal"))),
        }
    }
    if !any {
        return Err(err(off, "decimal literal has no digits"));
    }
    let e = exp10 - frac_digits;
    let ten = BigInt::from(10u8);
    let (num, den) = if e >= 0 {
        (mant * num_traits::pow::pow(ten, e as usize), BigInt::one())
    } else {
        (mant, num_traits::pow::pow(ten, (-e) as usize))
    };
    let g = num.gcd(&den);
    let (num, den) = if g.is_zero() { (num, den) } else { (&num / &g, &den / &g) };
    // 10^k / gcd is dyadic exactly when only factors of two remain
    let tz = den.trailing_zeros().unwrap_or(0);
    if (&den >> tz as usize).is_one() {
        Ok(LiteralValue::Dyadic(ExactValue::new(num, -(tz as i64))))
    } else {
        Ok(LiteralValue::Rational { num, den })
    }
}

impl FromStr for FpNumber {
    type Err = ParseError;

    /// Parses the `sign 0bMANTISSA p EXP` form.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fields: Vec<(usize, &str)> = s
            .split_whitespace()
            .map(|f| (f.as_ptr() as usize - s.as_ptr() as usize, f))
            .collect();
        if fields.len() != 4 {
            return Err(err(0, "expected `sign 0bMANTISSA p EXP`"));
        }
        let negative = match fields[0].1 {
            "+" => false,
            "-" => true,
            _ => return Err(err(fields[0].0, "sign must be + or -")),
        };
        let (mpos, mstr) = fields[1];
        let bits = mstr
            .strip_prefix("0b")
            .ok_or_else(|| err(mpos, "mantissa must start with 0b"))?;
        let significand = u64::from_str_radix(bits, 2)
            .map_err(|_| err(mpos + 2, "mantissa must be binary and fit in 64 bits"))?;
        let p: u32 = fields[2]
            .1
            .parse()
            .map_err(|_| err(fields[2].0, "precision must be an integer"))?;
        let p = Precision::new(p).map_err(|e| err(fields[2].0, e.to_string()))?;
        let exponent: i64 = fields[3]
            .1
            .parse()
            .map_err(|_| err(fields[3].0, "exponent must be an integer"))?;
        FpNumber::from_parts(negative, significand, exponent, p).map_err(|e| err(mpos, e.to_string()))
    }
}
