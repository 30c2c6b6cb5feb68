//! Exact ground truth for powers: big-integer `x^n`, rounding classification
//! against breakpoints, run lengths after the rounding bit, and brute-force
//! worst-case search at small precisions.
//!
//! Everything here is integer arithmetic. When `x^n` is too wide to expand
//! (large `n`), [`pow_reference`] falls back to a directed-rounding enclosure
//! `lo ≤ x^n ≤ hi` that is refined until the requested classification is
//! determined.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::exact::ExactValue;
use crate::softfloat::{self, FpNumber, Precision, RoundingMode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("exponent n must be >= 1, got {0}")]
    ExponentTooSmall(u64),
    #[error("value is zero")]
    Zero,
    #[error("value is exactly representable at precision {0}")]
    Exact(u32),
    #[error("value is exactly a breakpoint at precision {0}")]
    Midpoint(u32),
    #[error(
        "exhaustive search at p = {p} would enumerate {candidates} significands; \
         the limit is p <= {max} ({limit} candidates)"
    )]
    SearchTooLarge {
        p: u32,
        candidates: u64,
        max: u32,
        limit: u64,
    },
}

/// Largest precision accepted by [`search_worst_cases`].
pub const MAX_SEARCH_PRECISION: u32 = 30;

/// Exact `x^n`.
pub fn exact_pow(x: &FpNumber, n: u64) -> Result<ExactValue, OracleError> {
    if n < 1 {
        return Err(OracleError::ExponentTooSmall(n));
    }
    if x.is_zero() {
        return Err(OracleError::Zero);
    }
    Ok(x.to_exact().pow(n))
}

/// Where a value sits between its two neighbouring machine numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Position {
    Exact,
    BelowMid,
    AtMid,
    AboveMid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    /// `RD(v)`.
    pub below: FpNumber,
    /// `RU(v)`.
    pub above: FpNumber,
    pub position: Position,
}

impl Classification {
    /// `RN(v)` with ties to even.
    pub fn nearest(&self) -> FpNumber {
        match self.position {
            Position::Exact | Position::BelowMid => self.below,
            Position::AboveMid => self.above,
            Position::AtMid => {
                if self.below.is_even() {
                    self.below
                } else {
                    self.above
                }
            }
        }
    }

    pub fn is_faithful(&self, result: &FpNumber) -> bool {
        *result == self.below || *result == self.above
    }
}

/// `RD(v)`, `RU(v)` and the position of `v` relative to their midpoint.
pub fn classify_rounding(v: &ExactValue, p: Precision) -> Result<Classification, OracleError> {
    if v.is_zero() {
        return Err(OracleError::Zero);
    }
    let below = softfloat::round(v, p, RoundingMode::TowardNegInf);
    let above = softfloat::round(v, p, RoundingMode::TowardPosInf);
    let position = if below == above {
        Position::Exact
    } else {
        let mid = (&below.to_exact() + &above.to_exact()).mul_pow2(-1);
        match v.cmp(&mid) {
            Ordering::Less => Position::BelowMid,
            Ordering::Equal => Position::AtMid,
            Ordering::Greater => Position::AboveMid,
        }
    };
    Ok(Classification {
        below,
        above,
        position,
    })
}

/// Bits of a value's significand following the first `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RunLength {
    /// Bit `p + 1` of the significand.
    pub rounding_bit: u8,
    /// Number of mutually identical bits right after the rounding bit.
    pub run_len: u64,
    /// The bit that ends the run.
    pub next_bit: u8,
}

impl RunLength {
    /// `k` such that the value's significand is at least `2^-k` away from
    /// every precision-`p` breakpoint and machine number.
    pub fn distance_exponent(&self, p: Precision) -> u64 {
        p.bits() as u64 + self.run_len + 1
    }
}

/// Split `|v|`'s significand as `b₁.b₂…b_p | r | c₁c₂…` and measure the run
/// of identical `c` bits. Any run counts, whether or not it equals `r`.
pub fn run_length(v: &ExactValue, p: Precision) -> Result<RunLength, OracleError> {
    if v.is_zero() {
        return Err(OracleError::Zero);
    }
    let m = v.mantissa().magnitude();
    let len = m.bits();
    let pb = p.bits() as u64;
    if len <= pb {
        return Err(OracleError::Exact(p.bits()));
    }
    // The canonical mantissa is odd, so the lowest set bit is bit 0 and the
    // tail below the rounding bit ends in a 1.
    let width = len - pb - 1;
    let rounding_bit = u8::from(m.bit(width));
    if width == 0 {
        return Err(OracleError::Midpoint(p.bits()));
    }
    let tail = m & ((BigUint::one() << width) - 1u8);
    let first = tail.bit(width - 1);
    let (run_len, next_bit) = if first {
        let flipped = ((BigUint::one() << width) - 1u8) ^ &tail;
        (width - flipped.bits(), 0)
    } else {
        (width - tail.bits(), 1)
    };
    Ok(RunLength {
        rounding_bit,
        run_len,
        next_bit,
    })
}

/// True when `result` is `RD(v)` or `RU(v)` at `result`'s precision.
pub fn is_faithful(result: &FpNumber, v: &ExactValue) -> bool {
    if v.is_zero() {
        return result.is_zero();
    }
    let p = result.precision();
    let lo = softfloat::round(v, p, RoundingMode::TowardNegInf);
    let hi = softfloat::round(v, p, RoundingMode::TowardPosInf);
    *result == lo || *result == hi
}

/// `|result - v| / ulp(result)`, exact.
pub fn ulp_distance(result: &FpNumber, v: &ExactValue) -> Result<ExactValue, OracleError> {
    let ulp = result.ulp().map_err(|_| OracleError::Zero)?;
    let scale = ulp.floor_log2().expect("ulp is a nonzero power of two");
    Ok((&result.to_exact() - v).abs().mul_pow2(-scale))
}

/// `num / den` as an `f64` (display and reporting only).
pub fn ratio_to_f64(num: &ExactValue, den: &ExactValue) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let (Some(a), Some(b)) = (num.floor_log2(), den.floor_log2()) else {
        return f64::INFINITY;
    };
    // bring both to about 64 significant bits before dividing
    let na = num.mul_pow2(62 - a).round_to_bits(64, RoundingMode::NearestEven);
    let nb = den.mul_pow2(62 - b).round_to_bits(64, RoundingMode::NearestEven);
    let q = na.to_f64() / nb.to_f64();
    q * 2f64.powi((a - b).clamp(-1074, 1023) as i32)
}

/// Ground truth for `x^n` at a given output precision: the exact value when
/// it is small enough to expand, otherwise a rigorous enclosure tight enough
/// to fix RD, RU and the breakpoint side at that precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowReference {
    /// Lower end of the enclosure of `|x|^n`.
    pub lower: ExactValue,
    /// Upper end; equal to `lower` when the value is exact.
    pub upper: ExactValue,
    /// Classification of `|x|^n` at the output precision.
    pub classification: Classification,
}

/// Expanded-mantissa size (bits) up to which [`pow_reference`] computes
/// `x^n` exactly.
pub const EXACT_POW_BITS: u64 = 1 << 16;

impl PowReference {
    pub fn is_exact_value(&self) -> bool {
        self.lower == self.upper
    }

    /// Upper bound on `|approx - x^n|`.
    pub fn abs_error_bound(&self, approx: &ExactValue) -> ExactValue {
        let a = (approx - &self.lower).abs();
        let b = (approx - &self.upper).abs();
        a.max(b)
    }

    /// Upper bound on `|result - x^n| / ulp(result)`.
    pub fn ulp_distance_bound(&self, result: &FpNumber) -> Result<ExactValue, OracleError> {
        let a = ulp_distance(result, &self.lower)?;
        let b = ulp_distance(result, &self.upper)?;
        Ok(a.max(b))
    }

    /// Certifies `|approx - x^n| ≤ bound · x^n`.
    pub fn relative_error_within(&self, approx: &ExactValue, bound: &ExactValue) -> bool {
        let err = self.abs_error_bound(approx);
        // try a short truncation of the bound first; fall back to full width
        let short = bound.round_to_bits(128, RoundingMode::TowardZero);
        err <= &short * &self.lower || err <= bound * &self.lower
    }

    /// Approximate `|approx / x^n - 1|` (reporting only).
    pub fn relative_error_f64(&self, approx: &ExactValue) -> f64 {
        ratio_to_f64(&self.abs_error_bound(approx), &self.lower)
    }
}

/// Enclosure of `|x|^n` by binary exponentiation with every product rounded
/// outward to `bits` significant bits.
pub fn pow_enclosure(x: &FpNumber, n: u64, bits: u64) -> Result<(ExactValue, ExactValue), OracleError> {
    if n < 1 {
        return Err(OracleError::ExponentTooSmall(n));
    }
    if x.is_zero() {
        return Err(OracleError::Zero);
    }
    let base = x.to_exact().abs();
    Ok((
        base.pow_rounded(n as u128, bits, RoundingMode::TowardNegInf),
        base.pow_rounded(n as u128, bits, RoundingMode::TowardPosInf),
    ))
}

/// Reference value of `|x|^n` classified at precision `p`.
pub fn pow_reference(x: &FpNumber, n: u64, p: Precision) -> Result<PowReference, OracleError> {
    if n < 1 {
        return Err(OracleError::ExponentTooSmall(n));
    }
    if x.is_zero() {
        return Err(OracleError::Zero);
    }
    let odd_bits = x.to_exact().bit_length();
    if odd_bits.saturating_mul(n) <= EXACT_POW_BITS {
        let v = x.to_exact().abs().pow(n);
        let classification = classify_rounding(&v, p)?;
        return Ok(PowReference {
            lower: v.clone(),
            upper: v,
            classification,
        });
    }
    // Wider than p + 1 bits: neither a machine number nor a breakpoint, so
    // a tight enough enclosure always settles the classification.
    let mut bits = 4 * (p.bits() as u64 + 64);
    loop {
        let (lower, upper) = pow_enclosure(x, n, bits)?;
        let a = classify_rounding(&lower, p)?;
        let b = classify_rounding(&upper, p)?;
        if a == b && a.position != Position::Exact && a.position != Position::AtMid {
            return Ok(PowReference {
                lower,
                upper,
                classification: a,
            });
        }
        bits *= 2;
    }
}

/// A hardest-to-round input found by exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorstCaseRecord {
    #[serde(serialize_with = "ser_significand", deserialize_with = "de_significand")]
    pub x: FpNumber,
    pub n: u64,
    pub rounding_bit: u8,
    pub run_len: u64,
    pub next_bit: u8,
    pub distance_exponent: u64,
}

/// All `p` bits of the significand of `x ∈ [1, 2)`, trailing zeros kept.
pub fn significand_bits(x: &FpNumber) -> String {
    let s = format!("{:0w$b}", x.significand(), w = x.precision().bits() as usize);
    format!("{}.{}", &s[..1], &s[1..])
}

fn ser_significand<S: Serializer>(x: &FpNumber, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&significand_bits(x))
}

fn de_significand<'de, D: Deserializer<'de>>(d: D) -> Result<FpNumber, D::Error> {
    use serde::de::Error;
    let s = String::deserialize(d)?;
    parse_significand_bits(&s).ok_or_else(|| D::Error::custom(format!("bad significand {s:?}")))
}

/// Inverse of [`significand_bits`]: the precision is the digit count.
pub fn parse_significand_bits(s: &str) -> Option<FpNumber> {
    let frac = s.strip_prefix("1.")?;
    if !frac.bytes().all(|b| b == b'0' || b == b'1') {
        return None;
    }
    let p = Precision::new(frac.len() as u32 + 1).ok()?;
    let m = u64::from_str_radix(&format!("1{frac}"), 2).ok()?;
    FpNumber::from_parts(false, m, 0, p).ok()
}

/// Outcome of an exhaustive search over significands in `[1, 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorstCaseSearch {
    pub p: Precision,
    pub n: u64,
    pub candidates: u64,
    /// Inputs whose power is a machine number at precision `p`.
    pub exact: u64,
    /// Inputs whose power is exactly a breakpoint.
    pub midpoints: u64,
    /// Longest run; `None` when every power is exact or a breakpoint.
    pub worst: Option<WorstCaseRecord>,
}

#[derive(Default, Clone, Copy)]
struct Partial {
    exact: u64,
    midpoints: u64,
    worst: Option<WorstCaseRecord>,
}

fn better(a: Option<WorstCaseRecord>, b: Option<WorstCaseRecord>) -> Option<WorstCaseRecord> {
    match (a, b) {
        (None, r) | (r, None) => r,
        (Some(a), Some(b)) => {
            let key = |r: &WorstCaseRecord| (r.run_len, std::cmp::Reverse(r.x.significand()));
            Some(if key(&a) >= key(&b) { a } else { b })
        }
    }
}

fn merge(a: Partial, b: Partial) -> Partial {
    Partial {
        exact: a.exact + b.exact,
        midpoints: a.midpoints + b.midpoints,
        worst: better(a.worst, b.worst),
    }
}

/// Enumerate all `2^{p-1}` significands of precision `p` and return the one
/// whose `n`-th power has the longest run after the rounding bit (smallest
/// significand on ties). Runs on the current rayon pool; the result does not
/// depend on the pool size.
pub fn search_worst_cases(p: Precision, n: u64) -> Result<WorstCaseSearch, OracleError> {
    if n < 1 {
        return Err(OracleError::ExponentTooSmall(n));
    }
    let candidates = 1u64 << (p.bits() - 1);
    if p.bits() > MAX_SEARCH_PRECISION {
        return Err(OracleError::SearchTooLarge {
            p: p.bits(),
            candidates,
            max: MAX_SEARCH_PRECISION,
            limit: 1u64 << (MAX_SEARCH_PRECISION - 1),
        });
    }
    let total = (candidates..2 * candidates)
        .into_par_iter()
        .map(|m| {
            let x = FpNumber::from_parts(false, m, 0, p)
                .expect("normalized significand");
            let v = x.to_exact().pow(n);
            match run_length(&v, p) {
                Ok(r) => Partial {
                    worst: Some(WorstCaseRecord {
                        x,
                        n,
                        rounding_bit: r.rounding_bit,
                        run_len: r.run_len,
                        next_bit: r.next_bit,
                        distance_exponent: r.distance_exponent(p),
                    }),
                    ..Partial::default()
                },
                Err(OracleError::Midpoint(_)) => Partial {
                    midpoints: 1,
                    ..Partial::default()
                },
                Err(_) => Partial {
                    exact: 1,
                    ..Partial::default()
                },
            }
        })
        .reduce(Partial::default, merge);
    Ok(WorstCaseSearch {
        p,
        n,
        candidates,
        exact: total.exact,
        midpoints: total.midpoints,
        worst: total.worst,
    })
}
