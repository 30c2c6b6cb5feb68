//! Parametric radix-2 floating point with correct rounding.
//!
//! Numbers carry an explicit precision `p` (2 ≤ p ≤ 64) and an unbounded
//! exponent, so there are no subnormals, infinities or overflow. Every
//! operation returns the exact result rounded once under the requested mode.

mod literal;
mod ops;

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::exact::{round_magnitude, ExactValue};

pub use literal::{parse_literal, LiteralValue, ParseError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("precision {0} outside supported range 2..=64")]
    InvalidPrecision(u32),
    #[error("operation undefined for zero")]
    Zero,
    #[error("cannot narrow from precision {from} to wider precision {to}")]
    Widening { from: u32, to: u32 },
    #[error("significand {significand:#b} is not normalized for precision {p}")]
    NotNormalized { significand: u64, p: u32 },
    #[error("value is not representable at precision {0}")]
    NotRepresentable(u32),
}

/// Number of significand bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Precision(u32);

impl Precision {
    pub const MIN: u32 = 2;
    pub const MAX: u32 = 64;
    pub const SINGLE: Precision = Precision(24);
    pub const DOUBLE: Precision = Precision(53);
    pub const EXTENDED: Precision = Precision(64);

    pub fn new(p: u32) -> Result<Self, ArithError> {
        if (Self::MIN..=Self::MAX).contains(&p) {
            Ok(Precision(p))
        } else {
            Err(ArithError::InvalidPrecision(p))
        }
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// Unit roundoff `ε = 2^{-p}`.
    pub fn unit_roundoff(self) -> ExactValue {
        ExactValue::pow2(-(self.0 as i64))
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoundingMode {
    NearestEven,
    TowardNegInf,
    TowardPosInf,
    TowardZero,
}

impl RoundingMode {
    pub const ALL: [RoundingMode; 4] = [
        RoundingMode::NearestEven,
        RoundingMode::TowardNegInf,
        RoundingMode::TowardPosInf,
        RoundingMode::TowardZero,
    ];
}

/// A machine number `±m·2^{e-p+1}` with `2^{p-1} ≤ m < 2^p`, or a signed zero
/// (`m = 0`).
#[derive(Clone, Copy)]
pub struct FpNumber {
    negative: bool,
    exponent: i64,
    significand: u64,
    precision: Precision,
}

impl FpNumber {
    pub fn zero(p: Precision) -> Self {
        FpNumber {
            negative: false,
            exponent: 0,
            significand: 0,
            precision: p,
        }
    }

    pub fn one(p: Precision) -> Self {
        FpNumber {
            negative: false,
            exponent: 0,
            significand: 1u64 << (p.0 - 1),
            precision: p,
        }
    }

    pub fn from_parts(
        negative: bool,
        significand: u64,
        exponent: i64,
        p: Precision,
    ) -> Result<Self, ArithError> {
        if significand == 0 {
            return Ok(FpNumber {
                negative,
                ..Self::zero(p)
            });
        }
        if 64 - significand.leading_zeros() != p.0 {
            return Err(ArithError::NotNormalized { significand, p: p.0 });
        }
        Ok(FpNumber {
            negative,
            exponent,
            significand,
            precision: p,
        })
    }

    /// Exact conversion; fails if `v` needs more than `p` bits.
    pub fn from_exact(v: &ExactValue, p: Precision) -> Result<Self, ArithError> {
        if v.bit_length() > p.0 as u64 {
            return Err(ArithError::NotRepresentable(p.0));
        }
        Ok(round(v, p, RoundingMode::NearestEven))
    }

    pub fn from_int(v: i64, p: Precision) -> Result<Self, ArithError> {
        Self::from_exact(&ExactValue::from_int(v), p)
    }

    /// `f64` input rounded to `p` (exact when `p ≥ 53` and `x` is normal).
    pub fn from_f64(x: f64, p: Precision, mode: RoundingMode) -> Option<Self> {
        ExactValue::from_f64(x).map(|v| round(&v, p, mode))
    }

    pub fn is_zero(&self) -> bool {
        self.significand == 0
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn significand(&self) -> u64 {
        self.significand
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// Weight of the last significand bit, `e - p + 1`.
    pub(crate) fn lsb_exponent(&self) -> i64 {
        self.exponent - self.precision.0 as i64 + 1
    }

    pub fn to_exact(&self) -> ExactValue {
        if self.is_zero() {
            return ExactValue::zero();
        }
        let m = BigInt::from(self.significand);
        ExactValue::new(if self.negative { -m } else { m }, self.lsb_exponent())
    }

    /// Approximate value; display and sampling only.
    pub fn to_f64(&self) -> f64 {
        self.to_exact().to_f64()
    }

    pub fn abs(&self) -> Self {
        FpNumber {
            negative: false,
            ..*self
        }
    }

    /// Multiply by `2^k` (exact with unbounded exponents).
    pub fn scale_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return *self;
        }
        FpNumber {
            exponent: self.exponent + k,
            ..*self
        }
    }

    /// The same value at a precision at least as wide.
    pub fn widen(&self, p: Precision) -> Result<Self, ArithError> {
        if p < self.precision {
            return Err(ArithError::NotRepresentable(p.0));
        }
        if self.is_zero() {
            return Ok(FpNumber {
                precision: p,
                ..*self
            });
        }
        Ok(FpNumber {
            significand: self.significand << (p.0 - self.precision.0),
            precision: p,
            ..*self
        })
    }

    /// `2^{e-p+1}`.
    pub fn ulp(&self) -> Result<ExactValue, ArithError> {
        if self.is_zero() {
            return Err(ArithError::Zero);
        }
        Ok(ExactValue::pow2(self.lsb_exponent()))
    }

    /// A single rounding of this value to a narrower precision.
    pub fn narrow(&self, target: Precision, mode: RoundingMode) -> Result<Self, ArithError> {
        if target > self.precision {
            return Err(ArithError::Widening {
                from: self.precision.0,
                to: target.0,
            });
        }
        if self.is_zero() {
            return Ok(FpNumber {
                precision: target,
                ..*self
            });
        }
        Ok(round(&self.to_exact(), target, mode))
    }

    /// Next machine number toward +∞.
    pub fn next_up(&self) -> Self {
        self.step(true)
    }

    /// Next machine number toward −∞.
    pub fn next_down(&self) -> Self {
        self.step(false)
    }

    fn step(&self, up: bool) -> Self {
        assert!(
            !self.is_zero(),
            "no adjacent machine number to zero with unbounded exponents"
        );
        // Moving away from zero grows the magnitude.
        let grow = up != self.negative;
        let top = 1u64 << (self.precision.0 - 1);
        let mut next = *self;
        if grow {
            if self.significand == u64::MAX >> (64 - self.precision.0) {
                next.significand = top;
                next.exponent += 1;
            } else {
                next.significand += 1;
            }
        } else if self.significand == top {
            next.significand = u64::MAX >> (64 - self.precision.0);
            next.exponent -= 1;
        } else {
            next.significand -= 1;
        }
        next
    }

    /// Value ordering; signed zeros compare equal.
    pub fn cmp_value(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => {
                return if other.negative {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
            (false, true) => {
                return if self.negative {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            _ => {}
        }
        if self.negative != other.negative {
            return if self.negative {
                Ordering::Less
            } else {
                Ordering::Greater
            };
        }
        let a = self.significand << (64 - self.precision.0);
        let b = other.significand << (64 - other.precision.0);
        let mag = self.exponent.cmp(&other.exponent).then(a.cmp(&b));
        if self.negative {
            mag.reverse()
        } else {
            mag
        }
    }

    /// Last significand bit (used for ties-to-even checks).
    pub fn is_even(&self) -> bool {
        self.significand & 1 == 0
    }

    /// `1.b₁b₂…×2^e` form.
    pub fn to_binary_string(&self) -> String {
        if self.is_zero() {
            return if self.negative { "-0" } else { "0" }.to_string();
        }
        let bits = format!("{:0width$b}", self.significand, width = self.precision.0 as usize);
        let frac = bits[1..].trim_end_matches('0');
        let sign = if self.negative { "-" } else { "" };
        let body = if frac.is_empty() {
            "1".to_string()
        } else {
            format!("1.{frac}")
        };
        if self.exponent == 0 {
            format!("{sign}{body}")
        } else {
            format!("{sign}{body}×2^{}", self.exponent)
        }
    }
}

impl PartialEq for FpNumber {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl Eq for FpNumber {}

impl PartialOrd for FpNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_value(other))
    }
}

impl Ord for FpNumber {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_value(other)
    }
}

impl std::ops::Neg for FpNumber {
    type Output = FpNumber;
    fn neg(self) -> FpNumber {
        FpNumber {
            negative: !self.negative,
            ..self
        }
    }
}

/// `sign 0bMANTISSA p EXP`, e.g. `+ 0b11 2 1` for 3.
impl fmt::Display for FpNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:#b} {} {}",
            if self.negative { '-' } else { '+' },
            self.significand,
            self.precision.0,
            self.exponent
        )
    }
}

impl fmt::Debug for FpNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (p={})", self.to_binary_string(), self.precision.0)
    }
}

/// Correct rounding of an exact value to precision `p`.
pub fn round(v: &ExactValue, p: Precision, mode: RoundingMode) -> FpNumber {
    if v.is_zero() {
        return FpNumber::zero(p);
    }
    let negative = v.is_negative();
    let (q, lsb) = round_magnitude(v.mantissa().magnitude(), v.scale(), p.0 as u64, negative, mode);
    let len = q.bits() as u32;
    let q = q.to_u64().expect("rounded significand fits in 64 bits");
    FpNumber {
        negative,
        exponent: lsb + len as i64 - 1,
        significand: q << (p.0 - len),
        precision: p,
    }
}

/// `v / 2^{⌊log₂|v|⌋}`, a value in `[1, 2)`.
pub fn significand_of(v: &ExactValue) -> Result<ExactValue, ArithError> {
    let e = v.floor_log2().ok_or(ArithError::Zero)?;
    Ok(v.abs().mul_pow2(-e))
}

/// Round a rational `num/den` (den > 0) to precision `p`.
pub fn round_ratio(num: &BigInt, den: &BigInt, p: Precision, mode: RoundingMode) -> FpNumber {
    assert!(den > &BigInt::zero(), "denominator must be positive");
    if num.is_zero() {
        return FpNumber::zero(p);
    }
    let negative = num < &BigInt::zero();
    let n = num.magnitude();
    let d = den.magnitude();
    // Scale so the integer quotient has at least p + 2 bits; the remainder
    // becomes a sticky bit appended below.
    let shift = (p.0 as i64 + 2) - (n.bits() as i64 - d.bits() as i64);
    let shift = shift.max(0) + 1;
    let scaled = n << shift as usize;
    let q = &scaled / d;
    let r = &scaled % d;
    let mut mant = q << 1usize;
    if !r.is_zero() {
        mant |= num_bigint::BigUint::from(1u8);
    }
    let signed = num_bigint::BigInt::from_biguint(
        if negative {
            num_bigint::Sign::Minus
        } else {
            num_bigint::Sign::Plus
        },
        mant,
    );
    round(&ExactValue::new(signed, -shift - 1), p, mode)
}

/// Checked precision agreement for binary operations.
fn same_precision(a: &FpNumber, b: &FpNumber) -> Precision {
    assert_eq!(
        a.precision, b.precision,
        "operands must share one precision"
    );
    a.precision
}

pub use ops::{add, fma, mul, sub};

#[cfg(test)]
mod tests;
