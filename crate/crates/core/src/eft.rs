//! Error-free transformations and the double-word product.
//!
//! All operations round to nearest. [`Evaluator`] tallies every rounded
//! operation it performs so callers can check operation counts without any
//! shared state; the free functions run on a fresh evaluator.

use thiserror::Error;

use crate::exact::ExactValue;
use crate::softfloat::{self, FpNumber, Precision, RoundingMode};

const RN: RoundingMode = RoundingMode::NearestEven;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EftError {
    #[error("Fast2Sum requires exponent(a) >= exponent(b): got {a_exp} < {b_exp}")]
    Fast2SumOrder { a_exp: i64, b_exp: i64 },
    #[error("DblMult requires |lo| <= 2^-p |hi| for both operands")]
    DblMultLowPart,
    #[error("double word parts must share one precision")]
    PrecisionMismatch,
    #[error("low part is not absorbed by the high part under rounding")]
    NotNormalized,
}

/// An unevaluated sum `hi + lo` of two machine numbers of one precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DoubleWord {
    pub hi: FpNumber,
    pub lo: FpNumber,
}

impl DoubleWord {
    /// A normalized pair: `hi = RN(hi + lo)`.
    pub fn new(hi: FpNumber, lo: FpNumber) -> Result<Self, EftError> {
        let dw = Self::from_parts(hi, lo)?;
        if dw.is_normalized() {
            Ok(dw)
        } else {
            Err(EftError::NotNormalized)
        }
    }

    /// Any pair of equal precision; the powering loops produce pairs whose
    /// low part may exceed half an ulp of the high part.
    pub fn from_parts(hi: FpNumber, lo: FpNumber) -> Result<Self, EftError> {
        if hi.precision() != lo.precision() {
            return Err(EftError::PrecisionMismatch);
        }
        Ok(DoubleWord { hi, lo })
    }

    /// `(x, 0)`.
    pub fn from_fp(x: FpNumber) -> Self {
        DoubleWord {
            hi: x,
            lo: FpNumber::zero(x.precision()),
        }
    }

    pub fn precision(&self) -> Precision {
        self.hi.precision()
    }

    /// The exact value `hi + lo`.
    pub fn to_exact(&self) -> ExactValue {
        &self.hi.to_exact() + &self.lo.to_exact()
    }

    /// `hi` absorbs `lo` under round-to-nearest.
    pub fn is_normalized(&self) -> bool {
        softfloat::round(&self.to_exact(), self.precision(), RN) == self.hi
    }

    /// `|lo| ≤ 2^{-p}|hi|`, the DblMult operand condition.
    pub fn low_part_is_small(&self) -> bool {
        self.lo.is_zero()
            || self.lo.abs().scale_pow2(self.precision().bits() as i64) <= self.hi.abs()
    }
}

/// Round-to-nearest arithmetic that counts the rounded operations it
/// performs (each add, sub, mul or fma counts one).
#[derive(Debug, Default, Clone)]
pub struct Evaluator {
    ops: u64,
}

impl Evaluator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ops(&self) -> u64 {
        self.ops
    }

    pub fn add(&mut self, a: &FpNumber, b: &FpNumber) -> FpNumber {
        self.ops += 1;
        softfloat::add(a, b, RN)
    }

    pub fn sub(&mut self, a: &FpNumber, b: &FpNumber) -> FpNumber {
        self.ops += 1;
        softfloat::sub(a, b, RN)
    }

    pub fn mul(&mut self, a: &FpNumber, b: &FpNumber) -> FpNumber {
        self.ops += 1;
        softfloat::mul(a, b, RN)
    }

    pub fn fma(&mut self, a: &FpNumber, x: &FpNumber, b: &FpNumber) -> FpNumber {
        self.ops += 1;
        softfloat::fma(a, x, b, RN)
    }

    /// `s = RN(a+b)`, `t = (a+b) - s`, in three operations. Requires the
    /// exponent of `a` to be at least that of `b` (or either to be zero).
    pub fn fast2sum(&mut self, a: &FpNumber, b: &FpNumber) -> Result<DoubleWord, EftError> {
        if !a.is_zero() && !b.is_zero() && a.exponent() < b.exponent() {
            return Err(EftError::Fast2SumOrder {
                a_exp: a.exponent(),
                b_exp: b.exponent(),
            });
        }
        let s = self.add(a, b);
        let z = self.sub(&s, a);
        let t = self.sub(b, &z);
        Ok(DoubleWord { hi: s, lo: t })
    }

    /// Order-free variant of [`Evaluator::fast2sum`], six operations.
    pub fn two_sum(&mut self, a: &FpNumber, b: &FpNumber) -> DoubleWord {
        let s = self.add(a, b);
        let a1 = self.sub(&s, b);
        let b1 = self.sub(&s, &a1);
        let da = self.sub(a, &a1);
        let db = self.sub(b, &b1);
        let t = self.add(&da, &db);
        DoubleWord { hi: s, lo: t }
    }

    /// `c = RN(ab)`, `d = RN(ab - c)` with one fma; `c + d = ab` exactly.
    pub fn fast2mult(&mut self, a: &FpNumber, b: &FpNumber) -> DoubleWord {
        let c = self.mul(a, b);
        let d = self.fma(a, b, &-c);
        DoubleWord { hi: c, lo: d }
    }

    /// Approximate product of two double words, dropping `a_l·b_l`.
    /// Eleven operations.
    pub fn dbl_mult(&mut self, a: &DoubleWord, b: &DoubleWord) -> Result<DoubleWord, EftError> {
        if a.precision() != b.precision() {
            return Err(EftError::PrecisionMismatch);
        }
        if !a.low_part_is_small() || !b.low_part_is_small() {
            return Err(EftError::DblMultLowPart);
        }
        Ok(self.dbl_mult_unchecked(a, b))
    }

    pub(crate) fn dbl_mult_unchecked(&mut self, a: &DoubleWord, b: &DoubleWord) -> DoubleWord {
        let t = self.mul(&a.lo, &b.hi);
        let s = self.fma(&a.hi, &b.lo, &t);
        let DoubleWord { hi: x1, lo: u } = self.fast2mult(&a.hi, &b.hi);
        let DoubleWord { hi: x2, lo: v } = self
            .fast2sum(&x1, &s)
            .expect("Fast2Sum operand order holds inside DblMult");
        let y1 = self.add(&u, &v);
        self.fast2sum(&x2, &y1)
            .expect("Fast2Sum operand order holds inside DblMult")
    }
}

pub fn fast2sum(a: &FpNumber, b: &FpNumber) -> Result<DoubleWord, EftError> {
    Evaluator::new().fast2sum(a, b)
}

pub fn two_sum(a: &FpNumber, b: &FpNumber) -> DoubleWord {
    Evaluator::new().two_sum(a, b)
}

pub fn fast2mult(a: &FpNumber, b: &FpNumber) -> DoubleWord {
    Evaluator::new().fast2mult(a, b)
}

pub fn dbl_mult(a: &DoubleWord, b: &DoubleWord) -> Result<DoubleWord, EftError> {
    Evaluator::new().dbl_mult(a, b)
}

/// Relative error `η` of a double-word product, `(x+y) = ab(1+η)`, as an
/// exact ratio `(x+y-ab) / ab`. Returns the numerator and the exact product.
pub fn product_error(a: &DoubleWord, b: &DoubleWord, result: &DoubleWord) -> (ExactValue, ExactValue) {
    let exact = &a.to_exact() * &b.to_exact();
    (&result.to_exact() - &exact, exact)
}
