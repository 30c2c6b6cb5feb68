//! Powering algorithms.
//!
//! * [`lin_power`]: `n - 1` successive Fast2Mult products, with the residuals
//!   folded into the low part by a Horner-style fma accumulation. `3n - 3`
//!   operations.
//! * [`log_power`]: binary exponentiation over DblMult. Between
//!   `11(1 + ⌊log₂n⌋)` and `11(1 + 2⌊log₂n⌋)` operations.
//! * [`pow_correctly_rounded`]: `log_power` in a wide working precision, then
//!   one rounding of the exact `h + l` to the target precision.

use thiserror::Error;

use crate::eft::{DoubleWord, Evaluator};
use crate::softfloat::{self, ArithError, FpNumber, Precision, RoundingMode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PowerError {
    #[error("exponent n must be >= 1, got {0}")]
    ExponentTooSmall(u64),
    #[error("base must be nonzero")]
    ZeroBase,
    #[error("target precision {target} exceeds working precision {work}")]
    TargetWiderThanWork { work: u32, target: u32 },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Linear,
    Log,
}

fn check(x: &FpNumber, n: u64) -> Result<(), PowerError> {
    if n < 1 {
        return Err(PowerError::ExponentTooSmall(n));
    }
    if x.is_zero() {
        return Err(PowerError::ZeroBase);
    }
    Ok(())
}

/// Linear-time power on a caller-supplied evaluator.
pub fn lin_power_with(ev: &mut Evaluator, x: &FpNumber, n: u64) -> Result<DoubleWord, PowerError> {
    check(x, n)?;
    let mut h = *x;
    let mut l = FpNumber::zero(x.precision());
    for _ in 2..=n {
        let DoubleWord { hi, lo: v } = ev.fast2mult(&h, x);
        h = hi;
        l = ev.fma(&l, x, &v);
    }
    Ok(DoubleWord { hi: h, lo: l })
}

pub fn lin_power(x: &FpNumber, n: u64) -> Result<DoubleWord, PowerError> {
    lin_power_with(&mut Evaluator::new(), x, n)
}

/// Logarithmic-time power on a caller-supplied evaluator.
pub fn log_power_with(ev: &mut Evaluator, x: &FpNumber, n: u64) -> Result<DoubleWord, PowerError> {
    check(x, n)?;
    let mut i = n;
    let mut acc = DoubleWord::from_fp(FpNumber::one(x.precision()));
    let mut sq = DoubleWord::from_fp(*x);
    while i > 1 {
        if i % 2 == 1 {
            acc = ev.dbl_mult_unchecked(&acc, &sq);
        }
        sq = ev.dbl_mult_unchecked(&sq, &sq);
        i /= 2;
    }
    // DblMult outputs come out of Fast2Sum, so |lo| ≤ ulp(hi)/2 ≤ 2^-p |hi|
    // and the operand condition holds at every call.
    debug_assert!(acc.low_part_is_small() && sq.low_part_is_small());
    Ok(ev.dbl_mult_unchecked(&acc, &sq))
}

pub fn log_power(x: &FpNumber, n: u64) -> Result<DoubleWord, PowerError> {
    log_power_with(&mut Evaluator::new(), x, n)
}

pub fn power_with(
    ev: &mut Evaluator,
    algorithm: Algorithm,
    x: &FpNumber,
    n: u64,
) -> Result<DoubleWord, PowerError> {
    match algorithm {
        Algorithm::Linear => lin_power_with(ev, x, n),
        Algorithm::Log => log_power_with(ev, x, n),
    }
}

/// Operation-count bounds `(min, max)` for computing `x^n`.
pub fn flop_count(n: u64, algorithm: Algorithm) -> (u64, u64) {
    assert!(n >= 1, "n must be >= 1");
    match algorithm {
        Algorithm::Linear => (3 * n - 3, 3 * n - 3),
        Algorithm::Log => {
            let k = n.ilog2() as u64;
            (11 * (1 + k), 11 * (1 + 2 * k))
        }
    }
}

/// Exact operation count of [`log_power`]: one DblMult per squaring, one
/// per set bit below the top one, plus the final product.
pub fn log_power_ops(n: u64) -> u64 {
    11 * (n.ilog2() as u64 + n.count_ones() as u64)
}

/// Operation-count crossover: the smallest `n0` such that LogPower uses
/// fewer operations than LinPower for every `n` in `n0..=n_max`. `None` if
/// LinPower is cheaper at `n_max`.
pub fn crossover(n_max: u64) -> Option<u64> {
    let mut n0 = None;
    for n in (1..=n_max).rev() {
        if log_power_ops(n) < 3 * n - 3 {
            n0 = Some(n);
        } else {
            break;
        }
    }
    n0
}

/// A request for `RN_target(x^n)` computed in a working precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PowerRequest {
    pub x: FpNumber,
    pub n: u64,
    pub work_precision: Precision,
    pub target_precision: Precision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoweredResult {
    pub value: FpNumber,
    /// `(h, l)` at working precision, for `|x|^n`.
    pub pair: DoubleWord,
    pub ops: u64,
}

/// `log_power` at the working precision, then a single rounding of the exact
/// `h + l` to the target precision (no intermediate rounding to the working
/// precision). Negative bases are powered through `|x|`.
pub fn pow_correctly_rounded(req: &PowerRequest) -> Result<PoweredResult, PowerError> {
    let PowerRequest {
        x,
        n,
        work_precision: work,
        target_precision: target,
    } = *req;
    if target > work {
        return Err(PowerError::TargetWiderThanWork {
            work: work.bits(),
            target: target.bits(),
        });
    }
    check(&x, n)?;
    let base = x.abs().widen(work)?;
    let mut ev = Evaluator::new();
    let pair = log_power_with(&mut ev, &base, n)?;
    let mut value = softfloat::round(&pair.to_exact(), target, RoundingMode::NearestEven);
    if x.is_negative() && n % 2 == 1 {
        value = -value;
    }
    Ok(PoweredResult {
        value,
        pair,
        ops: ev.ops(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ExactValue;

    fn p(bits: u32) -> Precision {
        Precision::new(bits).unwrap()
    }

    fn int(v: i64, bits: u32) -> FpNumber {
        FpNumber::from_int(v, p(bits)).unwrap()
    }

    #[test]
    fn lin_power_examples() {
        let r = lin_power(&int(3, 53), 5).unwrap();
        assert_eq!(r.hi, int(243, 53));
        assert!(r.lo.is_zero());
        let x = FpNumber::from_exact(&ExactValue::new(0b1011011, -5), p(53)).unwrap();
        assert_eq!(lin_power(&x, 1).unwrap(), DoubleWord::from_fp(x));
        let v = FpNumber::from_exact(&(&ExactValue::one() + &ExactValue::pow2(-26)), p(53)).unwrap();
        let r = lin_power(&v, 2).unwrap();
        assert_eq!(r.hi.to_exact(), &(&ExactValue::one() + &ExactValue::pow2(-25)) + &ExactValue::pow2(-52));
        assert!(r.lo.is_zero());
        // the residual lands in l when the square needs more than p bits
        let w = FpNumber::from_exact(&(&ExactValue::one() + &ExactValue::pow2(-27)), p(53)).unwrap();
        let r = lin_power(&w, 2).unwrap();
        assert_eq!(r.hi.to_exact(), &ExactValue::one() + &ExactValue::pow2(-26));
        assert_eq!(r.lo.to_exact(), ExactValue::pow2(-54));
    }

    #[test]
    fn log_power_examples() {
        let x = FpNumber::from_exact(&ExactValue::new(0b1011011, -5), p(53)).unwrap();
        assert_eq!(log_power(&x, 1).unwrap(), DoubleWord::from_fp(x));
        let r = log_power(&int(3, 53), 5).unwrap();
        assert_eq!(r.hi, int(243, 53));
        assert!(r.lo.is_zero());
    }

    #[test]
    fn rejects_bad_arguments() {
        assert_eq!(lin_power(&int(3, 53), 0), Err(PowerError::ExponentTooSmall(0)));
        assert_eq!(log_power(&int(3, 53), 0), Err(PowerError::ExponentTooSmall(0)));
        assert_eq!(log_power(&FpNumber::zero(p(53)), 3), Err(PowerError::ZeroBase));
        let req = PowerRequest {
            x: int(3, 53),
            n: 2,
            work_precision: p(53),
            target_precision: p(64),
        };
        assert!(matches!(pow_correctly_rounded(&req), Err(PowerError::TargetWiderThanWork { .. })));
    }

    #[test]
    fn flop_count_examples() {
        assert_eq!(flop_count(2, Algorithm::Linear), (3, 3));
        assert_eq!(flop_count(8, Algorithm::Log), (44, 77));
        assert_eq!(log_power_ops(8), 44);
        assert_eq!(log_power_ops(1), 11);
    }

    #[test]
    fn instrumented_counts_match() {
        let x = FpNumber::from_exact(&ExactValue::new(0b1101, -3), p(24)).unwrap();
        for n in 1..=300u64 {
            let mut ev = Evaluator::new();
            lin_power_with(&mut ev, &x, n).unwrap();
            assert_eq!(ev.ops(), 3 * n - 3);
            let mut ev = Evaluator::new();
            log_power_with(&mut ev, &x, n).unwrap();
            assert_eq!(ev.ops(), log_power_ops(n));
            let (lo, hi) = flop_count(n, Algorithm::Log);
            assert!(lo <= ev.ops() && ev.ops() <= hi);
        }
    }

    #[test]
    fn crossover_near_thirty() {
        assert_eq!(crossover(10_000), Some(32));
    }

    #[test]
    fn negative_base_sign() {
        let req = PowerRequest {
            x: int(-3, 53),
            n: 5,
            work_precision: p(64),
            target_precision: p(53),
        };
        assert_eq!(pow_correctly_rounded(&req).unwrap().value, int(-243, 53));
        let req = PowerRequest { n: 4, ..req };
        assert_eq!(pow_correctly_rounded(&req).unwrap().value, int(81, 53));
    }
}
