#![allow(dead_code)]

use accpow::eft::DoubleWord;
use accpow::{ExactValue, FpNumber, Precision};

pub fn p(bits: u32) -> Precision {
    Precision::new(bits).unwrap()
}

/// Every nonzero value of precision `p` with exponent in `lo..=hi`, both
/// signs, plus zero.
pub fn all_values(p: Precision, lo: i64, hi: i64) -> Vec<FpNumber> {
    let b = p.bits();
    let mut out = vec![FpNumber::zero(p)];
    for e in lo..=hi {
        for m in (1u64 << (b - 1))..(1u64 << b) {
            for neg in [false, true] {
                out.push(FpNumber::from_parts(neg, m, e, p).unwrap());
            }
        }
    }
    out
}

/// Significands in `[1, 2)`.
pub fn significands(p: Precision) -> impl Iterator<Item = FpNumber> {
    let b = p.bits();
    ((1u64 << (b - 1))..(1u64 << b)).map(move |m| FpNumber::from_parts(false, m, 0, p).unwrap())
}

/// Normalized double words `hi + lo` with `hi ∈ [1, 2)` and `lo` either zero
/// or of exponent `-p`, `-p-1`, …, `-p-depth+1` satisfying `|lo| ≤ 2^-p hi`.
pub fn double_words(p: Precision, depth: i64) -> Vec<DoubleWord> {
    let b = p.bits() as i64;
    let mut out = Vec::new();
    for hi in significands(p) {
        out.push(DoubleWord::from_fp(hi));
        for lo in all_values(p, -b - depth + 1, -b) {
            if lo.is_zero() {
                continue;
            }
            if let Ok(dw) = DoubleWord::new(hi, lo) {
                if dw.low_part_is_small() {
                    out.push(dw);
                }
            }
        }
    }
    out
}

/// `|num| ≤ (c_num / c_den)·ε²·|den|`, exactly.
pub fn rel_le(num: &ExactValue, den: &ExactValue, c_num: i64, c_den: i64, p: Precision) -> bool {
    let lhs = &num.abs() * &ExactValue::from_int(c_den);
    let rhs = (&den.abs() * &ExactValue::from_int(c_num)).mul_pow2(-2 * p.bits() as i64);
    lhs <= rhs
}
