//! Fixed-width kernels for `add`, `mul` and `fma`.
//!
//! Significands are at most 64 bits, so a product fits in 128 bits and any
//! exact sum whose operands overlap fits in 256. When operands are too far
//! apart the smaller one is shifted right with a sticky ("jam") bit; the
//! surviving magnitude always has well over `p + 2` bits, which keeps the
//! final rounding exact.

use ethnum::U256;

use super::{same_precision, FpNumber, Precision, RoundingMode};

/// Shift right, OR-ing every discarded bit into the result's last bit.
fn shift_right_jam(x: U256, s: u32) -> U256 {
    if s == 0 {
        x
    } else if s >= 256 {
        U256::from(u8::from(x != U256::ZERO))
    } else {
        let lost = x & ((U256::ONE << s) - 1);
        (x >> s) | U256::from(u8::from(lost != U256::ZERO))
    }
}

/// Round `±mag·2^lsb` to precision `p`.
fn round_u256(negative: bool, mag: U256, lsb: i64, p: Precision, mode: RoundingMode) -> FpNumber {
    if mag == U256::ZERO {
        return FpNumber {
            negative,
            ..FpNumber::zero(p)
        };
    }
    let len = 256 - mag.leading_zeros();
    let pb = p.bits();
    if len <= pb {
        return FpNumber {
            negative,
            exponent: lsb + len as i64 - 1,
            significand: mag.as_u64() << (pb - len),
            precision: p,
        };
    }
    let shift = len - pb;
    let mut q = (mag >> shift).as_u64() as u128;
    let rem = mag & ((U256::ONE << shift) - 1);
    let half = U256::ONE << (shift - 1);
    let inexact = rem != U256::ZERO;
    let up = match mode {
        RoundingMode::NearestEven => rem > half || (rem == half && q & 1 == 1),
        RoundingMode::TowardPosInf => inexact && !negative,
        RoundingMode::TowardNegInf => inexact && negative,
        RoundingMode::TowardZero => false,
    };
    let mut exponent = lsb + len as i64 - 1;
    if up {
        q += 1;
        if q == 1u128 << pb {
            q = 1u128 << (pb - 1);
            exponent += 1;
        }
    }
    FpNumber {
        negative,
        exponent,
        significand: q as u64,
        precision: p,
    }
}

/// Signed sum of two aligned magnitudes sharing `lsb`.
fn signed_sum(
    neg_a: bool,
    a: U256,
    neg_b: bool,
    b: U256,
    lsb: i64,
    p: Precision,
    mode: RoundingMode,
) -> FpNumber {
    if neg_a == neg_b {
        return round_u256(neg_a, a + b, lsb, p, mode);
    }
    match a.cmp(&b) {
        std::cmp::Ordering::Greater => round_u256(neg_a, a - b, lsb, p, mode),
        std::cmp::Ordering::Less => round_u256(neg_b, b - a, lsb, p, mode),
        // exact cancellation: +0, except −0 when rounding downward
        std::cmp::Ordering::Equal => {
            round_u256(mode == RoundingMode::TowardNegInf, U256::ZERO, 0, p, mode)
        }
    }
}

/// Add two terms `±ma·2^la` and `±mb·2^lb` with `ma < 2^128`, `mb < 2^64`.
fn sum_terms(
    (neg_a, ma, la): (bool, u128, i64),
    (neg_b, mb, lb): (bool, u64, i64),
    p: Precision,
    mode: RoundingMode,
) -> FpNumber {
    let ma = U256::from(ma);
    let mb = U256::from(mb);
    if la >= lb {
        let d = la - lb;
        if d <= 120 {
            return signed_sum(neg_a, ma << d as u32, neg_b, mb, lb, p, mode);
        }
        // b lies far below a: keep 128 guard bits under a, jam the rest of b
        let lsb = la - 128;
        let b = if d < 128 {
            mb << (128 - d) as u32
        } else {
            shift_right_jam(mb, (d - 128).min(256) as u32)
        };
        signed_sum(neg_a, ma << 128u32, neg_b, b, lsb, p, mode)
    } else {
        let d = lb - la;
        if d <= 190 {
            return signed_sum(neg_a, ma, neg_b, mb << d as u32, la, p, mode);
        }
        let lsb = lb - 128;
        let a = shift_right_jam(ma, (d - 128).min(256) as u32);
        signed_sum(neg_a, a, neg_b, mb << 128u32, lsb, p, mode)
    }
}

fn term(x: &FpNumber) -> (bool, u64, i64) {
    (x.negative, x.significand, x.lsb_exponent())
}

/// Correctly rounded `a + b`.
///
/// # Panics
/// If the operands have different precisions.
pub fn add(a: &FpNumber, b: &FpNumber, mode: RoundingMode) -> FpNumber {
    let p = same_precision(a, b);
    match (a.is_zero(), b.is_zero()) {
        (true, true) => {
            let neg = if a.negative == b.negative {
                a.negative
            } else {
                mode == RoundingMode::TowardNegInf
            };
            return FpNumber {
                negative: neg,
                ..FpNumber::zero(p)
            };
        }
        (true, false) => return *b,
        (false, true) => return *a,
        _ => {}
    }
    let (na, ma, la) = term(a);
    sum_terms((na, ma as u128, la), term(b), p, mode)
}

/// Correctly rounded `a - b`.
pub fn sub(a: &FpNumber, b: &FpNumber, mode: RoundingMode) -> FpNumber {
    add(a, &-*b, mode)
}

/// Correctly rounded `a · b`.
///
/// # Panics
/// If the operands have different precisions.
pub fn mul(a: &FpNumber, b: &FpNumber, mode: RoundingMode) -> FpNumber {
    let p = same_precision(a, b);
    let negative = a.negative != b.negative;
    if a.is_zero() || b.is_zero() {
        return FpNumber {
            negative,
            ..FpNumber::zero(p)
        };
    }
    let m = a.significand as u128 * b.significand as u128;
    round_u256(negative, U256::from(m), a.lsb_exponent() + b.lsb_exponent(), p, mode)
}

/// `a·x + b` with a single rounding.
///
/// # Panics
/// If the operands have different precisions.
pub fn fma(a: &FpNumber, x: &FpNumber, b: &FpNumber, mode: RoundingMode) -> FpNumber {
    let p = same_precision(a, x);
    same_precision(a, b);
    let prod_negative = a.negative != x.negative;
    if a.is_zero() || x.is_zero() {
        let zero = FpNumber {
            negative: prod_negative,
            ..FpNumber::zero(p)
        };
        return add(&zero, b, mode);
    }
    if b.is_zero() {
        return mul(a, x, mode);
    }
    let m = a.significand as u128 * x.significand as u128;
    sum_terms(
        (prod_negative, m, a.lsb_exponent() + x.lsb_exponent()),
        term(b),
        p,
        mode,
    )
}
