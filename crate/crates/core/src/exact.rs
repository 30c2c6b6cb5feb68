//! Exact dyadic reals `M·2^s`.
//!
//! Every quantity the toolkit manipulates (machine numbers, their sums and
//! products, integer powers, the error bounds) is a dyadic rational, so a
//! scaled big integer is enough to hold it without loss.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::softfloat::RoundingMode;

/// An exact value `mantissa · 2^scale`, kept in canonical form: the mantissa
/// is odd, or the value is zero with scale 0. Canonical form makes derived
/// equality and hashing value-based.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactValue {
    mantissa: BigInt,
    scale: i64,
}

impl ExactValue {
    pub fn zero() -> Self {
        ExactValue {
            mantissa: BigInt::zero(),
            scale: 0,
        }
    }

    pub fn one() -> Self {
        ExactValue {
            mantissa: BigInt::one(),
            scale: 0,
        }
    }

    /// `mantissa · 2^scale`, canonicalized.
    pub fn new(mantissa: impl Into<BigInt>, scale: i64) -> Self {
        let mut mantissa = mantissa.into();
        if mantissa.is_zero() {
            return Self::zero();
        }
        let tz = mantissa.trailing_zeros().unwrap_or(0);
        let mut scale = scale;
        if tz > 0 {
            mantissa >>= tz;
            scale += tz as i64;
        }
        ExactValue { mantissa, scale }
    }

    pub fn from_int(v: i64) -> Self {
        Self::new(v, 0)
    }

    /// `2^k`.
    pub fn pow2(k: i64) -> Self {
        ExactValue {
            mantissa: BigInt::one(),
            scale: k,
        }
    }

    /// Exact conversion of a finite `f64`.
    pub fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Self::zero());
        }
        let bits = x.to_bits();
        let neg = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let m = BigInt::from(m);
        Some(Self::new(if neg { -m } else { m }, e))
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mantissa.is_positive()
    }

    pub fn abs(&self) -> Self {
        ExactValue {
            mantissa: self.mantissa.abs(),
            scale: self.scale,
        }
    }

    /// Multiply by `2^k`.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        ExactValue {
            mantissa: self.mantissa.clone(),
            scale: self.scale + k,
        }
    }

    /// Number of significant bits of the mantissa (0 for zero).
    pub fn bit_length(&self) -> u64 {
        self.mantissa.bits()
    }

    /// `⌊log₂|v|⌋`, or `None` for zero.
    pub fn floor_log2(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.bit_length() as i64 - 1 + self.scale)
        }
    }

    /// True when `|v|` is an integral power of two.
    pub fn is_power_of_two(&self) -> bool {
        self.mantissa.magnitude().is_one()
    }

    pub fn pow(&self, n: u64) -> Self {
        if n == 0 {
            return Self::one();
        }
        let mantissa = num_traits::pow::pow(self.mantissa.clone(), n as usize);
        ExactValue {
            mantissa,
            scale: self.scale * n as i64,
        }
    }

    /// `v^n` by binary exponentiation, rounding every product to `bits`
    /// significant bits under `mode`. For `v > 0` and a directed mode the
    /// result bounds `v^n` in that direction.
    pub fn pow_rounded(&self, n: u128, bits: u64, mode: RoundingMode) -> Self {
        let mut acc = Self::one();
        let mut sq = self.round_to_bits(bits, mode);
        let mut i = n;
        while i > 0 {
            if i & 1 == 1 {
                acc = (&acc * &sq).round_to_bits(bits, mode);
            }
            i >>= 1;
            if i > 0 {
                sq = (&sq * &sq).round_to_bits(bits, mode);
            }
        }
        acc
    }

    /// Integer view `v·2^{-lsb}`; `None` if `v` has bits below `2^lsb`.
    pub fn to_scaled_int(&self, lsb: i64) -> Option<BigInt> {
        if self.is_zero() {
            return Some(BigInt::zero());
        }
        if self.scale < lsb {
            return None;
        }
        Some(&self.mantissa << (self.scale - lsb) as usize)
    }

    /// Round to `bits` significant bits (arbitrary width) under `mode`.
    pub fn round_to_bits(&self, bits: u64, mode: RoundingMode) -> Self {
        assert!(bits >= 1, "rounding width must be positive");
        if self.is_zero() {
            return Self::zero();
        }
        let negative = self.is_negative();
        let (q, lsb) = round_magnitude(self.mantissa.magnitude(), self.scale, bits, negative, mode);
        let m = BigInt::from_biguint(if negative { Sign::Minus } else { Sign::Plus }, q);
        Self::new(m, lsb)
    }

    /// Approximate `f64` value; display only.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bl = self.bit_length() as i64;
        let keep = bl.min(60);
        let top = (self.mantissa.abs() >> (bl - keep) as usize).to_u64().unwrap_or(0) as f64;
        let e = self.scale + bl - keep;
        let v = top * 2f64.powi(e.clamp(-1100, 1100) as i32);
        if self.is_negative() {
            -v
        } else {
            v
        }
    }

    /// Exact decimal expansion. Dyadic values always terminate; `max_digits`
    /// caps the number of significant digits printed (a trailing `…` marks
    /// truncation).
    pub fn to_decimal_string(&self, max_digits: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let sign = if self.is_negative() { "-" } else { "" };
        let mag = self.mantissa.magnitude().clone();
        // value = digits · 10^{-frac}
        let (digits, frac) = if self.scale >= 0 {
            (mag << self.scale as usize, 0usize)
        } else {
            let k = (-self.scale) as u32;
            (mag * num_traits::pow::pow(BigUint::from(5u8), k as usize), k as usize)
        };
        let mut s = digits.to_str_radix(10);
        let mut frac = frac;
        let mut truncated = false;
        if s.len() > max_digits && frac > 0 {
            let drop = (s.len() - max_digits).min(frac);
            s.truncate(s.len() - drop);
            frac -= drop;
            truncated = true;
        }
        finish_decimal(sign, s, frac, truncated)
    }
}

fn finish_decimal(sign: &str, mut s: String, frac: usize, truncated: bool) -> String {
    if frac == 0 {
        return format!("{sign}{s}{}", if truncated { "…" } else { "" });
    }
    if s.len() <= frac {
        s = format!("{}{}", "0".repeat(frac - s.len() + 1), s);
    }
    let (int, fr) = s.split_at(s.len() - frac);
    let mut fr = fr.to_string();
    if !truncated {
        while fr.ends_with('0') {
            fr.pop();
        }
    }
    let dots = if truncated { "…" } else { "" };
    if fr.is_empty() {
        format!("{sign}{int}{dots}")
    } else {
        format!("{sign}{int}.{fr}{dots}")
    }
}

/// Round the magnitude `mag·2^scale` to `bits` significant bits. Returns the
/// rounded integer `q` (with `q < 2^bits`, or `q = 2^{bits-1}` after a carry
/// renormalization) and the weight of its least significant bit.
pub(crate) fn round_magnitude(
    mag: &BigUint,
    scale: i64,
    bits: u64,
    negative: bool,
    mode: RoundingMode,
) -> (BigUint, i64) {
    let len = mag.bits();
    if len <= bits {
        return (mag.clone(), scale);
    }
    let shift = len - bits;
    let mut q: BigUint = mag >> shift as usize;
    let rem_is_zero = mag.trailing_zeros().map_or(true, |tz| tz >= shift);
    let round_bit = mag.bit(shift - 1);
    let below_half_nonzero = shift >= 2 && mag.trailing_zeros().map_or(false, |tz| tz < shift - 1);
    let up = match mode {
        RoundingMode::NearestEven => round_bit && (below_half_nonzero || q.is_odd()),
        RoundingMode::TowardPosInf => !rem_is_zero && !negative,
        RoundingMode::TowardNegInf => !rem_is_zero && negative,
        RoundingMode::TowardZero => false,
    };
    let mut lsb = scale + shift as i64;
    if up {
        q += 1u32;
        if q.bits() > bits {
            q >>= 1;
            lsb += 1;
        }
    }
    (q, lsb)
}

impl fmt::Debug for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·2^{}", self.mantissa, self.scale)
    }
}

impl fmt::Display for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string(40))
    }
}

impl Ord for ExactValue {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.mantissa.sign(), other.mantissa.sign());
        if sa != sb {
            return sign_rank(sa).cmp(&sign_rank(sb));
        }
        if self.is_zero() {
            return Ordering::Equal;
        }
        // Same nonzero sign: compare magnitudes through their binades first.
        let (la, lb) = (self.floor_log2().unwrap(), other.floor_log2().unwrap());
        let mag = if la != lb {
            la.cmp(&lb)
        } else {
            let lsb = self.scale.min(other.scale);
            let a = self.mantissa.magnitude() << (self.scale - lsb) as usize;
            let b = other.mantissa.magnitude() << (other.scale - lsb) as usize;
            a.cmp(&b)
        };
        if sa == Sign::Minus {
            mag.reverse()
        } else {
            mag
        }
    }
}

fn sign_rank(s: Sign) -> i8 {
    match s {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

impl PartialOrd for ExactValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a ExactValue> for &'a ExactValue {
    type Output = ExactValue;
    fn add(self, rhs: &ExactValue) -> ExactValue {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let lsb = self.scale.min(rhs.scale);
        let a = &self.mantissa << (self.scale - lsb) as usize;
        let b = &rhs.mantissa << (rhs.scale - lsb) as usize;
        ExactValue::new(a + b, lsb)
    }
}

impl<'a> Sub<&'a ExactValue> for &'a ExactValue {
    type Output = ExactValue;
    fn sub(self, rhs: &ExactValue) -> ExactValue {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a ExactValue> for &'a ExactValue {
    type Output = ExactValue;
    fn mul(self, rhs: &ExactValue) -> ExactValue {
        if self.is_zero() || rhs.is_zero() {
            return ExactValue::zero();
        }
        // odd · odd is odd: already canonical
        ExactValue {
            mantissa: &self.mantissa * &rhs.mantissa,
            scale: self.scale + rhs.scale,
        }
    }
}

impl Neg for &ExactValue {
    type Output = ExactValue;
    fn neg(self) -> ExactValue {
        ExactValue {
            mantissa: -&self.mantissa,
            scale: self.scale,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<ExactValue> for ExactValue {
            type Output = ExactValue;
            fn $m(self, rhs: ExactValue) -> ExactValue {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a ExactValue> for ExactValue {
            type Output = ExactValue;
            fn $m(self, rhs: &ExactValue) -> ExactValue {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for ExactValue {
    type Output = ExactValue;
    fn neg(self) -> ExactValue {
        -&self
    }
}

impl From<i64> for ExactValue {
    fn from(v: i64) -> Self {
        Self::from_int(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        let v = ExactValue::new(12, 0);
        assert_eq!(v.mantissa(), &BigInt::from(3));
        assert_eq!(v.scale(), 2);
        assert_eq!(ExactValue::new(0, 17), ExactValue::zero());
        assert_eq!(ExactValue::new(6, -1), ExactValue::from_int(3));
    }

    #[test]
    fn arithmetic_and_order() {
        let a = ExactValue::new(3, -2); // 0.75
        let b = ExactValue::new(5, -3); // 0.625
        assert_eq!(&a + &b, ExactValue::new(11, -3));
        assert_eq!(&a - &b, ExactValue::new(1, -3));
        assert_eq!(&a * &b, ExactValue::new(15, -5));
        assert!(a > b);
        assert!(-&a < -&b);
        assert!(ExactValue::zero() > -&b);
        assert_eq!(a.floor_log2(), Some(-1));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(ExactValue::new(9, -2).to_decimal_string(40), "2.25");
        assert_eq!(ExactValue::from_int(-243).to_decimal_string(40), "-243");
        assert_eq!(ExactValue::pow2(-3).to_decimal_string(40), "0.125");
        assert_eq!(ExactValue::pow2(-10).to_decimal_string(3), "0.000976…");
    }

    #[test]
    fn arbitrary_width_rounding() {
        let v = ExactValue::new(0b10111, 0);
        assert_eq!(v.round_to_bits(3, RoundingMode::NearestEven), ExactValue::from_int(24));
        assert_eq!(v.round_to_bits(3, RoundingMode::TowardZero), ExactValue::from_int(20));
        assert_eq!((-&v).round_to_bits(3, RoundingMode::TowardNegInf), ExactValue::from_int(-24));
        assert_eq!(ExactValue::from_int(0b101).round_to_bits(2, RoundingMode::NearestEven), ExactValue::from_int(4));
        assert_eq!(ExactValue::from_int(0b111).round_to_bits(2, RoundingMode::NearestEven), ExactValue::from_int(8));
    }

    #[test]
    fn f64_conversion_is_exact() {
        assert_eq!(ExactValue::from_f64(1.5).unwrap(), ExactValue::new(3, -1));
        assert_eq!(ExactValue::from_f64(-0.1).unwrap().to_f64(), -0.1);
        assert!(ExactValue::from_f64(f64::NAN).is_none());
    }
}
