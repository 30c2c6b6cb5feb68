//! Error bounds for LogPower and LinPower, evaluated in exact dyadic
//! arithmetic, and the correct-rounding margin test.
//!
//! Bounds are kept as an enclosure `lower ≤ α ≤ upper`. Small cases are
//! exact (`lower == upper`). `(1 + η)^{n-1}` for large `n` has millions of
//! bits, so it is enclosed by outward-rounded powering at
//! [`ENCLOSURE_BITS`] bits instead; the enclosure is far narrower than any
//! quantity printed or compared here, and every decision checks that both
//! ends agree.

use std::fmt;

use thiserror::Error;

use crate::exact::ExactValue;
use crate::softfloat::{Precision, RoundingMode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("n must be >= {min}, got {n}")]
    ExponentTooSmall { n: u128, min: u128 },
    #[error("target precision {target} exceeds working precision {work}")]
    TargetWiderThanWork { work: u32, target: u32 },
    #[error("bound enclosure too wide to decide")]
    Undecided,
}

/// Working width of outward-rounded enclosures.
pub const ENCLOSURE_BITS: u64 = 1024;

/// Mantissa size up to which `(1 + η)^{n-1}` is expanded exactly.
pub const EXACT_BOUND_BITS: u128 = 1 << 18;

/// A positive error bound, exact or enclosed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorBound {
    lower: ExactValue,
    upper: ExactValue,
}

impl ErrorBound {
    pub fn exact(v: ExactValue) -> Self {
        ErrorBound {
            lower: v.clone(),
            upper: v,
        }
    }

    pub fn enclosure(lower: ExactValue, upper: ExactValue) -> Self {
        assert!(lower <= upper, "empty enclosure");
        ErrorBound { lower, upper }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    /// The exact value, when known.
    pub fn value(&self) -> Option<&ExactValue> {
        self.is_exact().then_some(&self.lower)
    }

    pub fn lower(&self) -> &ExactValue {
        &self.lower
    }

    pub fn upper(&self) -> &ExactValue {
        &self.upper
    }

    pub fn to_f64(&self) -> f64 {
        self.upper.to_f64()
    }

    /// `k·bound`.
    pub fn scaled(&self, k: &ExactValue) -> Self {
        ErrorBound {
            lower: &self.lower * k,
            upper: &self.upper * k,
        }
    }

    /// `bound ≤ t`, or `Undecided` when `t` falls inside the enclosure.
    pub fn le(&self, t: &ExactValue) -> Result<bool, BoundsError> {
        if self.upper <= *t {
            Ok(true)
        } else if self.lower > *t {
            Ok(false)
        } else {
            Err(BoundsError::Undecided)
        }
    }

    /// `bound < t`, or `Undecided` when `t` falls inside the enclosure.
    pub fn lt(&self, t: &ExactValue) -> Result<bool, BoundsError> {
        if self.upper < *t {
            Ok(true)
        } else if self.lower >= *t {
            Ok(false)
        } else {
            Err(BoundsError::Undecided)
        }
    }

    /// `-log₂(bound)` to two decimals, without floating point.
    pub fn neg_log2(&self) -> Result<NegLog2, BoundsError> {
        // j = ⌊-200·log₂ v⌋ = -⌈log₂ v^200⌉, decided from v^200 bracketed by
        // directed powering; v is decreasing in j so the ends swap roles.
        for bits in [128, 512, 2048] {
            let hi = ceil_log2(&self.upper.pow_rounded(200, bits, RoundingMode::TowardPosInf));
            let lo = ceil_log2(&self.lower.pow_rounded(200, bits, RoundingMode::TowardNegInf));
            if hi == lo {
                return Ok(NegLog2 { two_hundredths: -hi });
            }
        }
        Err(BoundsError::Undecided)
    }
}

fn ceil_log2(v: &ExactValue) -> i64 {
    let f = v.floor_log2().expect("positive bound");
    if v.is_power_of_two() {
        f
    } else {
        f + 1
    }
}

/// `-log₂ α` pinned to `j = ⌊200·(-log₂ α)⌋`, enough to print it truncated
/// or rounded to two decimals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NegLog2 {
    two_hundredths: i64,
}

impl NegLog2 {
    /// `⌊100·(-log₂ α)⌋`.
    pub fn hundredths_truncated(&self) -> i64 {
        self.two_hundredths.div_euclid(2)
    }

    /// `-log₂ α` rounded to the nearest hundredth.
    pub fn hundredths_rounded(&self) -> i64 {
        (self.two_hundredths + 1).div_euclid(2)
    }

    pub fn truncated(&self) -> String {
        format_hundredths(self.hundredths_truncated())
    }

    pub fn rounded(&self) -> String {
        format_hundredths(self.hundredths_rounded())
    }

    /// True when `printed` is this value truncated or rounded to two
    /// decimals.
    pub fn matches(&self, printed: &str) -> bool {
        let printed = printed.trim();
        printed == self.truncated() || printed == self.rounded()
    }
}

/// Prints the truncated form.
impl fmt::Display for NegLog2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.truncated())
    }
}

fn format_hundredths(k: i64) -> String {
    let sign = if k < 0 { "-" } else { "" };
    let k = k.unsigned_abs();
    format!("{sign}{}.{:02}", k / 100, k % 100)
}

/// `η̄ = 6ε² + 16ε³ + 17ε⁴ + 11ε⁵ + 5ε⁶ + ε⁷`, `ε = 2^{-p}`: the relative error
/// bound of one DblMult.
pub fn eta_bound(p: Precision) -> ErrorBound {
    let p = p.bits() as i64;
    let v = [(6, 2), (16, 3), (17, 4), (11, 5), (5, 6), (1, 7)]
        .iter()
        .fold(ExactValue::zero(), |acc, &(c, k)| &acc + &ExactValue::new(c, -k * p));
    ErrorBound::exact(v)
}

/// LogPower relative error bound `(1 + η̄)^{n-1} - 1`.
pub fn logpower_alpha_max(n: u128, p: Precision) -> Result<ErrorBound, BoundsError> {
    if n < 2 {
        return Err(BoundsError::ExponentTooSmall { n, min: 2 });
    }
    let eta = eta_bound(p);
    let base = &ExactValue::one() + eta.value().expect("eta is exact");
    let one = ExactValue::one();
    if base.bit_length() as u128 * (n - 1) <= EXACT_BOUND_BITS {
        let v = &base.pow((n - 1) as u64) - &one;
        return Ok(ErrorBound::exact(v));
    }
    let lo = &base.pow_rounded(n - 1, ENCLOSURE_BITS, RoundingMode::TowardNegInf) - &one;
    let hi = &base.pow_rounded(n - 1, ENCLOSURE_BITS, RoundingMode::TowardPosInf) - &one;
    Ok(ErrorBound::enclosure(lo, hi))
}

fn check_gamma_n(n: u64) -> Result<(), BoundsError> {
    if n < 3 {
        return Err(BoundsError::ExponentTooSmall {
            n: n as u128,
            min: 3,
        });
    }
    Ok(())
}

fn one_plus_eps(p: Precision) -> ExactValue {
    &ExactValue::one() + &p.unit_roundoff()
}

/// `γ = (n-1) + (n-2)(1+ε) + … + 2(1+ε)^{n-3}`, summed in Horner form.
pub fn linpower_gamma(n: u64, p: Precision) -> Result<ExactValue, BoundsError> {
    check_gamma_n(n)?;
    let r = one_plus_eps(p);
    let mut g = ExactValue::from_int(2);
    for c in 3..n {
        g = &(&g * &r) + &ExactValue::from_int(c as i64);
    }
    Ok(g)
}

/// `γ = φ'(1)` from the closed form of `φ'`. With `r = 1 + ε` and
/// `u = 1/r`, `φ'(1) = r^{n-2}[((n-1)uⁿ - n·u^{n-1} + 1)/(u-1)² - 1]`, which
/// clears to the dyadic `(rⁿ - n·r + n - 1)/ε² - r^{n-2}`.
pub fn linpower_gamma_closed_form(n: u64, p: Precision) -> Result<ExactValue, BoundsError> {
    check_gamma_n(n)?;
    let r = one_plus_eps(p);
    let nn = ExactValue::from_int(n as i64);
    let numer = &(&(&r.pow(n) - &(&nn * &r)) + &nn) - &ExactValue::one();
    let inv_eps2 = 2 * p.bits() as i64;
    Ok(&numer.mul_pow2(inv_eps2) - &r.pow(n - 2))
}

/// `γ` for `n = 3, 4, …`, using `γ(n+1) = (1+ε)γ(n) + n`.
pub fn linpower_gammas(p: Precision) -> impl Iterator<Item = (u64, ExactValue)> {
    let r = one_plus_eps(p);
    let mut state = (3u64, ExactValue::from_int(2));
    std::iter::from_fn(move || {
        let (n, g) = state.clone();
        state = (n + 1, &(&g * &r) + &ExactValue::from_int(n as i64));
        Some((n, g))
    })
}

/// LinPower relative error bound `2ε²γ`, under the hypothesis
/// `|v_i| ≤ 2^{1-p}|x|^i` on the Fast2Mult residuals.
pub fn linpower_alpha_max(n: u64, p: Precision) -> Result<ErrorBound, BoundsError> {
    let g = linpower_gamma(n, p)?;
    Ok(ErrorBound::exact(g.mul_pow2(1 - 2 * p.bits() as i64)))
}

/// The estimate `(n² - n - 2)ε²` of [`linpower_alpha_max`].
pub fn linpower_alpha_approx(n: u64, p: Precision) -> ExactValue {
    let n = n as i128;
    ExactValue::new(n * n - n - 2, -2 * p.bits() as i64)
}

fn check_widths(p_work: Precision, p_target: Precision) -> Result<(), BoundsError> {
    if p_target > p_work {
        return Err(BoundsError::TargetWiderThanWork {
            work: p_work.bits(),
            target: p_target.bits(),
        });
    }
    Ok(())
}

/// Largest `n` with `2·α(n, p_work) < 2^{-p_target}`: up to this `n`,
/// `RN(h + l)` from LogPower is a faithful rounding of `xⁿ` at
/// `p_target` bits. Returns 1 if even `n = 2` fails.
pub fn faithful_limit(p_work: Precision, p_target: Precision) -> Result<u128, BoundsError> {
    check_widths(p_work, p_target)?;
    let threshold = ExactValue::pow2(-(p_target.bits() as i64));
    let ok = |n: u128| -> Result<bool, BoundsError> {
        logpower_alpha_max(n, p_work)?
            .scaled(&ExactValue::from_int(2))
            .lt(&threshold)
    };
    if !ok(2)? {
        return Ok(1);
    }
    let mut good = 2u128;
    let mut bad = 4u128;
    while ok(bad)? {
        good = bad;
        bad *= 2;
    }
    while bad - good > 1 {
        let mid = good + (bad - good) / 2;
        if ok(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(good)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Margin {
    Certified,
    NotCertified,
}

/// Whether LogPower at `p_work` followed by one rounding to `p_target` is
/// guaranteed correctly rounded for every `x` whose `xⁿ` has at most
/// `run_len` identical bits after the rounding bit:
/// `2·α(n, p_work) ≤ 2^{-(p_target + run_len + 1)}`. `n = 1` is exact.
pub fn correct_rounding_margin(
    n: u128,
    p_work: Precision,
    p_target: Precision,
    run_len: u64,
) -> Result<Margin, BoundsError> {
    check_widths(p_work, p_target)?;
    if n == 0 {
        return Err(BoundsError::ExponentTooSmall { n, min: 1 });
    }
    if n == 1 {
        return Ok(Margin::Certified);
    }
    let threshold = ExactValue::pow2(-(p_target.bits() as i64 + run_len as i64 + 1));
    let two_alpha = logpower_alpha_max(n, p_work)?.scaled(&ExactValue::from_int(2));
    Ok(if two_alpha.le(&threshold)? {
        Margin::Certified
    } else {
        Margin::NotCertified
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableKind {
    LogPower,
    LinPower,
}

impl TableKind {
    pub fn name(self) -> &'static str {
        match self {
            TableKind::LogPower => "logpower",
            TableKind::LinPower => "linpower",
        }
    }

    /// The exponents tabulated for this algorithm.
    pub fn n_values(self) -> &'static [u64] {
        match self {
            TableKind::LogPower => &[
                3,
                4,
                5,
                10,
                20,
                30,
                40,
                50,
                100,
                200,
                1_000,
                10_000,
                100_000,
                1_000_000,
                10_000_000,
                100_000_000,
                1 << 32,
            ],
            TableKind::LinPower => &[3, 4, 5, 10, 20, 30, 100],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub n: u64,
    pub bound: ErrorBound,
    pub neg_log2: NegLog2,
}

/// `-log₂ α_max` for every tabulated `n`.
pub fn make_tables(p: Precision, kind: TableKind) -> Result<Vec<TableRow>, BoundsError> {
    kind.n_values()
        .iter()
        .map(|&n| {
            let bound = match kind {
                TableKind::LogPower => logpower_alpha_max(n as u128, p)?,
                TableKind::LinPower => linpower_alpha_max(n, p)?,
            };
            let neg_log2 = bound.neg_log2()?;
            Ok(TableRow { n, bound, neg_log2 })
        })
        .collect()
}

/// `2^k` for exact powers of two above 2^20, otherwise the decimal.
pub fn n_label(n: u64) -> String {
    if n.is_power_of_two() && n > 1 << 20 {
        format!("2^{}", n.trailing_zeros())
    } else {
        n.to_string()
    }
}

pub fn render_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("n,neg_log2\n");
    for r in rows {
        out.push_str(&format!("{},{}\n", r.n, r.neg_log2));
    }
    out
}

pub fn render_text(rows: &[TableRow]) -> String {
    let width = rows.iter().map(|r| n_label(r.n).len()).max().unwrap_or(1).max(1);
    let mut out = format!("{:>width$}  -log2(alpha_max)\n", "n");
    for r in rows {
        out.push_str(&format!("{:>width$}  {:>16}\n", n_label(r.n), r.neg_log2.to_string()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(bits: u32) -> Precision {
        Precision::new(bits).unwrap()
    }

    fn eps2(bits: u32) -> ExactValue {
        ExactValue::pow2(-2 * bits as i64)
    }

    #[test]
    fn eta_notes() {
        let million = ExactValue::from_int(1_000_000);
        let e24 = eta_bound(p(24)).value().unwrap().clone();
        assert!(&e24 * &million <= &ExactValue::from_int(6_000_001) * &eps2(24));
        // 6 + 2·10^-15
        let e53 = eta_bound(p(53)).value().unwrap().clone();
        let q = ExactValue::from_int(1_000_000_000_000_000);
        assert!(&e53 * &q <= &ExactValue::from_int(6_000_000_000_000_002) * &eps2(53));
        let e5 = eta_bound(p(5)).value().unwrap().clone();
        assert!(e5 <= &ExactValue::from_int(7) * &eps2(5));
        assert!(eta_bound(p(4)).value().unwrap() > &(&ExactValue::from_int(7) * &eps2(4)));
    }

    #[test]
    fn neg_log2_examples() {
        let cases = [(3u128, 53u32, "102.41"), (1_000_000, 53, "83.48"), (3, 64, "124.41"), (1 << 32, 53, "71.41")];
        for (n, bits, want) in cases {
            let b = logpower_alpha_max(n, p(bits)).unwrap();
            assert_eq!(b.neg_log2().unwrap().truncated(), want, "n={n} p={bits}");
        }
        assert!(logpower_alpha_max(3, p(53)).unwrap().is_exact());
        assert!(!logpower_alpha_max(1 << 32, p(53)).unwrap().is_exact());
        assert_eq!(
            logpower_alpha_max(1, p(53)),
            Err(BoundsError::ExponentTooSmall { n: 1, min: 2 })
        );
        // exact power of two: 2ε²·2 = 2^-104
        let l3 = linpower_alpha_max(3, p(53)).unwrap();
        assert_eq!(l3.value().unwrap(), &ExactValue::pow2(-104));
        assert_eq!(l3.neg_log2().unwrap().truncated(), "104.00");
        assert_eq!(l3.neg_log2().unwrap().rounded(), "104.00");
        let l4 = linpower_alpha_max(4, p(53)).unwrap().neg_log2().unwrap();
        assert_eq!((l4.truncated().as_str(), l4.rounded().as_str()), ("102.67", "102.68"));
        assert!(l4.matches("102.68") && !l4.matches("102.69"));
        assert_eq!(format_hundredths(-5), "-0.05");
    }

    #[test]
    fn gamma_forms_agree() {
        assert_eq!(linpower_gamma(3, p(53)).unwrap(), ExactValue::from_int(2));
        assert!(linpower_gamma(2, p(53)).is_err());
        for bits in [5u32, 24, 53, 64] {
            for (n, g) in linpower_gammas(p(bits)).take(60) {
                assert_eq!(g, linpower_gamma(n, p(bits)).unwrap());
                assert_eq!(g, linpower_gamma_closed_form(n, p(bits)).unwrap());
            }
        }
        // ε → 0 limit of n = 4 is 3 + 2
        let g4 = linpower_gamma(4, p(64)).unwrap();
        assert!(g4 > ExactValue::from_int(5) && &g4 * &ExactValue::from_int(10_000) < ExactValue::from_int(50_001));
    }

    #[test]
    fn linpower_approximation() {
        assert_eq!(linpower_alpha_approx(5, p(53)), &ExactValue::from_int(18) * &eps2(53));
        let a = linpower_alpha_max(5, p(53)).unwrap().neg_log2().unwrap();
        assert_eq!(a.truncated(), "101.83");
    }

    #[test]
    fn monotone() {
        let mut prev = logpower_alpha_max(2, p(53)).unwrap();
        for n in [3u128, 7, 64, 1000, 1 << 20, 1 << 40] {
            let b = logpower_alpha_max(n, p(53)).unwrap();
            assert!(prev.upper() < b.lower());
            assert!(logpower_alpha_max(n, p(64)).unwrap().upper() < b.lower());
            prev = b;
        }
    }

    #[test]
    fn faithful_limits() {
        let l53 = faithful_limit(p(53), p(53)).unwrap();
        assert!(l53 >= 1 << 48 && l53 <= 1 << 50, "{l53}");
        let l64 = faithful_limit(p(64), p(53)).unwrap();
        assert!(l64 > l53);
        let l11 = faithful_limit(p(11), p(11)).unwrap();
        let two = ExactValue::from_int(2);
        let t = ExactValue::pow2(-11);
        assert!(logpower_alpha_max(l11, p(11)).unwrap().scaled(&two).lt(&t).unwrap());
        assert!(!logpower_alpha_max(l11 + 1, p(11)).unwrap().scaled(&two).lt(&t).unwrap());
        assert!(faithful_limit(p(24), p(53)).is_err());
    }

    #[test]
    fn margins() {
        assert_eq!(correct_rounding_margin(51, p(64), p(53), 59), Ok(Margin::Certified));
        assert_eq!(correct_rounding_margin(51, p(53), p(53), 59), Ok(Margin::NotCertified));
        assert_eq!(correct_rounding_margin(1, p(53), p(53), 1000), Ok(Margin::Certified));
    }

    #[test]
    fn table_examples() {
        let t1 = make_tables(p(53), TableKind::LogPower).unwrap();
        assert_eq!(t1.len(), 17);
        assert_eq!(t1.last().unwrap().neg_log2.truncated(), "71.41");
        let t2 = make_tables(p(64), TableKind::LogPower).unwrap();
        assert_eq!(t2.iter().find(|r| r.n == 100).unwrap().neg_log2.truncated(), "118.78");
        let t3 = make_tables(p(53), TableKind::LinPower).unwrap();
        assert_eq!(t3.iter().find(|r| r.n == 30).unwrap().neg_log2.truncated(), "96.23");
        let csv = render_csv(&t3);
        assert!(csv.starts_with("n,neg_log2\n3,104.00\n"));
        let text = render_text(&t1);
        assert!(text.lines().last().unwrap().starts_with("     2^32"), "{text}");
    }
}
