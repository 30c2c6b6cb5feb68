use proptest::prelude::*;

use super::*;
use crate::exact::ExactValue;

const RN: RoundingMode = RoundingMode::NearestEven;

fn p(bits: u32) -> Precision {
    Precision::new(bits).unwrap()
}

fn pow2(k: i64) -> ExactValue {
    ExactValue::pow2(k)
}

fn fp(v: &ExactValue, bits: u32) -> FpNumber {
    FpNumber::from_exact(v, p(bits)).unwrap()
}

/// Every machine number with exponents in `exps`, both signs, plus zero.
fn enumerate(bits: u32, exps: std::ops::RangeInclusive<i64>) -> Vec<FpNumber> {
    let prec = p(bits);
    let mut out = vec![FpNumber::zero(prec)];
    for e in exps {
        for m in (1u64 << (bits - 1))..(1u64 << bits) {
            for neg in [false, true] {
                out.push(FpNumber::from_parts(neg, m, e, prec).unwrap());
            }
        }
    }
    out
}

#[test]
fn precision_range() {
    assert!(Precision::new(1).is_err());
    assert!(Precision::new(65).is_err());
    assert_eq!(Precision::new(53).unwrap(), Precision::DOUBLE);
}

#[test]
fn round_examples() {
    let v = &ExactValue::one() + &pow2(-54);
    assert_eq!(round(&v, p(53), RN).to_exact(), ExactValue::one());
    assert_eq!(
        round(&v, p(53), RoundingMode::TowardPosInf).to_exact(),
        &ExactValue::one() + &pow2(-52)
    );
    // true midpoint at p = 53 ties to the even neighbour
    let mid = &ExactValue::one() + &pow2(-53);
    assert_eq!(round(&mid, p(53), RN).to_exact(), ExactValue::one());
    let mid_odd = &(&ExactValue::one() + &pow2(-52)) + &pow2(-53);
    assert_eq!(round(&mid_odd, p(53), RN).to_exact(), &ExactValue::one() + &pow2(-51));

    let six = ExactValue::new(6, -106);
    let v = &six + &pow2(-160);
    assert_eq!(round(&v, p(53), RoundingMode::TowardNegInf).to_exact(), six);
    assert_eq!(round(&-&v, p(53), RoundingMode::TowardZero).to_exact(), -&six);
}

#[test]
fn add_examples() {
    let one = FpNumber::one(p(53));
    let a = fp(&pow2(-53), 53);
    assert_eq!(add(&one, &a, RN), one);
    let b = fp(&pow2(-52), 53);
    assert_eq!(add(&one, &b, RN).to_exact(), &ExactValue::one() + &pow2(-52));
    let x = fp(&ExactValue::new(-12345, -7), 53);
    assert_eq!(add(&x, &FpNumber::zero(p(53)), RN), x);
    assert_eq!(sub(&x, &x, RN), FpNumber::zero(p(53)));
    assert!(sub(&x, &x, RoundingMode::TowardNegInf).is_negative());
}

#[test]
fn mul_examples() {
    let u = fp(&(&ExactValue::one() + &pow2(-52)), 53);
    assert_eq!(mul(&u, &u, RN).to_exact(), &ExactValue::one() + &pow2(-51));
    assert_eq!(mul(&u, &FpNumber::one(p(53)), RN), u);
    let t = fp(&ExactValue::new(3, -1), 53);
    for mode in RoundingMode::ALL {
        assert_eq!(mul(&t, &t, mode).to_exact(), ExactValue::new(9, -2));
    }
}

#[test]
fn fma_examples() {
    let prec = p(53);
    let u = fp(&(&ExactValue::one() + &pow2(-52)), 53);
    let minus_one = -FpNumber::one(prec);
    assert_eq!(fma(&u, &u, &minus_one, RN).to_exact(), pow2(-51));
    let zero = FpNumber::zero(prec);
    assert_eq!(fma(&u, &u, &zero, RN), mul(&u, &u, RN));
    let one = FpNumber::one(prec);
    assert_eq!(fma(&one, &one, &one, RN).to_exact(), ExactValue::from_int(2));
}

#[test]
fn ulp_examples() {
    assert_eq!(FpNumber::one(p(53)).ulp().unwrap(), pow2(-52));
    assert_eq!(fp(&ExactValue::new(3, -1), 53).ulp().unwrap(), pow2(-52));
    let big = fp(&ExactValue::new(0b11, 16), 53); // 1.1₂ × 2^17
    assert_eq!(big.ulp().unwrap(), pow2(17 - 52));
    assert_eq!(FpNumber::zero(p(53)).ulp(), Err(ArithError::Zero));
}

#[test]
fn narrow_examples() {
    let x = fp(&(&ExactValue::one() + &pow2(-60)), 64);
    assert_eq!(x.narrow(p(53), RN).unwrap(), FpNumber::one(p(53)));
    let y = fp(&ExactValue::new(0b1011, -3), 64);
    assert_eq!(y.narrow(p(53), RN).unwrap().to_exact(), y.to_exact());
    assert!(matches!(
        FpNumber::one(p(53)).narrow(p(64), RN),
        Err(ArithError::Widening { from: 53, to: 64 })
    ));

    // 2^-63 above the p = 53 midpoint 1 + 2^-53: rounds up, as round() says
    let v = &(&ExactValue::one() + &pow2(-53)) + &pow2(-63);
    let z = fp(&v, 64);
    let narrowed = z.narrow(p(53), RN).unwrap();
    assert_eq!(narrowed, round(&v, p(53), RN));
    assert_eq!(narrowed.to_exact(), &ExactValue::one() + &pow2(-52));

    // A value whose two-step rounding differs from one rounding.
    let w = &(&ExactValue::one() + &pow2(-53)) + &pow2(-70);
    let via_64 = round(&w, p(64), RN).narrow(p(53), RN).unwrap();
    assert_eq!(via_64, FpNumber::one(p(53)));
    assert_eq!(round(&w, p(53), RN).to_exact(), &ExactValue::one() + &pow2(-52));
}

#[test]
fn significand_examples() {
    assert_eq!(significand_of(&ExactValue::from_int(6)).unwrap(), ExactValue::new(3, -1));
    assert_eq!(significand_of(&pow2(-7)).unwrap(), ExactValue::one());
    assert_eq!(significand_of(&ExactValue::zero()), Err(ArithError::Zero));
}

#[test]
fn next_up_down_cross_binades() {
    let one = FpNumber::one(p(5));
    assert_eq!(one.next_down().to_exact(), ExactValue::new(31, -5));
    assert_eq!(one.next_down().next_up(), one);
    assert_eq!((-one).next_up().to_exact(), ExactValue::new(-31, -5));
    let top = fp(&ExactValue::new(31, -4), 5);
    assert_eq!(top.next_up().to_exact(), ExactValue::from_int(2));
}

#[test]
fn round_ratio_matches_exact_rounding() {
    // 1/3 at p = 5: 0.0101010…₂ → 0.010101₂ (RN), 11/32 is the RU neighbour
    let third = round_ratio(&1.into(), &3.into(), p(5), RN);
    assert_eq!(third.to_exact(), ExactValue::new(21, -6));
    let up = round_ratio(&1.into(), &3.into(), p(5), RoundingMode::TowardPosInf);
    assert_eq!(up.to_exact(), ExactValue::new(11, -5));
    let exact = round_ratio(&3.into(), &4.into(), p(5), RoundingMode::TowardPosInf);
    assert_eq!(exact.to_exact(), ExactValue::new(3, -2));
}

#[test]
fn text_forms() {
    let x = fp(&ExactValue::from_int(3), 4);
    assert_eq!(x.to_string(), "+ 0b1100 4 1");
    assert_eq!("+ 0b1100 4 1".parse::<FpNumber>().unwrap(), x);
    assert_eq!(x.to_binary_string(), "1.1×2^1");
    let e = "+ 0b0110 4 1".parse::<FpNumber>().unwrap_err();
    assert_eq!(e.position, 2);
    let e = "* 0b1100 4 1".parse::<FpNumber>().unwrap_err();
    assert_eq!(e.position, 0);

    let lit = parse_literal("1.0100010111101011011011101010011111100101000111011101").unwrap();
    let (v, exact) = lit.to_fp(p(53), RN);
    assert!(exact);
    assert_eq!(v.significand(), 0b10100010111101011011011101010011111100101000111011101);
    assert_eq!(v.exponent(), 0);

    let (v, exact) = parse_literal("1.1×2^17").unwrap().to_fp(p(53), RN);
    assert!(exact);
    assert_eq!(v.to_exact(), ExactValue::new(3, 16));
    assert_eq!(parse_literal("-0b1.1*2^-3").unwrap(), LiteralValue::Dyadic(ExactValue::new(-3, -4)));

    let (v, exact) = parse_literal("1.5").unwrap().to_fp(p(53), RN);
    assert!(exact);
    assert_eq!(v.to_exact(), ExactValue::new(3, -1));
    let (v, exact) = parse_literal("0.1").unwrap().to_fp(p(53), RN);
    assert!(!exact);
    assert_eq!(v.to_f64(), 0.1);
    assert_eq!(parse_literal("0d1.1").unwrap(), LiteralValue::Rational { num: 11.into(), den: 10.into() });
    assert_eq!(parse_literal("2.5e-1").unwrap(), LiteralValue::Dyadic(ExactValue::new(1, -2)));

    let e = parse_literal("0b1.0102").unwrap_err();
    assert_eq!(e.position, 7);
    assert_eq!(parse_literal("1.1").unwrap(), LiteralValue::Dyadic(ExactValue::new(3, -1)));
    assert!(parse_literal("").is_err());
}

#[test]
fn exhaustive_add_mul_small_precisions() {
    for bits in 2..=6u32 {
        let xs = enumerate(bits, -4..=4);
        let prec = p(bits);
        for a in &xs {
            let ea = a.to_exact();
            for b in &xs {
                let eb = b.to_exact();
                let sum = &ea + &eb;
                let prod = &ea * &eb;
                for mode in RoundingMode::ALL {
                    assert_eq!(add(a, b, mode), round(&sum, prec, mode), "{a:?} + {b:?} {mode:?}");
                    assert_eq!(mul(a, b, mode), round(&prod, prec, mode), "{a:?} * {b:?} {mode:?}");
                }
            }
        }
    }
}

#[test]
fn exhaustive_fma_small_precision() {
    let xs = enumerate(3, -3..=3);
    let prec = p(3);
    for a in &xs {
        for x in &xs {
            let prod = &a.to_exact() * &x.to_exact();
            for b in &xs {
                let exact = &prod + &b.to_exact();
                for mode in RoundingMode::ALL {
                    assert_eq!(fma(a, x, b, mode), round(&exact, prec, mode));
                }
            }
        }
    }
}

fn arb_fp(bits: u32, exp_range: i64) -> impl Strategy<Value = FpNumber> {
    let lo = 1u64 << (bits - 1);
    let hi = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    (any::<bool>(), lo..=hi, -exp_range..=exp_range, 0u8..20).prop_map(move |(neg, m, e, z)| {
        if z == 0 {
            FpNumber::zero(p(bits))
        } else {
            FpNumber::from_parts(neg, m, e, p(bits)).unwrap()
        }
    })
}

/// Three operands sharing a precision; narrow exponent ranges exercise
/// overlap and cancellation, wide ones the sticky paths.
fn operands() -> impl Strategy<Value = (FpNumber, FpNumber, FpNumber)> {
    (prop::sample::select(vec![2u32, 7, 24, 53, 64]), prop::sample::select(vec![8i64, 400]))
        .prop_flat_map(|(bits, range)| (arb_fp(bits, range), arb_fp(bits, range), arb_fp(bits, range)))
}

fn arb_mode() -> impl Strategy<Value = RoundingMode> {
    prop::sample::select(RoundingMode::ALL.to_vec())
}

fn arb_exact() -> impl Strategy<Value = ExactValue> {
    (any::<i128>(), -400i64..400).prop_map(|(m, s)| ExactValue::new(m, s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn ops_match_exact_rounding((a, x, b) in operands(), mode in arb_mode()) {
        let prec = a.precision();
        let (ea, ex, eb) = (a.to_exact(), x.to_exact(), b.to_exact());
        prop_assert_eq!(add(&a, &b, mode), round(&(&ea + &eb), prec, mode));
        prop_assert_eq!(sub(&a, &b, mode), round(&(&ea - &eb), prec, mode));
        prop_assert_eq!(mul(&a, &x, mode), round(&(&ea * &ex), prec, mode));
        prop_assert_eq!(fma(&a, &x, &b, mode), round(&(&(&ea * &ex) + &eb), prec, mode));
    }

    #[test]
    fn rounding_is_monotone(v in arb_exact(), w in arb_exact(), mode in arb_mode(),
                            bits in 2u32..=64) {
        let (lo, hi) = if v <= w { (v, w) } else { (w, v) };
        prop_assert!(round(&lo, p(bits), mode) <= round(&hi, p(bits), mode));
    }

    #[test]
    fn directed_roundings_bracket(v in arb_exact(), bits in 2u32..=64) {
        let prec = p(bits);
        let rd = round(&v, prec, RoundingMode::TowardNegInf);
        let ru = round(&v, prec, RoundingMode::TowardPosInf);
        let rz = round(&v, prec, RoundingMode::TowardZero);
        prop_assert!(rd.to_exact() <= v && v <= ru.to_exact());
        prop_assert_eq!(rz, if v.is_negative() { ru } else { rd });
    }

    #[test]
    fn machine_numbers_are_fixed_points(x in arb_fp(53, 1000), mode in arb_mode()) {
        prop_assert_eq!(round(&x.to_exact(), x.precision(), mode), x);
    }

    #[test]
    fn nearest_relative_error_is_strictly_below_half_ulp(v in arb_exact(), bits in 2u32..=64) {
        prop_assume!(!v.is_zero());
        // |RN(v) - v| < 2^{-p} |v|
        let r = round(&v, p(bits), RoundingMode::NearestEven).to_exact();
        let err = (&r - &v).abs();
        prop_assert!(err < v.abs().mul_pow2(-(bits as i64)));
        if let Ok(u) = FpNumber::from_exact(&r, p(bits)).unwrap().ulp() {
            prop_assert!(err <= u.mul_pow2(-1));
        }
    }

    #[test]
    fn text_form_round_trips(x in arb_fp(37, 5000)) {
        prop_assert_eq!(x.to_string().parse::<FpNumber>().unwrap(), x);
        let (back, exact) = parse_literal(&x.to_binary_string()).unwrap().to_fp(p(37), RN);
        prop_assert!(exact);
        prop_assert_eq!(back, x);
    }
}
