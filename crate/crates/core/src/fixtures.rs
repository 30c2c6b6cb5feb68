//! Published reference data shipped with the crate: the three bound tables,
//! the run-length table for `3 ≤ n ≤ 145` at double precision, and the
//! `x^51` hardest-to-round case.

use serde::Deserialize;

use crate::bounds::TableKind;

const LOGPOWER_53: &str = include_str!("../fixtures/logpower_p53.csv");
const LOGPOWER_64: &str = include_str!("../fixtures/logpower_p64.csv");
const LINPOWER_53: &str = include_str!("../fixtures/linpower_p53.csv");
const RUN_LENGTHS: &str = include_str!("../fixtures/run_lengths_p53.csv");
const WORST_CASE: &str = include_str!("../fixtures/worst_case_x51.json");

/// One printed `(n, -log₂ α_max)` entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrintedBound {
    pub n: u64,
    pub neg_log2: String,
}

fn csv_rows(text: &str) -> impl Iterator<Item = (&str, &str)> {
    text.lines().skip(1).filter(|l| !l.trim().is_empty()).map(|l| {
        l.split_once(',')
            .unwrap_or_else(|| panic!("malformed fixture line {l:?}"))
    })
}

/// The published table for `(p, kind)`, if there is one.
pub fn published_table(p: u32, kind: TableKind) -> Option<Vec<PrintedBound>> {
    let text = match (p, kind) {
        (53, TableKind::LogPower) => LOGPOWER_53,
        (64, TableKind::LogPower) => LOGPOWER_64,
        (53, TableKind::LinPower) => LINPOWER_53,
        _ => return None,
    };
    Some(
        csv_rows(text)
            .map(|(n, v)| PrintedBound {
                n: n.parse().expect("fixture n"),
                neg_log2: v.trim().to_string(),
            })
            .collect(),
    )
}

/// `(n, longest run after the rounding bit)` over all double-precision `x`,
/// for `n = 3..=145`.
pub fn run_length_table() -> Vec<(u64, u64)> {
    csv_rows(RUN_LENGTHS)
        .map(|(n, r)| (n.parse().expect("fixture n"), r.trim().parse().expect("fixture run")))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct WorstCase {
    /// Binary significand of `x`, 53 bits.
    pub x: String,
    pub n: u64,
    /// Leading 53 bits of `x^n`'s significand.
    pub power_significand: String,
    pub power_exponent: i64,
    pub rounding_bit: u8,
    pub run_len: u64,
    /// Bits right after the run.
    pub next_bits: String,
}

pub fn worst_case() -> WorstCase {
    serde_json::from_str(WORST_CASE).expect("worst-case fixture")
}
