//! Verification sweeps: run LogPower and LinPower over many `(x, n)` pairs
//! and check every result against the oracle and the error bounds.
//!
//! Cases are generated up front in a fixed order (sampling uses a seeded
//! ChaCha stream), evaluated on a rayon pool, and collected back in input
//! order, so the output does not depend on the number of threads.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::{self, BoundsError, ErrorBound};
use crate::eft::{DoubleWord, Evaluator};
use crate::oracle::{self, OracleError, PowReference, Position};
use crate::powers::{self, Algorithm};
use crate::softfloat::{self, FpNumber, Precision, RoundingMode};

/// Largest precision for an exhaustive sweep without `force`.
pub const MAX_EXHAUSTIVE_PRECISION: u32 = 20;
/// Largest number of cases for an exhaustive sweep without `force`.
pub const MAX_EXHAUSTIVE_CASES: u64 = 1 << 22;
/// LinPower is skipped above this `n` (its cost and the oracle's are linear
/// in `n`).
pub const LINPOWER_MAX_N: u64 = 4096;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(
        "exhaustive sweep too large: p = {p} (limit {max_p}), {cases} cases (limit {max_cases}); \
         pass --force to run anyway"
    )]
    TooLarge {
        p: u32,
        cases: u64,
        max_p: u32,
        max_cases: u64,
    },
    #[error("empty exponent range {lo}..{hi}")]
    EmptyRange { lo: u64, hi: u64 },
    #[error("exponent n must be >= 1")]
    ExponentTooSmall,
    #[error("failed to build thread pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SweepMode {
    Exhaustive,
    Sample { count: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    pub p: Precision,
    pub n_lo: u64,
    pub n_hi: u64,
    pub mode: SweepMode,
    pub threads: usize,
    pub force: bool,
}

/// Outcome of one algorithm on one case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgoOutcome {
    pub h: String,
    pub l: String,
    /// `RN(h + l)`.
    pub rounded: String,
    pub faithful: bool,
    pub correctly_rounded: bool,
    /// Upper bound on `|RN(h + l) - xⁿ|` in ulps of the result.
    pub ulp_distance: f64,
    /// `|h + l - xⁿ| / xⁿ`.
    pub alpha: f64,
    pub alpha_bound: Option<f64>,
    pub within_bound: bool,
    pub ops: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseResult {
    pub index: u64,
    pub x: String,
    pub n: u64,
    pub position: Position,
    pub log: AlgoOutcome,
    pub lin: Option<AlgoOutcome>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AlgoSummary {
    pub cases: u64,
    pub faithful: u64,
    pub correctly_rounded: u64,
    /// Unfaithful results with `n` at most the faithful limit.
    pub unfaithful_within_limit: u64,
    pub bound_violations: u64,
    pub max_ulp_distance: f64,
    pub max_alpha: f64,
    /// Largest `alpha / alpha_bound`.
    pub max_alpha_ratio: f64,
}

impl AlgoSummary {
    fn add(&mut self, o: &AlgoOutcome, n: u64, faithful_limit: u128) {
        self.cases += 1;
        self.faithful += u64::from(o.faithful);
        self.correctly_rounded += u64::from(o.correctly_rounded);
        if !o.faithful && (n as u128) <= faithful_limit {
            self.unfaithful_within_limit += 1;
        }
        self.bound_violations += u64::from(!o.within_bound);
        self.max_ulp_distance = self.max_ulp_distance.max(o.ulp_distance);
        self.max_alpha = self.max_alpha.max(o.alpha);
        if let Some(b) = o.alpha_bound {
            self.max_alpha_ratio = self.max_alpha_ratio.max(o.alpha / b);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub p: u32,
    pub n_lo: u64,
    pub n_hi: u64,
    pub mode: SweepMode,
    pub cases: u64,
    pub faithful_limit: u128,
    pub log: AlgoSummary,
    pub lin: AlgoSummary,
    /// Cases where LinPower was not run (`n > LINPOWER_MAX_N`).
    pub lin_skipped: u64,
}

impl SweepSummary {
    /// LogPower stayed within its bound everywhere and was faithful
    /// wherever the bound guarantees it. LinPower's bound rests on an
    /// unproven hypothesis, so its violations are reported but not fatal.
    pub fn passed(&self) -> bool {
        self.log.bound_violations == 0 && self.log.unfaithful_within_limit == 0
    }

    /// Recompute the summary from per-case results.
    pub fn from_cases(config: &VerifyConfig, faithful_limit: u128, cases: &[CaseResult]) -> Self {
        let mut s = SweepSummary {
            p: config.p.bits(),
            n_lo: config.n_lo,
            n_hi: config.n_hi,
            mode: config.mode,
            cases: cases.len() as u64,
            faithful_limit,
            log: AlgoSummary::default(),
            lin: AlgoSummary::default(),
            lin_skipped: 0,
        };
        for c in cases {
            s.log.add(&c.log, c.n, faithful_limit);
            match &c.lin {
                Some(o) => s.lin.add(o, c.n, faithful_limit),
                None => s.lin_skipped += 1,
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub cases: Vec<CaseResult>,
    pub summary: SweepSummary,
}

/// Number of cases the configuration describes.
pub fn case_count(config: &VerifyConfig) -> u64 {
    match config.mode {
        SweepMode::Exhaustive => {
            (1u64 << (config.p.bits() - 1)).saturating_mul(config.n_hi - config.n_lo + 1)
        }
        SweepMode::Sample { count, .. } => count,
    }
}

fn check_config(config: &VerifyConfig) -> Result<(), SweepError> {
    if config.n_lo < 1 {
        return Err(SweepError::ExponentTooSmall);
    }
    if config.n_lo > config.n_hi {
        return Err(SweepError::EmptyRange {
            lo: config.n_lo,
            hi: config.n_hi,
        });
    }
    if config.mode == SweepMode::Exhaustive && !config.force {
        let cases = case_count(config);
        if config.p.bits() > MAX_EXHAUSTIVE_PRECISION || cases > MAX_EXHAUSTIVE_CASES {
            return Err(SweepError::TooLarge {
                p: config.p.bits(),
                cases,
                max_p: MAX_EXHAUSTIVE_PRECISION,
                max_cases: MAX_EXHAUSTIVE_CASES,
            });
        }
    }
    Ok(())
}

/// The `(x, n)` pairs of a sweep, in output order. `x` ranges over
/// significands in `[1, 2)`.
pub fn cases(config: &VerifyConfig) -> Result<Vec<(FpNumber, u64)>, SweepError> {
    check_config(config)?;
    let p = config.p;
    let lo = 1u64 << (p.bits() - 1);
    let hi = (1u64 << p.bits()) - 1;
    let fp = |m: u64| FpNumber::from_parts(false, m, 0, p).expect("normalized significand");
    Ok(match config.mode {
        SweepMode::Exhaustive => (config.n_lo..=config.n_hi)
            .flat_map(|n| (lo..=hi).map(move |m| (fp(m), n)))
            .collect(),
        SweepMode::Sample { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| {
                    let m = rng.gen_range(lo..=hi);
                    let n = rng.gen_range(config.n_lo..=config.n_hi);
                    (fp(m), n)
                })
                .collect()
        }
    })
}

fn outcome(
    pair: DoubleWord,
    ops: u64,
    reference: &PowReference,
    bound: Option<&ErrorBound>,
) -> Result<AlgoOutcome, SweepError> {
    let approx = pair.to_exact();
    let rounded = softfloat::add(&pair.hi, &pair.lo, RoundingMode::NearestEven);
    let class = &reference.classification;
    let within_bound = match bound {
        Some(b) => reference.relative_error_within(&approx, b.upper()),
        None => reference.is_exact_value() && approx == reference.lower,
    };
    Ok(AlgoOutcome {
        h: pair.hi.to_binary_string(),
        l: pair.lo.to_binary_string(),
        rounded: rounded.to_binary_string(),
        faithful: class.is_faithful(&rounded),
        correctly_rounded: rounded == class.nearest(),
        ulp_distance: reference.ulp_distance_bound(&rounded)?.to_f64(),
        alpha: reference.relative_error_f64(&approx),
        alpha_bound: bound.map(ErrorBound::to_f64),
        within_bound,
        ops,
    })
}

fn log_bound(n: u64, p: Precision) -> Result<Option<ErrorBound>, SweepError> {
    Ok(if n >= 2 {
        Some(bounds::logpower_alpha_max(n as u128, p)?)
    } else {
        None
    })
}

fn lin_bound(n: u64, p: Precision) -> Result<Option<ErrorBound>, SweepError> {
    Ok(if n >= 3 {
        // the closed form costs one power instead of n - 3 products
        let g = bounds::linpower_gamma_closed_form(n, p)?;
        Some(ErrorBound::exact(g.mul_pow2(1 - 2 * p.bits() as i64)))
    } else {
        None
    })
}

/// LogPower and LinPower bounds for every exponent that occurs in a sweep.
struct BoundCache {
    bounds: HashMap<u64, (Option<ErrorBound>, Option<ErrorBound>)>,
}

impl BoundCache {
    fn new(inputs: &[(FpNumber, u64)], p: Precision) -> Result<Self, SweepError> {
        let ns: BTreeSet<u64> = inputs.iter().map(|&(_, n)| n).collect();
        let bounds = ns
            .into_par_iter()
            .map(|n| {
                let lin = if n <= LINPOWER_MAX_N { lin_bound(n, p)? } else { None };
                Ok((n, (log_bound(n, p)?, lin)))
            })
            .collect::<Result<_, SweepError>>()?;
        Ok(BoundCache { bounds })
    }
}

fn run_case(
    index: u64,
    x: FpNumber,
    n: u64,
    p: Precision,
    cache: &BoundCache,
) -> Result<CaseResult, SweepError> {
    let reference = oracle::pow_reference(&x, n, p)?;
    let (log_b, lin_b) = &cache.bounds[&n];
    let mut ev = Evaluator::new();
    let pair = powers::power_with(&mut ev, Algorithm::Log, &x, n).expect("validated input");
    let log = outcome(pair, ev.ops(), &reference, log_b.as_ref())?;
    let lin = if n <= LINPOWER_MAX_N {
        let mut ev = Evaluator::new();
        let pair = powers::power_with(&mut ev, Algorithm::Linear, &x, n).expect("validated input");
        Some(outcome(pair, ev.ops(), &reference, lin_b.as_ref())?)
    } else {
        None
    };
    Ok(CaseResult {
        index,
        x: oracle::significand_bits(&x),
        n,
        position: reference.classification.position,
        log,
        lin,
    })
}

/// Run a verification sweep on a pool of `config.threads` workers.
pub fn verify(config: &VerifyConfig) -> Result<SweepReport, SweepError> {
    let inputs = cases(config)?;
    let faithful_limit = bounds::faithful_limit(config.p, config.p)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.max(1))
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    let p = config.p;
    let results: Vec<CaseResult> = pool.install(|| {
        let cache = BoundCache::new(&inputs, p)?;
        inputs
            .par_iter()
            .enumerate()
            .map(|(i, &(x, n))| run_case(i as u64, x, n, p, &cache))
            .collect::<Result<_, _>>()
    })?;
    let summary = SweepSummary::from_cases(config, faithful_limit, &results);
    Ok(SweepReport {
        cases: results,
        summary,
    })
}

/// Worst-case searches for each `n` in a range, on a pool of `threads`
/// workers.
pub fn worst_cases(
    p: Precision,
    n_lo: u64,
    n_hi: u64,
    threads: usize,
) -> Result<Vec<oracle::WorstCaseSearch>, SweepError> {
    if n_lo < 1 {
        return Err(SweepError::ExponentTooSmall);
    }
    if n_lo > n_hi {
        return Err(SweepError::EmptyRange { lo: n_lo, hi: n_hi });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    pool.install(|| {
        (n_lo..=n_hi)
            .map(|n| oracle::search_worst_cases(p, n).map_err(SweepError::from))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(bits: u32, n_lo: u64, n_hi: u64, mode: SweepMode, threads: usize) -> VerifyConfig {
        VerifyConfig {
            p: Precision::new(bits).unwrap(),
            n_lo,
            n_hi,
            mode,
            threads,
            force: false,
        }
    }

    #[test]
    fn small_exhaustive_sweep() {
        let r = verify(&config(7, 1, 12, SweepMode::Exhaustive, 2)).unwrap();
        assert_eq!(r.summary.cases, 64 * 12);
        assert!(r.summary.passed(), "{:?}", r.summary);
        assert_eq!(r.summary.lin_skipped, 0);
        let n1 = r.cases.iter().filter(|c| c.n == 1);
        assert!(n1.clone().all(|c| c.position == Position::Exact && c.log.correctly_rounded));
        assert_eq!(n1.count(), 64);
        assert_eq!(SweepSummary::from_cases(&config(7, 1, 12, SweepMode::Exhaustive, 1), r.summary.faithful_limit, &r.cases), r.summary);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let mode = SweepMode::Sample { count: 300, seed: 7 };
        let a = verify(&config(24, 3, 5000, mode, 1)).unwrap();
        let b = verify(&config(24, 3, 5000, mode, 3)).unwrap();
        assert_eq!(a, b);
        assert!(a.summary.lin_skipped > 0);
        let c = verify(&config(24, 3, 5000, SweepMode::Sample { count: 300, seed: 8 }, 1)).unwrap();
        assert_ne!(a.cases, c.cases);
    }

    #[test]
    fn guards() {
        let e = cases(&config(24, 3, 20, SweepMode::Exhaustive, 1)).unwrap_err();
        assert!(matches!(e, SweepError::TooLarge { p: 24, .. }), "{e}");
        let mut forced = config(12, 3, 3, SweepMode::Exhaustive, 1);
        forced.force = true;
        assert_eq!(cases(&forced).unwrap().len(), 2048);
        assert!(matches!(cases(&config(11, 5, 3, SweepMode::Exhaustive, 1)), Err(SweepError::EmptyRange { .. })));
        assert!(matches!(cases(&config(11, 0, 3, SweepMode::Exhaustive, 1)), Err(SweepError::ExponentTooSmall)));
    }
}
