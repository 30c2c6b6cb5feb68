use std::error::Error;
use std::fmt::Write as _;
use std::io::Write as _;
use std::process::ExitCode;

use accpow::bounds::{self, TableKind};
use accpow::fixtures;
use accpow::oracle::{self, Position, WorstCaseSearch};
use accpow::powers::{pow_correctly_rounded, PowerRequest};
use accpow::softfloat::{parse_literal, Precision, RoundingMode};
use accpow::sweep::{self, CaseResult, SweepMode, VerifyConfig};
use serde_json::json;

use crate::{Alg, Format, PowArgs, TablesArgs, VerifyArgs, WorstcaseArgs};

type CmdResult = Result<ExitCode, Box<dyn Error>>;

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Parse `a`, `a..b` or `a..=b` (both ends inclusive).
pub fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let bad = || format!("invalid exponent range {s:?} (expected N, A..B or A..=B)");
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (s, s),
    };
    let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
    if lo < 1 {
        return Err("n must be >= 1".into());
    }
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn range_label(lo: u64, hi: u64) -> String {
    if lo == hi {
        lo.to_string()
    } else {
        format!("{lo}..{hi}")
    }
}

fn precision(bits: u32) -> Result<Precision, Box<dyn Error>> {
    Ok(Precision::new(bits)?)
}

fn threads(requested: Option<usize>) -> usize {
    requested
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1)
}

/// Configuration header: a comment line for text and CSV, a JSON object
/// for JSON lines. The worker count is left out (it does not change the
/// output) and goes to stderr instead.
fn header(format: Format, command: &str, fields: &[(&str, String)]) -> String {
    match format {
        Format::Json => {
            let mut cfg = serde_json::Map::new();
            cfg.insert("tool".into(), json!(format!("accpow {VERSION}")));
            cfg.insert("command".into(), json!(command));
            for (k, v) in fields {
                cfg.insert((*k).into(), json!(v));
            }
            cfg.insert("format".into(), json!(format.name()));
            format!("{}\n", json!({ "config": cfg }))
        }
        Format::Text | Format::Csv => {
            let mut line = format!("# accpow {VERSION} {command}");
            for (k, v) in fields {
                let _ = write!(line, " {k}={v}");
            }
            let _ = write!(line, " format={}", format.name());
            line.push('\n');
            line
        }
    }
}

/// Write to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(out: &str) -> Result<(), Box<dyn Error>> {
    let mut stdout = std::io::stdout().lock();
    match stdout.write_all(out.as_bytes()).and_then(|()| stdout.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn position_name(p: Position) -> &'static str {
    match p {
        Position::Exact => "exact",
        Position::BelowMid => "below_mid",
        Position::AtMid => "at_mid",
        Position::AboveMid => "above_mid",
    }
}

pub fn pow(a: &PowArgs) -> CmdResult {
    if a.format == Format::Csv {
        return Err("pow supports --format text or json".into());
    }
    let work = precision(a.work)?;
    let target = precision(a.target)?;
    if a.n < 1 {
        return Err("n must be >= 1".into());
    }
    let literal = parse_literal(&a.x)?;
    let (x, x_exact) = literal.to_fp(target, RoundingMode::NearestEven);
    if x.is_zero() {
        return Err("x must be nonzero".into());
    }
    let req = PowerRequest {
        x,
        n: a.n,
        work_precision: work,
        target_precision: target,
    };
    let res = pow_correctly_rounded(&req)?;
    let reference = oracle::pow_reference(&x, a.n, target)?;
    // the oracle describes |x|^n; rounding to nearest is symmetric
    let magnitude = res.value.abs();
    let class = &reference.classification;
    let faithful = class.is_faithful(&magnitude);
    let correct = magnitude == class.nearest();
    let ulp = reference.ulp_distance_bound(&magnitude)?;
    let ulp_text = format!(
        "{}{}",
        if reference.is_exact_value() { "" } else { "<= " },
        ulp.to_decimal_string(24)
    );
    let exact_text = if reference.is_exact_value() {
        reference.lower.to_decimal_string(40)
    } else {
        format!("in [{}, {}]", reference.lower.to_decimal_string(40), reference.upper.to_decimal_string(40))
    };
    let x_note = if x_exact {
        "exact".to_string()
    } else {
        format!("literal rounded to nearest at p={}", target.bits())
    };
    let fields = [
        ("x", a.x.clone()),
        ("n", a.n.to_string()),
        ("work", work.bits().to_string()),
        ("target", target.bits().to_string()),
    ];
    let mut out = header(a.format, "pow", &fields);
    match a.format {
        Format::Json => {
            let v = json!({
                "x": x.to_binary_string(),
                "x_exact": x_exact,
                "n": a.n,
                "result": res.value.to_binary_string(),
                "result_decimal": res.value.to_exact().to_decimal_string(40),
                "h": res.pair.hi.to_binary_string(),
                "l": res.pair.lo.to_binary_string(),
                "ops": res.ops,
                "exact_value": exact_text,
                "position": position_name(class.position),
                "ulp_distance": ulp_text,
                "faithful": faithful,
                "correctly_rounded": correct,
            });
            out.push_str(&format!("{v}\n"));
        }
        _ => {
            let rows = [
                ("x", format!("{} ({x_note})", x.to_binary_string())),
                ("result", res.value.to_binary_string()),
                ("decimal", res.value.to_exact().to_decimal_string(40)),
                ("h", res.pair.hi.to_binary_string()),
                ("l", res.pair.lo.to_binary_string()),
                ("ops", res.ops.to_string()),
                ("exact x^n", exact_text),
                ("position", position_name(class.position).to_string()),
                ("ulp distance", ulp_text),
                ("faithful", faithful.to_string()),
                ("correctly_rounded", correct.to_string()),
            ];
            for (k, v) in rows {
                out.push_str(&format!("{k:<18} {v}\n"));
            }
        }
    }
    emit(&out)?;
    Ok(ExitCode::SUCCESS)
}

pub fn tables(a: &TablesArgs) -> CmdResult {
    let p = precision(a.p)?;
    let kind = match a.alg {
        Alg::Logpower => TableKind::LogPower,
        Alg::Linpower => TableKind::LinPower,
    };
    let rows = bounds::make_tables(p, kind)?;
    let fields = [
        ("p", a.p.to_string()),
        ("alg", kind.name().to_string()),
        ("diff", a.diff.to_string()),
    ];
    let mut out = header(a.format, "tables", &fields);
    if a.diff {
        let published = fixtures::published_table(a.p, kind)
            .ok_or_else(|| format!("no published {} table at p={}", kind.name(), a.p))?;
        let mut mismatches = 0;
        match a.format {
            Format::Csv => out.push_str("n,computed,published,status\n"),
            Format::Text => out.push_str(&format!("{:>12}  {:>8}  {:>9}  status\n", "n", "computed", "published")),
            Format::Json => {}
        }
        for (row, pubd) in rows.iter().zip(&published) {
            let ok = row.n == pubd.n && row.neg_log2.matches(&pubd.neg_log2);
            mismatches += usize::from(!ok);
            let status = if ok { "ok" } else { "MISMATCH" };
            let line = match a.format {
                Format::Json => json!({
                    "n": row.n,
                    "computed": row.neg_log2.truncated(),
                    "computed_rounded": row.neg_log2.rounded(),
                    "published": pubd.neg_log2,
                    "ok": ok,
                })
                .to_string(),
                Format::Csv => format!("{},{},{},{status}", row.n, row.neg_log2, pubd.neg_log2),
                Format::Text => format!(
                    "{:>12}  {:>8}  {:>9}  {status}",
                    bounds::n_label(row.n),
                    row.neg_log2.to_string(),
                    pubd.neg_log2
                ),
            };
            out.push_str(&line);
            out.push('\n');
        }
        if rows.len() != published.len() {
            mismatches += 1;
        }
        emit(&out)?;
        if mismatches > 0 {
            eprintln!("{mismatches} mismatch(es) against the published table");
            return Ok(ExitCode::from(1));
        }
        return Ok(ExitCode::SUCCESS);
    }
    match a.format {
        Format::Csv => out.push_str(&bounds::render_csv(&rows)),
        Format::Text => out.push_str(&bounds::render_text(&rows)),
        Format::Json => {
            for r in &rows {
                out.push_str(&format!("{}\n", json!({"n": r.n, "neg_log2": r.neg_log2.to_string()})));
            }
        }
    }
    emit(&out)?;
    Ok(ExitCode::SUCCESS)
}

fn case_csv(c: &CaseResult) -> String {
    let mut line = format!("{},{},{},{}", c.index, c.x, c.n, position_name(c.position));
    for o in [Some(&c.log), c.lin.as_ref()] {
        match o {
            Some(o) => {
                let _ = write!(
                    line,
                    ",{},{},{},{:e},{:e},{}",
                    o.rounded, o.faithful, o.correctly_rounded, o.ulp_distance, o.alpha, o.within_bound
                );
            }
            None => line.push_str(",,,,,,"),
        }
    }
    line
}

pub fn verify(a: &VerifyArgs) -> CmdResult {
    let p = precision(a.p)?;
    let (n_lo, n_hi) = parse_range(&a.n)?;
    let mode = match a.sample {
        Some(count) if !a.exhaustive => SweepMode::Sample { count, seed: a.seed },
        _ => SweepMode::Exhaustive,
    };
    let threads = threads(a.threads);
    let config = VerifyConfig {
        p,
        n_lo,
        n_hi,
        mode,
        threads,
        force: a.force,
    };
    let mut fields = vec![("p", a.p.to_string()), ("n", range_label(n_lo, n_hi))];
    match mode {
        SweepMode::Exhaustive => fields.push(("mode", "exhaustive".into())),
        SweepMode::Sample { count, seed } => {
            fields.push(("mode", "sample".into()));
            fields.push(("count", count.to_string()));
            fields.push(("seed", seed.to_string()));
        }
    }
    fields.push(("force", a.force.to_string()));
    eprintln!("threads: {threads}");
    let report = sweep::verify(&config)?;
    let s = &report.summary;
    let mut out = header(a.format, "verify", &fields);
    match a.format {
        Format::Json => {
            for c in &report.cases {
                out.push_str(&serde_json::to_string(c)?);
                out.push('\n');
            }
            out.push_str(&format!("{}\n", json!({ "summary": s, "passed": s.passed() })));
        }
        Format::Csv => {
            out.push_str(
                "index,x,n,position,log_rounded,log_faithful,log_correct,log_ulp,log_alpha,log_within_bound,\
                 lin_rounded,lin_faithful,lin_correct,lin_ulp,lin_alpha,lin_within_bound\n",
            );
            for c in &report.cases {
                out.push_str(&case_csv(c));
                out.push('\n');
            }
        }
        Format::Text => {
            let pct = |k: u64, n: u64| if n == 0 { 0.0 } else { 100.0 * k as f64 / n as f64 };
            let mut line = |k: &str, v: String| {
                let _ = writeln!(out, "{}", format!("{k:<26}{v}").trim_end());
            };
            line("cases", s.cases.to_string());
            line("faithful limit", format!("n <= {}", s.faithful_limit));
            for (name, alg) in [("logpower", &s.log), ("linpower", &s.lin)] {
                line(&format!("[{name}]"), String::new());
                line("  cases", alg.cases.to_string());
                line("  faithful", format!("{} ({:.4}%)", alg.faithful, pct(alg.faithful, alg.cases)));
                line(
                    "  correctly rounded",
                    format!("{} ({:.4}%)", alg.correctly_rounded, pct(alg.correctly_rounded, alg.cases)),
                );
                line("  unfaithful within limit", alg.unfaithful_within_limit.to_string());
                line("  bound violations", alg.bound_violations.to_string());
                line("  max ulp distance", format!("{:.9}", alg.max_ulp_distance));
                line("  max |alpha|", format!("{:e}", alg.max_alpha));
                line("  max |alpha| / bound", format!("{:.6}", alg.max_alpha_ratio));
            }
            if s.lin_skipped > 0 {
                line("linpower skipped", format!("{} (n > {})", s.lin_skipped, sweep::LINPOWER_MAX_N));
            }
            line("result", if s.passed() { "PASS" } else { "FAIL" }.to_string());
        }
    }
    emit(&out)?;
    Ok(if s.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn search_json(s: &WorstCaseSearch) -> serde_json::Value {
    json!({
        "p": s.p.bits(),
        "n": s.n,
        "candidates": s.candidates,
        "exact_cases": s.exact,
        "midpoint_cases": s.midpoints,
        "worst": s.worst,
    })
}

pub fn worstcase(a: &WorstcaseArgs) -> CmdResult {
    let p = precision(a.p)?;
    let (n_lo, n_hi) = parse_range(&a.n)?;
    let threads = threads(a.threads);
    let fields = [("p", a.p.to_string()), ("n", range_label(n_lo, n_hi))];
    eprintln!("threads: {threads}");
    let searches = sweep::worst_cases(p, n_lo, n_hi, threads)?;
    let mut out = header(a.format, "worstcase", &fields);
    match a.format {
        Format::Json => {
            for s in &searches {
                out.push_str(&format!("{}\n", search_json(s)));
            }
        }
        Format::Csv => {
            out.push_str("n,x,rounding_bit,run_len,next_bit,distance_exponent,exact_cases,midpoint_cases\n");
            for s in &searches {
                match &s.worst {
                    Some(w) => {
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{},{},{},{}",
                            s.n,
                            oracle::significand_bits(&w.x),
                            w.rounding_bit,
                            w.run_len,
                            w.next_bit,
                            w.distance_exponent,
                            s.exact,
                            s.midpoints
                        );
                    }
                    None => {
                        let _ = writeln!(out, "{},,,,,,{},{}", s.n, s.exact, s.midpoints);
                    }
                }
            }
        }
        Format::Text => {
            for s in &searches {
                match &s.worst {
                    Some(w) => {
                        let _ = writeln!(
                            out,
                            "n={:<5} x={}  r={} run={} next={}  |y-breakpoint| >= 2^-{}",
                            s.n,
                            oracle::significand_bits(&w.x),
                            w.rounding_bit,
                            w.run_len,
                            w.next_bit,
                            w.distance_exponent
                        );
                    }
                    None => {
                        let _ = writeln!(out, "n={:<5} every power is exact or a breakpoint", s.n);
                    }
                }
            }
        }
    }
    emit(&out)?;
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("51"), Ok((51, 51)));
        assert_eq!(parse_range("3..100"), Ok((3, 100)));
        assert_eq!(parse_range("3..=10"), Ok((3, 10)));
        assert!(parse_range("0..4").is_err());
        assert!(parse_range("9..4").is_err());
        assert!(parse_range("x").is_err());
    }
}
