use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Accurate and correctly rounded integer powers on a soft-float core.
#[derive(Debug, Parser)]
#[command(name = "accpow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate x^n with LogPower and round once to the target precision.
    Pow(PowArgs),
    /// Print the error-bound tables.
    Tables(TablesArgs),
    /// Sweep inputs and check results against the exact oracle and bounds.
    Verify(VerifyArgs),
    /// Exhaustive search for the hardest-to-round x.
    Worstcase(WorstcaseArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Text => "text",
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Alg {
    Logpower,
    Linpower,
}

#[derive(Debug, Args)]
struct PowArgs {
    /// Base: binary significand (1.0101…), 0b-prefixed binary, or decimal.
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    #[arg(long)]
    n: u64,
    /// Working precision of LogPower.
    #[arg(long, env = "ACCPOW_WORK_P", default_value_t = 64)]
    work: u32,
    /// Precision of the result (and of x).
    #[arg(long, env = "ACCPOW_TARGET_P", default_value_t = 53)]
    target: u32,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Args)]
struct TablesArgs {
    #[arg(long, env = "ACCPOW_P", default_value_t = 53)]
    p: u32,
    #[arg(long, value_enum)]
    alg: Alg,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Compare with the published table; exit 1 on any mismatch.
    #[arg(long)]
    diff: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, env = "ACCPOW_P", default_value_t = 53)]
    p: u32,
    /// Exponent or inclusive range, e.g. 51 or 3..100.
    #[arg(long)]
    n: String,
    /// Every significand in [1, 2).
    #[arg(long, conflicts_with = "sample")]
    exhaustive: bool,
    /// Number of random (x, n) pairs.
    #[arg(long, required_unless_present = "exhaustive")]
    sample: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores). Does not affect the output.
    #[arg(long)]
    threads: Option<usize>,
    /// Lift the exhaustive size guard.
    #[arg(long)]
    force: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Args)]
struct WorstcaseArgs {
    #[arg(long, env = "ACCPOW_P", default_value_t = 53)]
    p: u32,
    /// Exponent or inclusive range, e.g. 51 or 3..10.
    #[arg(long)]
    n: String,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Pow(a) => commands::pow(&a),
        Command::Tables(a) => commands::tables(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Worstcase(a) => commands::worstcase(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
