mod commands;
mod num;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use num::{parse_count, parse_list, Counts};

/// Restricted Möbius sequences: generation, randomness battery, reference
/// tables and extreme-time experiments.
#[derive(Debug, Parser)]
#[command(name = "sqfree", version)]
pub struct Cli {
    /// Worker threads; 0 uses one per core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sieve a range of ordinals and write it as an MSF1 file.
    Gen(GenArgs),
    /// Run the test battery over an ensemble of blocks and emit JSONL.
    Battery(BatteryArgs),
    /// Emit a reference table as CSV.
    Tables(TablesArgs),
    /// Arcsine and max/min separation statistics over walk segments.
    Extremes(ExtremesArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// First ordinal.
    #[arg(long, default_value = "1", value_parser = parse_count)]
    pub start: u64,
    /// Number of ordinals.
    #[arg(long, value_parser = parse_count)]
    pub count: u64,
    #[arg(long, short)]
    pub out: PathBuf,
}

/// Where bits come from.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// Stored MSF1 sequence.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Sieve the ordinals on demand.
    #[arg(long)]
    pub sieve: bool,
    /// Seeded fair coin, for validating the statistics themselves.
    #[arg(long)]
    pub fair_coin: bool,
}

#[derive(Debug, Args)]
pub struct BatteryArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// First ordinal of the ensemble (defaults to the start of the input, or 1).
    #[arg(long, value_parser = parse_count)]
    pub start: Option<u64>,
    /// Ordinal bound the ensemble must stay below.
    #[arg(long, value_parser = parse_count)]
    pub end: Option<u64>,
    #[arg(long, default_value = "100", value_parser = parse_count)]
    pub blocks: u64,
    #[arg(long, default_value = "1e5", value_parser = parse_count)]
    pub block_len: u64,
    /// Fixed gap after every block.
    #[arg(long, default_value = "0", value_parser = parse_count, conflicts_with = "mean_gap")]
    pub gap: u64,
    /// Random gaps, uniform on [mean/2, 3 mean/2].
    #[arg(long, value_parser = parse_count)]
    pub mean_gap: Option<u64>,
    /// Comma-separated test names, or `all`.
    #[arg(long, default_value = "all")]
    pub tests: String,
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSONL output (stdout when omitted).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Table {
    Pi,
    Omega,
    Divisor,
    Residue,
    Tau,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    #[arg(long, value_enum)]
    pub which: Table,
    /// Comma-separated sizes (pi, omega) or the ordinal count (divisor).
    #[arg(long, value_parser = parse_list)]
    pub n: Option<Counts>,
    /// Primes for the divisor table.
    #[arg(long, default_value = "2,3,5,7,11,13,17", value_parser = parse_list)]
    pub primes: Counts,
    /// Prime modulus for the residue table.
    #[arg(long, default_value = "7", value_parser = parse_count)]
    pub q: u64,
    /// Upper bound for the residue table.
    #[arg(long = "X", visible_alias = "x", default_value = "5e7", value_parser = parse_count)]
    pub x: u64,
    /// Highest moment order for the tau table.
    #[arg(long, default_value_t = 10)]
    pub orders: u32,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtremesArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// First ordinal (defaults to the start of the input, or 1).
    #[arg(long, value_parser = parse_count)]
    pub start: Option<u64>,
    #[arg(long, default_value = "2e4", value_parser = parse_count)]
    pub segments: u64,
    /// Segment length.
    #[arg(long = "T", visible_alias = "t", default_value = "5e3", value_parser = parse_count)]
    pub t: u64,
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Per-segment CSV.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Directory for the histogram CSVs.
    #[arg(long)]
    pub fits: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
