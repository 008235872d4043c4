//! `regplan`: plan regression runs from a test suite, a viability tree and
//! defect history.
//!
//! Exit codes: 0 success, 1 domain failure (unclassifiable tests),
//! 2 validation or parse failure, 3 I/O failure.

mod commands;
mod failure;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use regplan_core::plan::{FractionBasis, Policy};
use regplan_core::rational::Rational;
use regplan_core::report::OutputFormat;

#[derive(Parser, Debug)]
#[command(name = "regplan", version, about = "Risk- and automation-aware regression test planning")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write the command's primary output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Suppress stdout reports and warnings (files are still written).
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Ignore unknown keys in suite documents instead of rejecting them.
    #[arg(long, global = true)]
    pub lenient: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Table => OutputFormat::Table,
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a decision tree and/or a suite document.
    Validate {
        /// Tree file, or `default` for the built-in tree.
        #[arg(long)]
        tree: Option<String>,
        #[arg(long)]
        suite: Option<PathBuf>,
    },
    /// Classify each active test as automate or manual.
    Classify {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long, default_value = "default")]
        tree: String,
        /// Show the answered path with question texts.
        #[arg(long)]
        explain: bool,
    },
    /// Risk exposure table, optionally with a top-fraction selection.
    Score {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        fraction: Option<Rational>,
        #[arg(long)]
        exclude_zero_risk: bool,
        /// JSON object mapping test id to a fixed probability band 0..5.
        #[arg(long)]
        probabilities: Option<PathBuf>,
        /// Score only these test ids (comma separated).
        #[arg(long, value_delimiter = ',')]
        restrict: Option<Vec<String>>,
        /// Band probabilities over the whole active suite instead of the scored tests.
        #[arg(long)]
        bin_over_suite: bool,
    },
    /// Build a plan for one policy.
    Plan {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long, default_value = "default")]
        tree: String,
        #[arg(long, value_parser = parse_policy)]
        policy: Policy,
        #[command(flatten)]
        selection: SelectionArgs,
    },
    /// Run policies over a multi-version scenario and compare them.
    Simulate {
        /// Scenario file, or `reference` for the built-in scenario.
        #[arg(long, default_value = "reference")]
        scenario: String,
        /// Policies to run (comma separated); all when omitted.
        #[arg(long, value_delimiter = ',', value_parser = parse_policy)]
        policies: Option<Vec<Policy>>,
        /// Record this seed in the report instead of the scenario's own.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Append defect records found in one version; writes a new suite to --out.
    Ingest {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        version: String,
        /// JSON list of {"test", "id", "severity"} records.
        #[arg(long)]
        records: PathBuf,
    },
    /// Emit a seeded synthetic scenario document.
    GenerateScenario {
        #[arg(long, default_value_t = 20)]
        tests: usize,
        #[arg(long, default_value_t = 3)]
        versions: usize,
        #[arg(long, default_value = "0.2")]
        fault_rate: Rational,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug, Clone)]
pub struct SelectionArgs {
    #[arg(long, default_value = "0.7")]
    pub fraction: Rational,
    #[arg(long, default_value = "pool", value_parser = parse_basis)]
    pub fraction_basis: FractionBasis,
    #[arg(long)]
    pub exclude_zero_risk: bool,
    #[arg(long)]
    pub bin_over_suite: bool,
}

fn parse_policy(s: &str) -> Result<Policy, String> {
    s.parse().map_err(|e: regplan_core::plan::UnknownPolicy| e.to_string())
}

fn parse_basis(s: &str) -> Result<FractionBasis, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
