//! `horizonlab`: horizon tables, value enclosures, limit scans,
//! counterexample constructions and the example corpus.

mod commands;
mod output;
mod spec;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use output::{Format, Sink};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Core(#[from] horizonlab::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Process exit statuses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    VerifyFailed = 1,
    BadInput = 2,
    Inconclusive = 3,
    Oscillating = 4,
    LimitsInconclusive = 5,
    PremiseViolated = 6,
}

impl CliError {
    fn status(&self) -> Status {
        match self {
            CliError::Core(horizonlab::Error::PremiseViolated(_)) => Status::PremiseViolated,
            CliError::Core(horizonlab::Error::Inconclusive { .. }) => Status::Inconclusive,
            _ => Status::BadInput,
        }
    }
}

#[derive(Parser)]
#[command(name = "horizonlab", version, about = "Average and discounted values of reward sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write results here instead of stdout (for `construct`: the reward JSON).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// γ_k, Γ_k, effective and quasi horizon, and kγ_k/Γ_k per discount.
    Table(TableArgs),
    /// U_{1m}, U_{km} and V_{kγ} at given indices.
    Eval(EvalArgs),
    /// liminf/limsup estimates of U or V along a schedule.
    Limits(LimitsArgs),
    /// Counterexample rewards for a discount.
    Construct(ConstructArgs),
    /// Golden checks for the worked examples.
    Verify(VerifyArgs),
}

#[derive(Args)]
pub struct TableArgs {
    /// Discount spec; repeatable. Defaults to the standard families.
    #[arg(long = "discount")]
    pub discounts: Vec<String>,
    /// Indices, comma separated.
    #[arg(long = "k", value_delimiter = ',', default_values_t = [1u64, 10, 100, 1000])]
    pub ks: Vec<u64>,
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub reward: String,
    #[arg(long)]
    pub discount: Option<String>,
    /// U_{1m} for each m.
    #[arg(long, value_delimiter = ',')]
    pub u_to: Vec<u64>,
    /// Window start for U_{km}; needs --m.
    #[arg(long, requires = "m")]
    pub k: Option<u64>,
    /// Window end for U_{km}.
    #[arg(long, requires = "k")]
    pub m: Option<u64>,
    /// V_{kγ} for each k; needs --discount.
    #[arg(long, value_delimiter = ',', requires = "discount")]
    pub v_at: Vec<u64>,
    #[arg(long, default_value_t = horizonlab::value::DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QuantityArg {
    U,
    V,
    Both,
}

#[derive(Args)]
pub struct LimitsArgs {
    #[arg(long)]
    pub reward: String,
    #[arg(long)]
    pub discount: Option<String>,
    /// Defaults to V with a discount and U without.
    #[arg(long, value_enum)]
    pub quantity: Option<QuantityArg>,
    #[arg(long, default_value = "dyadic:20")]
    pub schedule: String,
    /// Band width deciding the verdict.
    #[arg(long, default_value_t = horizonlab::value::DEFAULT_TOL)]
    pub tol: f64,
    /// Per-value enclosure tolerance; defaults to tol/4.
    #[arg(long)]
    pub value_tol: Option<f64>,
}

#[derive(Args)]
pub struct ConstructArgs {
    /// 1: U converges but V does not; 2: V converges but U does not.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub prop: u8,
    #[arg(long)]
    pub discount: String,
    /// Number of runs to place.
    #[arg(long, default_value_t = 5)]
    pub n: u64,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=6), required_unless_present = "all")]
    pub example: Option<u8>,
    /// Every example plus the randomized identity suites.
    #[arg(long)]
    pub all: bool,
    #[arg(long, default_value_t = verify::DEFAULT_SEED)]
    pub seed: u64,
}

fn run(cli: Cli) -> Result<Status, CliError> {
    let sink = Sink { out: cli.out };
    let guards = spec::guards_from_env()?;
    match cli.command {
        Command::Table(a) => commands::table(&a, cli.format, &sink, &guards),
        Command::Eval(a) => commands::eval(&a, cli.format, &sink, &guards),
        Command::Limits(a) => commands::limits(&a, cli.format, &sink, &guards),
        Command::Construct(a) => commands::construct(&a, cli.format, &sink, &guards),
        Command::Verify(a) => verify::run(&a, cli.format, &sink),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = run(cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.status()
    });
    ExitCode::from(status as u8)
}
