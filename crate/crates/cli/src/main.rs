//! `geometa`: config-driven experiments over the `geometa` library.
//!
//! Exit codes: 0 success, 1 validation error, 2 runtime error, 3 a check
//! failed.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Failure {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Runtime(_) => 2,
            Failure::CheckFailed(_) => 3,
        }
    }
}

impl From<geometa::Error> for Failure {
    fn from(e: geometa::Error) -> Self {
        use geometa::Error as E;
        match e {
            E::Parameter { .. }
            | E::InvalidPoint(_)
            | E::InvalidSpace(_)
            | E::DimensionMismatch { .. }
            | E::Syntax { .. }
            | E::UnboundVariable { .. }
            | E::UnknownSymbol(_)
            | E::EmptySample
            | E::Precondition(_) => Failure::Validation(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "geometa",
    version,
    about = "Fixed-point iteration and metastability experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mann iteration trace as CSV.
    Iterate(Common),
    /// Condition and axiom checkers, one CSV row each.
    Check(Common),
    /// Metastability witnesses of one trace (or of a family).
    Metastab(Common),
    /// Greedy nets and the beta profile.
    Net(Common),
    /// Evaluate a formula over the configured structure.
    EvalFormula(EvalArgs),
    /// Uniform metastability bound over a generated family.
    Family(Common),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    cap: Option<usize>,
    /// Comma-separated epsilons.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long = "F")]
    f: Option<String>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    common: Common,
    /// Formula file (`#` starts a comment).
    #[arg(long, conflicts_with = "builtin")]
    formula: Option<PathBuf>,
    /// Built-in formula, e.g. `condition_E(3)`.
    #[arg(long)]
    builtin: Option<String>,
    /// Free-variable binding `name=c1,c2,...`; repeatable.
    #[arg(long = "bind")]
    bindings: Vec<String>,
}

fn threads() -> Result<Option<usize>, Failure> {
    match std::env::var("GEOMETA_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Validation(format!(
                "GEOMETA_THREADS: `{v}` is not a positive integer"
            ))),
        },
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = threads()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Runtime(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Iterate(c) => commands::iterate(&c),
        Command::Check(c) => commands::check(&c),
        Command::Metastab(c) => commands::metastab(&c),
        Command::Net(c) => commands::net(&c),
        Command::EvalFormula(a) => commands::eval_formula(&a),
        Command::Family(c) => commands::family(&c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("geometa: {e}");
            ExitCode::from(e.code())
        }
    }
}
