//! Command-line front end: `estimate`, `verify`, `classify` and `sweep`.
//!
//! Exit codes: `0` on success, `2` when the regime has no finite value to
//! report (`NotEmbedded`, `OpenCase`, `Unsupported`), `1` on any error or a
//! failed verification.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
pub mod config;

pub use commands::{verify_with, Estimator, VerifyReport};
pub use config::ProblemConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NO_VALUE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "morrey-embed", version, about = "Embedding constants between weighted local Morrey-type spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the two-sided estimate of the embedding constant.
    Estimate(Common),
    /// Compare the estimate with an oracle lower bound from test functions.
    Verify {
        #[command(flatten)]
        common: Common,
        /// FAIL when the oracle lower bound exceeds `slack` times the
        /// estimate.
        #[arg(long, default_value_t = 8.0)]
        slack: f64,
    },
    /// Print the regime tag of the exponents.
    Classify(Common),
    /// Evaluate along one axis and write CSV.
    ///
    /// Columns: axis, value, regime, estimate, oracle_lower_bound, error.
    /// Empty cells mean "not computed"; infinite values are written `inf`.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: SweepRange,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON problem file.
    #[arg(long)]
    pub config: PathBuf,
    /// Machine-readable output.
    #[arg(long)]
    pub json: bool,
    /// Seed of the oracle search.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Evaluate even when a hypothesis check fails.
    #[arg(long)]
    pub force: bool,
    /// Relative quadrature tolerance.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Multiplier on the default oracle budget. `estimate` and `sweep` run
    /// the oracle only when a budget is given.
    #[arg(long)]
    pub oracle_budget: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepRange {
    #[arg(long, value_enum)]
    pub axis: Axis,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    /// Number of intervals; `0` evaluates `from` only.
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
}

/// Sweep axis: an exponent, or a scale factor applied to a weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    P1,
    P2,
    Th1,
    Th2,
    Omega1,
    Omega2,
    V1,
    V2,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::P1 => "p1",
            Axis::P2 => "p2",
            Axis::Th1 => "th1",
            Axis::Th2 => "th2",
            Axis::Omega1 => "omega1",
            Axis::Omega2 => "omega2",
            Axis::V1 => "v1",
            Axis::V2 => "v2",
        }
    }
}

/// Runs a parsed command line, writing results to `out` and diagnostics to
/// `err`, and returns the exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let dispatch = || match &cli.command {
        Command::Estimate(c) => commands::estimate(c, out),
        Command::Verify { common, slack } => {
            commands::verify(common, *slack, &morrey_embed::estimators::estimate_with, out)
        }
        Command::Classify(c) => commands::classify(c, out),
        Command::Sweep { common, range } => commands::sweep(common, range, out),
    };
    // A panic is still an error as far as the exit code goes.
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(dispatch))
        .unwrap_or_else(|_| Err("internal error".into()));
    match result {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

/// Parses `args` (program name first) and runs them.
pub fn run_args<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, out, err),
        Err(e) => match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                let _ = write!(out, "{e}");
                EXIT_OK
            }
            _ => {
                let _ = write!(err, "{e}");
                EXIT_ERROR
            }
        },
    }
}
