//! `wehrl-lab`: entropies, moments, scans and cross-checks from the shell.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 numerical failure or a
//! verification deviation above contract, 3 a violation that survived grid
//! refinement.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "wehrl-lab",
    version,
    about = "Wehrl entropy and Husimi moments of spin-J states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Twice the spin, 2J (1..=25).
    #[arg(long, global = true, default_value_t = 2)]
    pub two_j: i32,
    /// Exponents, comma separated.
    #[arg(
        long = "p",
        global = true,
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    pub p: Vec<f64>,
    /// J = 1 orbit parameters (or Beta `a` values), comma separated.
    #[arg(
        long = "a",
        global = true,
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    pub a: Vec<f64>,
    #[arg(long, global = true, default_value_t = 64)]
    pub n_theta: usize,
    #[arg(long, global = true, default_value_t = 128)]
    pub n_phi: usize,
    /// Samples per scan, or restarts for `minimize`.
    #[arg(long, global = true)]
    pub count: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write here (atomically) instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classical entropy by both quadrature routes and, at J = 1, the closed form.
    Entropy {
        /// State file in the SpinState JSON format.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Moment integrals I_p with error estimates.
    Moment {
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Closed forms against quadrature for every basis state of one multiplet.
    BasisTable,
    /// Randomized or grid scan of an inequality.
    Scan {
        #[arg(long, value_enum)]
        kind: ScanKind,
        /// Beta `b` values; the diagonal a = b is scanned when omitted.
        #[arg(long = "b", value_delimiter = ',', allow_negative_numbers = true)]
        b: Vec<f64>,
        /// Margins below -tolerance are violations.
        #[arg(long, default_value_t = 1e-6, allow_negative_numbers = true)]
        tolerance: f64,
    },
    /// Cross-oracle checks with their deviation contracts.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Replace every contract by this bound.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Entropy minimization by simplex descent.
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanKind {
    Lieb,
    Beta,
    Generalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Identities,
    Hypothesis,
}

/// A failure with its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
    Violation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Violation(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) | Failure::Violation(m) => m,
        }
    }
}

impl From<wehrl_lab::Error> for Failure {
    fn from(e: wehrl_lab::Error) -> Self {
        match e {
            wehrl_lab::Error::NoConvergence(_) => Failure::Numerical(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("WEHRL_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
        Failure::Usage(format!(
            "WEHRL_LAB_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let common = &cli.common;
    commands::validate(common)?;
    let (rendered, verdict) = match &cli.command {
        Command::Entropy { state } => (commands::entropy(common, state.as_deref())?, Ok(())),
        Command::Moment { state } => (commands::moment(common, state.as_deref())?, Ok(())),
        Command::BasisTable => (commands::basis_table(common)?, Ok(())),
        Command::Scan { kind, b, tolerance } => commands::scan(common, *kind, b, *tolerance)?,
        Command::Verify { suite, tolerance } => commands::verify(common, *suite, *tolerance)?,
        Command::Minimize => (commands::minimize(common)?, Ok(())),
    };
    output::emit(common.output.as_deref(), &rendered)?;
    verdict
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
        Err(f) => {
            eprintln!("wehrl-lab: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
