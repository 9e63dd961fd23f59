use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Exit codes shared by every subcommand.
pub mod exit {
    pub const OK: u8 = 0;
    pub const CHECK_FAILED: u8 = 1;
    pub const PARSE: u8 = 2;
    pub const NUMERIC: u8 = 3;
    pub const NOT_DEGENERATE: u8 = 4;
    pub const NOT_CONVERGED: u8 = 5;
}

#[derive(Debug, Parser)]
#[command(
    name = "crossproj",
    version,
    about = "Projection onto the cross {(x, y) : <x, y> = 0}"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Project a point (x0, y0) onto the cross.
    Project {
        #[command(flatten)]
        input: PointArgs,
        #[command(flatten)]
        tols: TolArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// List members of the set-valued projection of a degenerate input.
    Family {
        #[command(flatten)]
        input: PointArgs,
        #[command(flatten)]
        tols: TolArgs,
        #[arg(long, default_value_t = 8)]
        count: usize,
        #[arg(long, value_enum, default_value_t = FamilyModeArg::Grid)]
        mode: FamilyModeArg,
    },
    /// Run the invariant suite on seeded random inputs.
    Check {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, env = "CROSSPROJ_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 256)]
        resolution: usize,
        #[command(flatten)]
        tols: TolArgs,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
    /// Run alternating projections or Douglas-Rachford on a feasibility instance.
    Solve {
        #[arg(
            long,
            conflicts_with = "generate",
            required_unless_present = "generate"
        )]
        instance: Option<PathBuf>,
        /// `kind,dim,seed` with kind one of orthant, affine, box.
        #[arg(long)]
        generate: Option<String>,
        #[arg(long, value_enum, default_value_t = MethodArg::Ap)]
        method: MethodArg,
        #[arg(long, default_value_t = 1000)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = SelectionArg::KeepY)]
        selection: SelectionArg,
        /// Keep every n-th iterate in the trace.
        #[arg(long, default_value_t = 1)]
        record_every: usize,
        /// Trace CSV output path.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// JSON summary output path (stdout if absent).
        #[arg(long)]
        summary: Option<PathBuf>,
        #[command(flatten)]
        tols: TolArgs,
    },
    /// Write a generated feasibility instance as JSON.
    Generate {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        dim: usize,
        #[arg(long, env = "CROSSPROJ_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Timing and oracle-gap statistics per dimension, as CSV.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, env = "CROSSPROJ_SEED", default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct PointArgs {
    /// PointFile JSON: {"dim": n, "x0": [...], "y0": [...]}.
    #[arg(long, conflicts_with_all = ["x0", "y0"], required_unless_present_all = ["x0", "y0"])]
    input: Option<PathBuf>,
    /// Comma-separated coordinates, e.g. `--x0 1,-2,3`.
    #[arg(long, requires = "y0", allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long, requires = "x0", allow_hyphen_values = true)]
    y0: Option<String>,
}

#[derive(Debug, Args)]
struct TolArgs {
    /// Relative band for the orthogonal case.
    #[arg(long, default_value_t = 1e-12)]
    tol_orth: f64,
    /// Relative band for the degenerate case.
    #[arg(long, default_value_t = 1e-12)]
    tol_deg: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyModeArg {
    Grid,
    Injective,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FaultArg {
    LambdaPlus,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Ap,
    Dr,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SelectionArg {
    KeepY,
    KeepX,
    Alternate,
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl From<crossproj::Error> for CliError {
    fn from(e: crossproj::Error) -> Self {
        let code = match e {
            crossproj::Error::Parse(_) => exit::PARSE,
            _ => exit::NUMERIC,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<crossproj::io::ParseError> for CliError {
    fn from(e: crossproj::io::ParseError) -> Self {
        CliError::new(exit::PARSE, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
