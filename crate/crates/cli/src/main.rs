//! `offset-root`: run approximations, stability analyses, offset scans,
//! baseline comparisons and continued-fraction expansions.
//!
//! Exit status: 0 on success, 1 on invalid arguments, 2 when the primary
//! run does not converge to the root.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use offset_root_core::iteration::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use offset_root_core::SignConvention;

use output::OutputFormat;

#[derive(Debug, Parser)]
#[command(name = "offset-root", version, about = "Offset fixed-point iteration for d-th roots")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the iteration and print the c_n trace and recovered root.
    Approx(ApproxArgs),
    /// Fixed points and their stability classes.
    Stability(StabilityArgs),
    /// Sweep the offset b over a grid and report where the iteration converges.
    Scan(ScanArgs),
    /// Compare the offset iteration with Newton, Babylonian and Halley.
    Compare(CompareArgs),
    /// Continued fraction induced by the square-root map.
    Cf(CfArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Radicand (positive real).
    #[arg(long, allow_hyphen_values = true)]
    pub x: f64,
    /// Root degree.
    #[arg(long, default_value_t = 2)]
    pub d: u32,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Offset b; guessed from the digit count of x when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub c1: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// `minus` (r = b/2 - c) or `plus` (r = b/2 + c); defaults to minus for
    /// d = 2 and plus otherwise.
    #[arg(long)]
    pub convention: Option<SignConvention>,
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub common: Common,
    /// Analyse a single offset; for d = 2 the regime table is printed when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub b_min: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b_max: f64,
    /// Number of grid points, both ends included.
    #[arg(long)]
    pub steps: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    pub c1: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = offset_root_core::stability::SCAN_MAX_ITER)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub c1: f64,
    /// Step tolerance for every method; tighter than `approx` so that the
    /// linear method can be followed down to 1e-12.
    #[arg(long, default_value_t = 1e-14)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    #[arg(long)]
    pub convention: Option<SignConvention>,
    /// Start for the Newton-family methods; defaults to the root implied by c1.
    #[arg(long, allow_hyphen_values = true)]
    pub x1: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CfArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long, default_value_t = 10)]
    pub depth: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(&cli.command) {
        Ok(status) => ExitCode::from(status.code()),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code())
        }
    }
}
