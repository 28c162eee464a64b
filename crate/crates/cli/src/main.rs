//! `renner`: command-line front end for the Renner-Teller spectral solvers.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Layer, RunConfig};
use error::CliError;

/// Environment variable holding the worker thread count.
const THREADS_VAR: &str = "RENNER_THREADS";

#[derive(Parser)]
#[command(name = "renner", version, about = "Spectra of the leading-order Renner-Teller Hamiltonian in unit scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Closed-form l=0 levels (2N+2)·sqrt(1 ∓ b̃)
    ExactL0,
    /// Exact perturbation coefficients and truncated-series curves
    Series,
    /// Lowest levels of the finite-difference grid operator over b̃
    Sweep,
    /// Ground-state crossing of the |l|=1 pair and the l=0 level
    Crossing,
    /// Ground-state character at each b̃
    Classify,
    /// Shell bound audit of the merged spectrum
    Bounds,
    /// Exact solutions of the matrix-form equations
    Matrixform,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ExactL0 => "exact-l0",
            Command::Series => "series",
            Command::Sweep => "sweep",
            Command::Crossing => "crossing",
            Command::Classify => "classify",
            Command::Bounds => "bounds",
            Command::Matrixform => "matrixform",
        }
    }
}

/// Every setting flag; values are validated per command.
#[derive(Args, Debug, Default)]
struct Flags {
    /// Comma list of b̃ values
    #[arg(long, global = true)]
    btilde: Option<String>,
    /// b̃ grid as LO:HI:STEP
    #[arg(long = "btilde-grid", global = true, value_name = "LO:HI:STEP")]
    btilde_grid: Option<String>,
    /// Sectors |l|, e.g. 1-8 or 0,2,5
    #[arg(long = "abs-l", global = true)]
    abs_l: Option<String>,
    /// Unperturbed shells N for degenerate and l=0 series, e.g. 1-4
    #[arg(long = "n", short = 'N', global = true)]
    n: Option<String>,
    /// Highest shell N
    #[arg(long = "n-max", global = true)]
    n_max: Option<String>,
    /// Perturbation order
    #[arg(long, global = true)]
    order: Option<String>,
    /// Expand the levels degenerate at zeroth order
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    degenerate: Option<String>,
    /// Number of levels
    #[arg(long, short = 'k', global = true)]
    levels: Option<String>,
    /// Grid points per axis
    #[arg(long = "grid-n", global = true)]
    grid_n: Option<String>,
    /// Box half-width L
    #[arg(long = "box-L", global = true)]
    box_l: Option<String>,
    /// second-order or fourth-order
    #[arg(long, global = true)]
    stencil: Option<String>,
    /// Solver or comparison tolerance
    #[arg(long, global = true)]
    tol: Option<String>,
    /// Crossing bracket as LO:HI
    #[arg(long, global = true, value_name = "LO:HI")]
    bracket: Option<String>,
    /// Spectrum source for bounds: sector or fd
    #[arg(long, global = true)]
    source: Option<String>,
    /// csv or json
    #[arg(long, global = true)]
    format: Option<String>,
    /// Output file, stdout if absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Settings file: key=value lines or a previous output file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

impl Flags {
    fn layer(&self) -> Layer {
        [
            ("btilde", &self.btilde),
            ("btilde-grid", &self.btilde_grid),
            ("abs-l", &self.abs_l),
            ("n", &self.n),
            ("n-max", &self.n_max),
            ("order", &self.order),
            ("degenerate", &self.degenerate),
            ("levels", &self.levels),
            ("grid-n", &self.grid_n),
            ("box-L", &self.box_l),
            ("stencil", &self.stencil),
            ("tol", &self.tol),
            ("bracket", &self.bracket),
            ("source", &self.source),
            ("format", &self.format),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
        .collect()
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Validation(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Validation(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let file = cli.flags.config.as_deref().map(|p| config::read_file(p, cli.command)).transpose()?;
    let cfg = RunConfig::resolve(cli.command, file, cli.flags.layer())?;
    let table = commands::run(&cfg)?;
    output::write(&output::render(&cfg, &table)?, cli.flags.out.as_deref())?;
    if table.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::NonConvergence(table.failures.join("; ")))
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("renner: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
