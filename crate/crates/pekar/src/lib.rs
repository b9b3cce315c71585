//! Batch driver for the radial Pekar laboratory: configuration, commands and
//! JSON/CSV reports.
//!
//! Exit codes: 0 every check passed, 1 a check failed, 2 usage error,
//! 3 computation error.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{MethodArg, Overrides, RunConfig};
pub use error::CliError;
pub use report::{Check, Outcome, Table};

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "PEKAR_THREADS";

#[derive(Debug, Parser)]
#[command(name = "pekar", version, about = "Pekar minimizers on a ball: solves, spectra and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Compute the minimizer and write its profile.
    Solve,
    /// Sector spectra of the Hessian and the associated checks.
    Spectrum,
    /// Sampled versus theoretical coercivity constant.
    Coercivity,
    /// Energies over a list of radii and the large-radius extrapolation.
    Sweep,
    /// Randomized rearrangement inequality checks.
    Rearrange,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Spectrum => "spectrum",
            Command::Coercivity => "coercivity",
            Command::Sweep => "sweep",
            Command::Rearrange => "rearrange",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub radius: Option<f64>,
    /// Number of grid cells.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tol_el: Option<f64>,
    #[arg(long, global = true)]
    pub l_max: Option<u32>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Comma-separated radii for `sweep`.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub radii: Option<String>,
    /// Cells per unit radius for `sweep`.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub density: Option<f64>,
    /// JSON output; tables go beside it with a `.csv` extension.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `key = value` file applied between the defaults and the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Previously written `solve` report to reuse.
    #[arg(long, global = true)]
    pub solution: Option<PathBuf>,
}

impl Flags {
    pub fn overrides(&self) -> Result<Overrides, CliError> {
        Ok(Overrides {
            radius: self.radius,
            grid: self.grid,
            method: self.method,
            tol_el: self.tol_el,
            l_max: self.l_max,
            samples: self.samples,
            seed: self.seed,
            radii: self.radii.as_deref().map(config::parse_radii).transpose()?,
            density: self.density,
            out: self.out.clone(),
            solution: self.solution.clone(),
        })
    }
}

pub fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    RunConfig::resolve(cli.flags.config.as_deref(), cli.flags.overrides()?)
}

pub fn run_command(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Solve => commands::solve(cfg),
        Command::Spectrum => commands::spectrum(cfg),
        Command::Coercivity => commands::coercivity(cfg),
        Command::Sweep => commands::sweep(cfg),
        Command::Rearrange => commands::rearrange(cfg),
    }
}

/// Sizes the global pool from [`THREADS_ENV`] when set.
pub fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a thread count, got {v:?}")))?;
        // a second initialization (e.g. in tests) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs a parsed invocation end to end and returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    let name = cli.command.name();
    let cfg = match init_threads().and_then(|_| resolve(cli)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("pekar {name}: {e}");
            return e.exit_code();
        }
    };
    let out = cfg.out.as_deref();
    match run_command(cli.command, &cfg) {
        Ok(o) => match report::emit(&o.report, o.table.as_ref(), out) {
            Ok(()) => o.exit_code(),
            Err(e) => {
                eprintln!("pekar {name}: {e}");
                e.exit_code()
            }
        },
        Err(e) => {
            eprintln!("pekar {name}: {e}");
            let rep = report::error_report(name, &e);
            if let Err(w) = report::emit(&rep, None, out) {
                eprintln!("pekar {name}: {w}");
            }
            e.exit_code()
        }
    }
}
