//! `pathdecomp` command line: `tabulate`, `decompose` and `report`.

mod commands;
mod config;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;

pub use commands::{decompose_panel, report, ResultRow};
pub use config::{FileConfig, Horizon, Overrides, RunConfig};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    Usage = 1,
    Io = 2,
    Data = 3,
    Convergence = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub status: ExitStatus,
    pub message: String,
}

impl CliError {
    pub fn new(status: ExitStatus, message: impl Into<String>) -> Self {
        CliError {
            status,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(ExitStatus::Usage, message)
    }

    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let status = match e.root() {
            Error::Io { .. } => ExitStatus::Io,
            Error::Csv(c) if matches!(c.kind(), csv::ErrorKind::Io(_)) => ExitStatus::Io,
            Error::Convergence { .. } => ExitStatus::Convergence,
            _ => ExitStatus::Data,
        };
        CliError::new(status, e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pathdecomp",
    version,
    about = "Decompose changes in educational homogamy into preference, availability and interaction effects"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate couple microdata into per-(country, wave) tables CSV.
    Tabulate(TabulateArgs),
    /// Decompose homogamy-share changes between consecutive waves.
    Decompose(DecomposeArgs),
    /// Compare decomposition results across schemes.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct Shared {
    /// Key-value (TOML) config file; flags take precedence.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// CSV mapping raw education codes to levels (`code,level`).
    #[arg(long, value_name = "PATH")]
    edu_map: Option<PathBuf>,
    /// Restrict to these countries (repeatable).
    #[arg(long = "country", value_name = "CODE")]
    countries: Vec<String>,
    /// Restrict to these waves (repeatable).
    #[arg(long = "wave", value_name = "YEAR")]
    waves: Vec<i32>,
}

#[derive(Debug, Args)]
struct TabulateArgs {
    /// Microdata CSV: country,wave_year,male_age,male_edu,female_edu[,weight].
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Tables CSV destination (default: stdout).
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Youngest male partner age kept (default 30).
    #[arg(long, value_name = "N")]
    age_min: Option<u32>,
    /// Oldest male partner age kept (default 34).
    #[arg(long, value_name = "N")]
    age_max: Option<u32>,
    /// Abort on malformed rows and unmapped education codes.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    /// Tables CSV: country,wave_year,male_edu,female_edu,count.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Results CSV destination (default: stdout).
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Decomposition scheme(s), comma-separated or repeated, or `all`.
    /// sequential-xy switches preferences first, then availability;
    /// sequential-yx switches availability first, then preferences;
    /// path-independent reports single-switch effects plus their interaction;
    /// shapley averages both sequential orders. Default: path-independent.
    #[arg(long, value_name = "NAME")]
    scheme: Vec<String>,
    /// short: consecutive wave pairs (default); long: first-to-last sums; both: short and long rows.
    #[arg(long, value_name = "short|long|both")]
    horizon: Option<String>,
    /// IPF convergence tolerance, relative to the table total (default 1e-10).
    #[arg(long, value_name = "X")]
    ipf_tol: Option<f64>,
    /// IPF iteration limit (default 10000).
    #[arg(long, value_name = "N")]
    ipf_max_iter: Option<usize>,
    /// Added to every cell of a table that has zero cells (default 0.5).
    #[arg(long, value_name = "X")]
    zero_adjust: Option<f64>,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Results CSV from `decompose` (repeatable).
    #[arg(long, value_name = "PATH", required = true)]
    input: Vec<PathBuf>,
    /// Comparison CSV destination (default: stdout).
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

fn shared_overrides(shared: Shared) -> Overrides {
    Overrides {
        config: shared.config,
        edu_map: shared.edu_map,
        countries: shared.countries,
        waves: shared.waves,
        ..Default::default()
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitStatus::Usage
            } else {
                ExitStatus::Ok
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitStatus::Ok,
        Err(e) => {
            eprintln!("error: {e}");
            e.status
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Tabulate(a) => {
            let cfg = RunConfig::resolve(Overrides {
                age_min: a.age_min,
                age_max: a.age_max,
                strict: a.strict,
                ..shared_overrides(a.shared)
            })?;
            commands::tabulate(&a.input, a.output.as_deref(), &cfg)
        }
        Command::Decompose(a) => {
            let cfg = RunConfig::resolve(Overrides {
                scheme: a.scheme,
                horizon: a.horizon,
                ipf_tol: a.ipf_tol,
                ipf_max_iter: a.ipf_max_iter,
                zero_adjust: a.zero_adjust,
                ..shared_overrides(a.shared)
            })?;
            commands::decompose(&a.input, a.output.as_deref(), &cfg)
        }
        Command::Report(a) => commands::report_files(&a.input, a.output.as_deref()),
    }
}
