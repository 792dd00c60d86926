//! `hmorb`: batch front end for torus-orbit computations on Hilbert modular spaces.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Job, Overrides};

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Io(String),
    Precondition(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Io(_) => 1,
            CliError::Precondition(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Precondition(m) => write!(f, "precondition violated: {m}"),
        }
    }
}

impl From<hilbert_orbits::Error> for CliError {
    fn from(e: hilbert_orbits::Error) -> Self {
        use hilbert_orbits::Error as E;
        match e {
            E::Parse { .. } | E::InvalidField(_) => CliError::Parse(e.to_string()),
            other => CliError::Precondition(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "hmorb", version, about = "Torus orbits on Hilbert modular spaces")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct Flags {
    /// Builtin field name or field file.
    #[arg(long, global = true, value_name = "FILE")]
    field: Option<String>,
    /// Working precision in bits.
    #[arg(long, global = true, value_name = "BITS")]
    prec: Option<u32>,
    #[arg(long, global = true, value_name = "H")]
    height: Option<i64>,
    #[arg(long, global = true, value_name = "E")]
    eps: Option<f64>,
    /// Output path; stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<String>,
    /// Worker threads.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[arg(long, global = true, value_name = "S")]
    seed: Option<u64>,
}

#[derive(Args)]
struct JobArg {
    /// TOML job file.
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Closure verdict for a locally divergent orbit.
    Classify(JobArg),
    /// Boundary orbits with their Bruhat data and stabilizers.
    Boundary(JobArg),
    /// Trajectory CSV: divergence scan, balance check or boundary approach.
    Flow(JobArg),
    /// Values of a split form system on a coordinate box (JSON lines).
    Scan(JobArg),
    /// Dispersion of values over a grid of target boxes.
    Dispersion(JobArg),
    /// Accumulation points against exceptional forms and axis sets.
    ClosureCheck(JobArg),
    /// Unit group data.
    Units(JobArg),
    /// Sanity checks of a field definition.
    FieldCheck(JobArg),
}

type Handler = fn(&mut Job) -> Result<u8, CliError>;

fn run(cli: Cli) -> Result<u8, CliError> {
    let f = cli.flags;
    let ov = Overrides {
        field: f.field,
        prec: f.prec,
        height: f.height,
        eps: f.eps,
        out: f.out,
        jobs: f.jobs,
        seed: f.seed,
    };
    let (arg, cmd): (&JobArg, Handler) = match &cli.cmd {
        Cmd::Classify(a) => (a, commands::classify),
        Cmd::Boundary(a) => (a, commands::boundary),
        Cmd::Flow(a) => (a, commands::flow),
        Cmd::Scan(a) => (a, commands::scan_cmd),
        Cmd::Dispersion(a) => (a, commands::dispersion_cmd),
        Cmd::ClosureCheck(a) => (a, commands::closure_check),
        Cmd::Units(a) => (a, commands::units_cmd),
        Cmd::FieldCheck(a) => (a, commands::field_check),
    };
    let mut job = Job::load(arg.config.as_deref(), &ov)?;
    if let Some(n) = job.cfg.jobs {
        if n == 0 {
            return Err(CliError::Precondition("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Precondition(e.to_string()))?;
    }
    cmd(&mut job)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("hmorb: {e}");
            ExitCode::from(e.code())
        }
    }
}
