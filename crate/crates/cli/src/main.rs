//! `ergoloc` command-line front end.

mod commands;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
    #[error(transparent)]
    Core(#[from] ergoloc::Error),
    #[error("{0} self-test check(s) failed")]
    SelfTest(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(ergoloc::Error::NonConvergence { .. }) => 3,
            CliError::SelfTest(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "ergoloc", version, about = "Global, local and switch-off ergotropy of bipartite quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ergotropy of a state under a Hamiltonian.
    Global(GlobalArgs),
    /// Local ergotropy of subsystem S by one or more methods.
    Local(LocalArgs),
    /// Jaynes-Cummings dressed-state superpositions swept over the relative phase.
    Jc(JcArgs),
    /// Single-magnon Bethe states of the XXZ ring.
    Xxz(XxzArgs),
    /// Write the unital-channel relaxation of a local-ergotropy problem as a standalone instance.
    ExportSdp(ExportSdpArgs),
    /// Quick internal consistency checks.
    Selftest,
}

#[derive(Args)]
struct GlobalArgs {
    #[arg(long)]
    state: PathBuf,
    #[arg(long)]
    hamiltonian: PathBuf,
    /// Include the optimal unitary in the report.
    #[arg(long)]
    unitary: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Matrix files describing a bipartite system.
#[derive(Args)]
struct SystemArgs {
    #[arg(long)]
    state: PathBuf,
    #[arg(long)]
    hs: PathBuf,
    #[arg(long)]
    v: PathBuf,
    /// Environment Hamiltonian; it never changes local results and defaults to zero.
    #[arg(long)]
    he: Option<PathBuf>,
    #[arg(long)]
    ds: usize,
    #[arg(long)]
    de: usize,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Method {
    Closed,
    Optimize,
    Polar,
    Sdp,
    All,
}

#[derive(Args)]
struct LocalArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, value_enum, default_value = "all")]
    method: Method,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    #[arg(long, default_value_t = 5000)]
    max_iterations: usize,
    #[arg(long, default_value_t = 1e-7)]
    sdp_tol: f64,
    #[arg(long, default_value_t = 200_000)]
    sdp_max_iterations: usize,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct JcArgs {
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value = "1", value_parser = parse::angle)]
    omega_s: f64,
    #[arg(long, default_value = "1.2", value_parser = parse::angle)]
    omega_e: f64,
    #[arg(long, default_value = "0.1", value_parser = parse::angle)]
    rabi: f64,
    #[arg(long, default_value = "0.4pi", value_parser = parse::angle)]
    alpha: f64,
    /// `start:stop:steps`; angles may carry a `pi` suffix.
    #[arg(long, default_value = "0:20pi:2000", value_parser = parse::sweep)]
    sweep_phi: parse::Sweep,
    /// Read the sweep value as Omega t and use the dynamical phase (E_- - E_+) t.
    #[arg(long)]
    dynamical_phase: bool,
    /// Fock cutoff; defaults to n + 5.
    #[arg(long)]
    n_max: Option<usize>,
    /// Also write the matrices of the state at the first sweep point.
    #[arg(long)]
    export_dir: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct XxzArgs {
    #[arg(long)]
    sites: usize,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long)]
    j: f64,
    #[arg(long)]
    jz: f64,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "k_sweep", required_unless_present = "k_sweep")]
    k: Option<i64>,
    #[arg(long)]
    k_sweep: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExportSdpArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, short)]
    output: PathBuf,
    /// Re-import the written file and compare bounds.
    #[arg(long)]
    check: bool,
    #[arg(long, default_value_t = 1e-7)]
    sdp_tol: f64,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("ERGOLOC_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("ERGOLOC_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(format!("cannot size the worker pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Global(a) => commands::global(&a),
        Command::Local(a) => commands::local(&a),
        Command::Jc(a) => commands::jc(&a),
        Command::Xxz(a) => commands::xxz(&a),
        Command::ExportSdp(a) => commands::export_sdp(&a),
        Command::Selftest => commands::selftest(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
