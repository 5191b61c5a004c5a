//! Data tables for the nano-wire plasmon model.
//!
//! Lengths are in units of the vacuum wavelength λ₀ and rates in units of the
//! free-space decay rate Γ₀. Every table goes to stdout (or `--out`) as CSV
//! preceded by `# key=value` lines holding the effective configuration.

mod commands;
mod table;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use plasmonwire::greentensor::QuadratureSpec;
use plasmonwire::Error;

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "PLASMONWIRE_WORKERS";

#[derive(Parser, Debug)]
#[command(name = "plasmonwire", version, about = "Plasmon modes, decay rates and gates next to a metallic nano-wire")]
struct Cli {
    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct QuadArgs {
    /// Relative tolerance of the k_z quadrature and the order sum.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub rel_tol: f64,
    /// Absolute error floor (tensor units).
    #[arg(long, global = true, default_value_t = 0.0)]
    pub abs_tol: f64,
    /// Highest cylindrical order summed.
    #[arg(long, global = true, default_value_t = 60)]
    pub n_max: u32,
}

impl QuadArgs {
    pub fn spec(&self) -> QuadratureSpec {
        QuadratureSpec { rel_tol: self.rel_tol, abs_tol: self.abs_tol, n_max: self.n_max, ..Default::default() }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Guided-mode wavenumbers k_z/k₀ versus wire radius.
    Modes(commands::ModesArgs),
    /// n = 0 resonance profile, or its width over radius and loss.
    #[command(subcommand)]
    Resonance(commands::ResonanceCmd),
    /// Total decay rate and its partition, or its frequency spectrum.
    #[command(subcommand)]
    Decay(commands::DecayCmd),
    /// Γ_pl/Γ_tot versus emitter distance.
    PlasmonFraction(commands::FractionArgs),
    /// Γ₁₂/Γ₁₁ versus axial separation.
    Cross(commands::CrossArgs),
    /// Optimize the emitter distance r_A.
    Optimum(commands::OptimumArgs),
    /// Phase-gate fidelities.
    #[command(subcommand)]
    Gate(commands::GateCmd),
    /// Run the invariant suite.
    Selftest,
}

/// Failure classes and their exit codes.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
    Invariant(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Invariant(_) | Failure::Io(_) => 1,
        }
    }

    fn line(&self) -> String {
        let (kind, msg) = match self {
            Failure::Config(m) => ("config", m),
            Failure::Numerical(m) => ("convergence", m),
            Failure::Invariant(m) => ("selftest", m),
            Failure::Io(m) => ("io", m),
        };
        format!("error kind={kind} exit={}: {}", self.code(), msg.replace('\n', " "))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Range(_) | Error::Precondition(_) => Failure::Config(e.to_string()),
            Error::NearPole { .. } | Error::Convergence(_) | Error::Resolution(_) => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn configure_workers() -> Result<(), Failure> {
    let Ok(v) = std::env::var(WORKERS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Config(format!("{WORKERS_ENV}={v} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_workers()?;
    let q = &cli.quad;
    let (table, verdict) = match cli.command {
        Command::Modes(a) => (commands::modes(&a)?, Ok(())),
        Command::Resonance(c) => (commands::resonance(&c)?, Ok(())),
        Command::Decay(c) => (commands::decay(&c, q)?, Ok(())),
        Command::PlasmonFraction(a) => (commands::plasmon_fraction(&a, q)?, Ok(())),
        Command::Cross(a) => (commands::cross(&a, q)?, Ok(())),
        Command::Optimum(a) => (commands::optimum(&a, q)?, Ok(())),
        Command::Gate(c) => (commands::gate(&c, q)?, Ok(())),
        Command::Selftest => commands::selftest(),
    };
    match &cli.out {
        Some(p) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(p)?);
            table.write(&mut f)?;
            f.flush()?;
        }
        None => match table.write(&mut std::io::stdout().lock()) {
            // the reader went away (e.g. `| head`)
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            r => r?,
        },
    }
    verdict
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("{}", Failure::Config(first.to_string()).line());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.line());
            ExitCode::from(f.code())
        }
    }
}
