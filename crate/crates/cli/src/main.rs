//! `hypbc`: classification, power estimation, solving and property checks
//! for constant-coefficient hyperbolic half-space problems.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hypbc::Error;

#[derive(Parser, Debug)]
#[command(name = "hypbc", version, about = "Hyperbolic half-space boundary value problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Where the system comes from.
#[derive(Args, Debug, Clone)]
pub struct Source {
    /// System-spec JSON file.
    pub spec: Option<PathBuf>,
    /// Built-in preset instead of a spec file.
    #[arg(long, conflicts_with = "spec")]
    pub preset: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Seed for every sampled quantity.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Sample count (sphere points, frequency directions or suite size).
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct GammaGrid {
    /// Smallest gamma of the geometric grid.
    #[arg(long)]
    pub gamma_min: Option<f64>,
    /// Largest gamma of the geometric grid.
    #[arg(long)]
    pub gamma_max: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    pub gamma_count: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hyperbolicity, symmetry, boundary type and dim E^s.
    Classify {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        common: Common,
    },
    /// Fits the Kreiss-Sakamoto power s from rho_min(gamma).
    Power {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        gammas: GammaGrid,
        /// Write the per-gamma table here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Solves the half-space problem and reports the weighted estimate.
    Solve(commands::SolveArgs),
    /// Runs the property suites.
    Verify {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        common: Common,
        /// Run only these properties (repeatable).
        #[arg(long)]
        property: Vec<String>,
    },
    /// Writes a preset as a system-spec file.
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Spatial dimension for the wave presets.
        #[arg(long)]
        d: Option<usize>,
        /// Comma-separated oblique vector b.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        b: Option<Vec<f64>>,
        /// Permittivity and permeability for Maxwell.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
    },
}

/// Failures carry their exit status.
#[derive(Debug)]
pub enum Failure {
    Core(Error),
    Property(usize),
    NotHyperbolic(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::InvalidInput(_) | Error::Io(_) | Error::ZeroVector => 1,
        Error::NotHyperbolic { .. } => 2,
        Error::KernelInclusionFailed { .. } => 3,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Classify { source, common } => commands::classify(&source, &common),
        Command::Power {
            source,
            common,
            gammas,
            csv,
        } => commands::power(&source, &common, &gammas, csv.as_deref()),
        Command::Solve(args) => commands::solve(&args),
        Command::Verify {
            source,
            common,
            property,
        } => commands::verify(&source, &common, &property),
        Command::Preset { name, out, d, b, eps, mu } => commands::preset(&name, out.as_deref(), d, b, eps, mu),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::NotHyperbolic(msg)) => {
            eprintln!("not hyperbolic: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Property(n)) => {
            eprintln!("{n} propert{} failed", if n == 1 { "y" } else { "ies" });
            ExitCode::from(5)
        }
    }
}
