//! `sphereflow` command-line tool.

mod bifurcate;
mod config;
mod lift;
mod output;
mod selftest;
mod simulate;
mod solution;
mod stability;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_ACCEPTANCE: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self { code: EXIT_NUMERICAL, message: message.into() }
    }

    pub fn acceptance(message: impl Into<String>) -> Self {
        Self { code: EXIT_ACCEPTANCE, message: message.into() }
    }
}

impl From<sphereflow::Error> for CliError {
    fn from(e: sphereflow::Error) -> Self {
        use sphereflow::Error as E;
        let code = match e {
            E::Numerical(_) | E::Singular | E::Quadrature(_) | E::NonZeroMean(_) => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        };
        Self { code, message: e.to_string() }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sphereflow", version, about = "Flow on a rotating sphere: simulation, exact solutions, stability and bifurcation")]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "SPHEREFLOW_OUT", default_value = ".")]
    pub out: PathBuf,
    /// Also render simple SVG line plots.
    #[arg(long, global = true)]
    pub svg: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the vorticity equation from a config file.
    Simulate {
        /// JSON or TOML document mirroring the simulation settings.
        config: PathBuf,
    },
    /// Stability reports.
    #[command(subcommand)]
    Stability(stability::StabilityCommand),
    /// Build an explicit solution and report its residual.
    MakeSolution(solution::MakeSolutionArgs),
    /// Detect bifurcation points and continue the branches of a problem file.
    Bifurcate {
        problem: PathBuf,
    },
    /// Lift a 2D stationary solution to a stratified 3D flow.
    Lift3d(lift::LiftArgs),
    /// Transform, eigenrelation and quadrature checks.
    ShtSelftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate { config } => simulate::run(cli, config),
        Command::Stability(cmd) => stability::run(cli, cmd),
        Command::MakeSolution(args) => solution::run(cli, args),
        Command::Bifurcate { problem } => bifurcate::run(cli, problem),
        Command::Lift3d(args) => lift::run(cli, args),
        Command::ShtSelftest => selftest::run(cli),
    }
}
