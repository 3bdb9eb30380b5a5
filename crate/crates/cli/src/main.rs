//! `caloric`: caloric extensions, bowl solves, invariant suites and Perron
//! sweeps from the command line.
//!
//! Exit status is 0 when every requested certificate is met, 1 when a run
//! completes but a certificate or tolerance fails, and 2 on invalid input.

mod bowl;
mod config;
mod extend;
mod output;
mod perron;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use caloric_core::calorics::HeatBallResolution;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "caloric", version, about)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Spatial dimension N. Inferred from the input when omitted.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Tolerance for the command's certificate; each command documents its default.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Directory for output artifacts, created if missing.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Heat-ball quadrature resolution for the verify suites.
    #[arg(long, global = true, value_enum, default_value_t = Resolution::Default)]
    pub resolution: Resolution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Resolution {
    Coarse,
    Default,
    Fine,
}

impl Resolution {
    pub fn heat_ball(self) -> HeatBallResolution {
        match self {
            Resolution::Coarse => HeatBallResolution::coarse(),
            Resolution::Default => HeatBallResolution::default(),
            Resolution::Fine => HeatBallResolution::default().doubled(),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Caloric extension u_p = wq + p of a rational polynomial, with exact checks.
    Extend(extend::ExtendArgs),
    /// Solve the Dirichlet problem on a caloric bowl with a certified error.
    ///
    /// Without --degree the fit degree escalates until the certificate is at
    /// most --tol (default 1e-6).
    Bowl(bowl::BowlArgs),
    /// Run an invariant suite.
    ///
    /// --tol defaults to 1e-8 for normalization and 1e-6 otherwise; for
    /// supercaloric it is the band within which a margin counts as zero.
    Verify(verify::VerifyArgs),
    /// Perron upper and lower solutions on a lattice domain from a TOML config.
    ///
    /// --tol overrides sweep.tolerance. Exits 0 when both sweeps converge and
    /// the sandwich check holds.
    Perron(perron::PerronArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Extend(args) => extend::run(args, &cli.global),
        Command::Bowl(args) => bowl::run(args, &cli.global),
        Command::Verify(args) => verify::run(args, &cli.global),
        Command::Perron(args) => perron::run(args, &cli.global),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
