//! Command-line front end for the filmdyn experiments.
//!
//! Every command computes its results in memory, then writes a JSON summary
//! and its data tables into the output directory.

mod commands;
mod output;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use output::Format;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "filmdyn", version, about = "Numerical experiments on thin-film drainage", allow_negative_numbers = true)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Relative tolerance (each command has its own default).
    #[arg(long, allow_hyphen_values = true, global = true)]
    rtol: Option<f64>,
    /// Absolute tolerance (each command has its own default).
    #[arg(long, allow_hyphen_values = true, global = true)]
    atol: Option<f64>,
    /// Output directory.
    #[arg(long, global = true, env = "FILMDYN_OUT", default_value = "filmdyn-out")]
    out: PathBuf,
    /// Format of the data tables.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Seed for sampled quantities.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

impl Common {
    /// Tolerances, falling back to the command's defaults.
    pub fn tolerances(&self, default: (f64, f64)) -> Result<(f64, f64)> {
        let t = (self.rtol.unwrap_or(default.0), self.atol.unwrap_or(default.1));
        if !(t.0 > 0.0 && t.0.is_finite() && t.0 < 1.0) {
            return Err(commands::Usage(format!("rtol must lie in (0, 1), got {}", t.0)).into());
        }
        if !(t.1 > 0.0 && t.1.is_finite()) {
            return Err(commands::Usage(format!("atol must be positive, got {}", t.1)).into());
        }
        Ok(t)
    }
}

#[derive(Subcommand, Debug)]
#[command(allow_negative_numbers = true)]
enum Command {
    /// Track the oscillations of a trajectory leaving the critical point.
    Oscillations(commands::OscillationsArgs),
    /// One rescaled oscillation from a maximum of amplitude L.
    CycleMap(commands::CycleMapArgs),
    /// The matched inner solution for a given slope.
    Inner(commands::InnerArgs),
    /// The separatrix of the planar reduction of the inner equation.
    Separatrix(commands::SeparatrixArgs),
    /// Build a substrate with a single accumulation point.
    Substrate(commands::SubstrateArgs),
    /// One shot of the accumulation boundary layer.
    Blayer(commands::BlayerArgs),
    /// Boundary-layer shots over a grid of curvatures and perturbations.
    BlayerScan(commands::BlayerScanArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let c = &cli.common;
    output::check_output_dir(&c.out).map_err(|e| commands::Usage(format!("{e:#}")))?;
    let report = match &cli.command {
        Command::Oscillations(a) => commands::oscillations(a, c)?,
        Command::CycleMap(a) => commands::cycle_map(a, c)?,
        Command::Inner(a) => commands::inner(a, c)?,
        Command::Separatrix(a) => commands::separatrix(a, c)?,
        Command::Substrate(a) => commands::substrate(a, c)?,
        Command::Blayer(a) => commands::blayer(a, c)?,
        Command::BlayerScan(a) => commands::blayer_scan(a, c)?,
    };
    report.write(&c.out, c.format)
}
