use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dyncap::cli::{parse_config, run, Experiment, ExitStatus, Overrides};

/// Stochastic dynamic-capillarity simulator and verification experiments.
#[derive(Parser)]
#[command(name = "dyncap", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; member i uses seed + i.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for report.json and CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of Monte-Carlo paths.
    #[arg(long, global = true)]
    paths: Option<usize>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Simulate paths and write terminal fields and norm histories.
    Simulate,
    /// Compare Monte-Carlo energy moments with their a-priori bounds.
    EnergyCheck,
    /// Coupled-noise stability ratio over shrinking perturbations.
    StabilityCheck,
    /// Vanishing diffusion and capillarity ladder.
    LimitStudy,
    /// Kinetic function identities and time-translation modulus.
    KineticDiag,
    /// Non-degeneracy measure of the flux.
    Nondegeneracy,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::Simulate => Experiment::Simulate,
            Command::EnergyCheck => Experiment::EnergyCheck,
            Command::StabilityCheck => Experiment::StabilityCheck,
            Command::LimitStudy => Experiment::LimitStudy,
            Command::KineticDiag => Experiment::KineticDiag,
            Command::Nondegeneracy => Experiment::Nondegeneracy,
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let Some(path) = args.config else {
        eprintln!("error: --config <path> is required");
        return ExitCode::from(ExitStatus::ConfigError.code() as u8);
    };
    let mut config = match parse_config(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(ExitStatus::ConfigError.code() as u8);
        }
    };
    config.apply(&Overrides {
        experiment: Some(args.command.into()),
        seed: args.seed,
        paths: args.paths,
        threads: args.threads,
        out: args.out,
    });
    ExitCode::from(run(&config).code() as u8)
}
