//! `repute`: commitment regions, belief simulation, deviation plans and
//! equilibrium audits for reputation games with a persistent state.
//!
//! Exit codes: 0 ok, 1 analysis failure, 2 usage or parse error.

mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Globals;

#[derive(Parser, Debug)]
#[command(name = "repute", version, about)]
struct Cli {
    /// Base seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for outputs; relative --out paths resolve against it.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a scenario file.
    Validate(commands::ValidateArgs),
    /// Cutoffs, region membership and grid export for a commitment action.
    Regions(commands::RegionsArgs),
    /// Monte Carlo play of a profile.
    Simulate(commands::SimulateArgs),
    /// Build and verify the band-conditioned deviation.
    Deviation(commands::DeviationArgs),
    /// Build, check or emit equilibrium profiles.
    #[command(subcommand)]
    Equilibrium(commands::EquilibriumCmd),
    /// Which payoff result applies to a commitment action.
    Classify(commands::ClassifyArgs),
    /// Merge artifacts for one scenario into a pass/fail report.
    Report(commands::ReportArgs),
}

fn exit_code(e: &anyhow::Error) -> u8 {
    use repute::Error as E;
    if e.is::<input::UsageError>() {
        return 2;
    }
    match e.downcast_ref::<E>() {
        Some(
            E::Json(_) | E::Io(_) | E::Structure(_) | E::Normalization(_) | E::UnknownLabel(_) | E::UnknownCommitmentAction(_),
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let g = Globals { seed: cli.seed, threads: cli.threads, out_dir: cli.out_dir.clone() };
    let result = match &cli.command {
        Command::Validate(a) => commands::validate(a),
        Command::Regions(a) => commands::regions(&g, a),
        Command::Simulate(a) => commands::simulate_cmd(&g, a),
        Command::Deviation(a) => commands::deviation(&g, a),
        Command::Equilibrium(c) => commands::equilibrium(&g, c),
        Command::Classify(a) => commands::classify(&g, a),
        Command::Report(a) => commands::report(&g, a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("analysis failed: see the claims in the output");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
