//! `nehari` — ground states of coupled nonlinear Schrödinger systems.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

#[derive(Parser)]
#[command(
    name = "nehari",
    about = "Ground states of coupled nonlinear Schrödinger systems by Nehari-manifold minimization",
    version
)]
struct Cli {
    /// Path to the TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a config key, e.g. --set problem.q=1.5 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the coupled ground state and dump report, fields and trace.
    Solve,
    /// Ground state of one scalar equation (config key scalar.component).
    Scalar,
    /// Levels of all subsystems with one component removed.
    Subsystems,
    /// Scan θ for the subsystem energy-comparison construction.
    ThetaSearch,
    /// Classification scan over the coupling and/or threshold bisection (d = 2).
    Threshold,
    /// Randomized rearrangement-inequality audit plus the induction audit.
    Audit,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(path) = cli.config.as_deref() else {
        eprintln!("error: --config PATH is required");
        return ExitCode::from(commands::EXIT_CONFIG as u8);
    };
    let cfg = match config::load(path, &cli.set) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(commands::EXIT_CONFIG as u8);
        }
    };
    let result = match cli.command {
        Command::Solve => commands::cmd_solve(&cfg),
        Command::Scalar => commands::cmd_scalar(&cfg),
        Command::Subsystems => commands::cmd_subsystems(&cfg),
        Command::ThetaSearch => commands::cmd_theta_search(&cfg),
        Command::Threshold => commands::cmd_threshold(&cfg),
        Command::Audit => commands::cmd_audit(&cfg),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::EXIT_CONFIG as u8)
        }
    }
}
