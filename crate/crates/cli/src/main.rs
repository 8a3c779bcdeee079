//! Batch front end for the tripartite quantum-walk simulator.
//!
//! Four subcommands mirror the analysis chain: `evolve` (position
//! distributions and amplitude dumps), `entanglement` (average-
//! entanglement curves), `remote-scan` (conditioned-variance surfaces),
//! and `tomography` (simulated reconstruction reports). Every command is
//! deterministic given its configuration and seed, and writes artifacts
//! atomically (temp file + rename), so a failed run leaves nothing
//! half-written.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime error.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{CommandKind, RawOptions};

#[derive(Parser)]
#[command(name = "triwalk", version, about = "Tripartite quantum-walk entanglement-transfer simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Walk evolution: per-step position distributions plus amplitude dumps
    Evolve(CommonArgs),
    /// Average-entanglement curve with per-position detail
    Entanglement(CommonArgs),
    /// Remote-conditioning variance surfaces over the (alpha, beta) grid
    RemoteScan(CommonArgs),
    /// Per-(position, step) tomography reconstruction reports
    Tomography(CommonArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// TOML configuration file; command-line flags override its values
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    /// Number of walk steps
    #[arg(long)]
    steps: Option<u32>,
    /// Werner visibility of the initial state (1 = ideal Bell pair)
    #[arg(long)]
    visibility: Option<f64>,
    /// Weight of the entangled term in the conditioning mixture
    #[arg(long, conflicts_with = "classical_weight")]
    entangled_weight: Option<f64>,
    /// Alias for 1 − entangled-weight
    #[arg(long)]
    classical_weight: Option<f64>,
    /// Dephasing-basis angle of the mixed run's classical reference, degrees
    #[arg(long)]
    theta_classical: Option<f64>,
    /// Angle-grid resolution in degrees
    #[arg(long)]
    grid_deg: Option<f64>,
    /// Shots per tomography setting
    #[arg(long)]
    shots: Option<u64>,
    /// Master random seed (required for sampled tomography)
    #[arg(long)]
    seed: Option<u64>,
    /// Use exact Born probabilities instead of sampled counts
    #[arg(long)]
    exact: bool,
    /// Output file path
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Output format: csv or json
    #[arg(long)]
    format: Option<String>,
}

impl CommonArgs {
    fn into_raw(self) -> RawOptions {
        RawOptions {
            config: self.config,
            steps: self.steps,
            visibility: self.visibility,
            entangled_weight: self.entangled_weight,
            classical_weight: self.classical_weight,
            theta_classical: self.theta_classical,
            grid_deg: self.grid_deg,
            shots: self.shots,
            seed: self.seed,
            exact: self.exact,
            out: self.out,
            format: self.format,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Runtime(msg) => write!(f, "runtime error: {msg}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Evolve(a) => (CommandKind::Evolve, a),
        Command::Entanglement(a) => (CommandKind::Entanglement, a),
        Command::RemoteScan(a) => (CommandKind::RemoteScan, a),
        Command::Tomography(a) => (CommandKind::Tomography, a),
    };

    let result = config::resolve(kind, args.into_raw()).and_then(|cfg| {
        let files = match kind {
            CommandKind::Evolve => commands::cmd_evolve(&cfg),
            CommandKind::Entanglement => commands::cmd_entanglement(&cfg),
            CommandKind::RemoteScan => commands::cmd_remote_scan(&cfg),
            CommandKind::Tomography => commands::cmd_tomography(&cfg),
        }?;
        for (path, bytes) in &files {
            output::write_atomic(path, bytes)
                .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?;
        }
        Ok(())
    });

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ CliError::Config(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e @ CliError::Runtime(_)) => {
            eprintln!("{e}");
            ExitCode::from(3)
        }
    }
}
