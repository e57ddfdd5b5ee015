use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cqhj_cli::{config::ScenarioConfig, CliError, Command, ValidationError};

/// Complex quantum trajectories of colliding Gaussian wave packets.
///
/// Writes CSV artifacts into the output directory and prints a JSON run
/// summary on stdout. Diagnostics go to stderr.
#[derive(Parser, Debug)]
#[command(name = "cqhj", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// JSON scenario file; the default is the head-on collision scenario.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Isochrone crossing times, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    tc: Option<Vec<f64>>,

    /// Time slices for Argand grids and node searches, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    time: Option<Vec<f64>>,

    /// Relative tolerance of the integrator.
    #[arg(long = "rel-tol", global = true, allow_negative_numbers = true)]
    rel_tol: Option<f64>,

    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "CQHJ_THREADS", default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Real space-time and Argand-plane field grids plus conservation checks.
    Fields,
    /// Real and complex trajectories.
    Trajectories,
    /// Isochrone families.
    Isochrones,
    /// Node, caustic and loop reports.
    Singular,
    /// All four commands in order.
    All,
}

fn load(cli: &Cli) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Validation(ValidationError(vec![format!("--config {}: {e}", path.display())]))
            })?;
            ScenarioConfig::from_json(&text).map_err(CliError::Validation)?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(tc) = &cli.tc {
        cfg.isochrones.t_c = tc.clone();
    }
    if let Some(times) = &cli.time {
        cfg.fields.argand.times = times.clone();
        cfg.singular.times = times.clone();
    }
    if let Some(rel) = cli.rel_tol {
        cfg.tolerances.rel_tol = rel;
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<serde_json::Value, CliError> {
    let cfg = load(cli)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::Runtime(e.into()))?;
    match cli.command {
        Cmd::Fields => cqhj_cli::run(Command::Fields, &cfg),
        Cmd::Trajectories => cqhj_cli::run(Command::Trajectories, &cfg),
        Cmd::Isochrones => cqhj_cli::run(Command::Isochrones, &cfg),
        Cmd::Singular => cqhj_cli::run(Command::Singular, &cfg),
        Cmd::All => cqhj_cli::run_all(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(summary) => {
            let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
            // A closed stdout (e.g. piped into `head`) is not a run failure.
            let _ = writeln!(std::io::stdout(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let CliError::Validation(v) = &e {
                for issue in &v.0 {
                    eprintln!("cqhj: invalid config: {issue}");
                }
            } else {
                eprintln!("cqhj: error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
