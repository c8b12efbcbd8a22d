//! `besov-mhd`: batch runner for the partition suite, inequality sweeps,
//! MHD simulations and uniqueness experiments.
//!
//! Numeric settings come from a versioned TOML file; the command line only picks
//! the config and the output directory. The worker count is read from
//! `PMHD_WORKERS`.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Command, Context};
use error::{CliError, EXIT_BREACH, EXIT_GUARD, EXIT_OK, EXIT_USAGE};
use manifest::{Outputs, RunManifest, RunState};

pub const WORKERS_ENV: &str = "PMHD_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "besov-mhd", version, about = "Littlewood-Paley, Besov and 2D MHD experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, clap::Args)]
struct Paths {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Partition-of-unity, reconstruction, composition and support checks.
    VerifyPartition(Paths),
    /// Bernstein and logarithmic interpolation sweeps.
    Inequalities(Paths),
    /// Integrate the MHD system and write a trajectory directory.
    Simulate(Paths),
    /// Perturbation sweep against the Osgood envelope.
    Uniqueness(Paths),
}

impl Cmd {
    fn parts(&self) -> (&'static str, &Paths, Command) {
        match self {
            Cmd::VerifyPartition(p) => ("verify-partition", p, commands::partition::run),
            Cmd::Inequalities(p) => ("inequalities", p, commands::inequalities::run),
            Cmd::Simulate(p) => ("simulate", p, commands::simulate::run),
            Cmd::Uniqueness(p) => ("uniqueness", p, commands::uniqueness::run),
        }
    }
}

fn init_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("worker pool: {e}")))
}

fn state_for(code: i32) -> RunState {
    match code {
        EXIT_GUARD => RunState::GuardTripped,
        EXIT_BREACH => RunState::InvariantBreach,
        _ => RunState::Failed,
    }
}

fn execute(name: &str, paths: &Paths, command: Command) -> Result<i32, CliError> {
    init_workers()?;
    let bytes = std::fs::read(&paths.config)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", paths.config.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| CliError::Usage("config is not UTF-8".into()))?;
    let config = config::parse(text)?;
    let base = paths.config.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));

    let mut record = RunManifest::start(name, &paths.config, &bytes, config.schema_version);
    record.seeds = commands::seeds(name, &config);
    record.write(&paths.out)?;

    let ctx = Context { config: &config, base };
    let mut outputs = Outputs::new(&paths.out);
    let result = command(&ctx, &mut outputs);
    record.outputs = std::mem::take(&mut outputs.files);
    let code = match result {
        Ok(outcome) => {
            let code = match outcome.state {
                RunState::Completed => EXIT_OK,
                RunState::GuardTripped => EXIT_GUARD,
                RunState::InvariantBreach => EXIT_BREACH,
                RunState::Running | RunState::Failed => EXIT_BREACH,
            };
            if let Some(m) = &outcome.message {
                eprintln!("{name}: {m}");
            }
            record.summary = outcome.summary;
            record.trajectory = outcome.trajectory;
            record.finish(outcome.state, code, outcome.message);
            code
        }
        Err(e) => {
            let code = e.exit_code();
            eprintln!("{name}: {e}");
            record.finish(state_for(code), code, Some(e.to_string()));
            code
        }
    };
    record.write(&paths.out)?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let (name, paths, command) = cli.command.parts();
    let code = execute(name, paths, command).unwrap_or_else(|e| {
        eprintln!("{name}: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
