use std::path::Path;

use serde_json::Value;

use crate::config::Config;
use crate::error::CliError;
use crate::manifest::{Outputs, RunState};

pub mod inequalities;
pub mod partition;
pub mod simulate;
pub mod uniqueness;

/// Everything a command reports back for the manifest.
pub struct Outcome {
    pub state: RunState,
    pub message: Option<String>,
    pub summary: Value,
    pub trajectory: Option<Value>,
}

impl Outcome {
    /// `Completed` when `breaches` is empty, `InvariantBreach` listing them otherwise.
    pub fn checked(summary: Value, breaches: Vec<String>) -> Self {
        let (state, message) = if breaches.is_empty() {
            (RunState::Completed, None)
        } else {
            (RunState::InvariantBreach, Some(breaches.join("; ")))
        };
        Self { state, message, summary, trajectory: None }
    }
}

pub struct Context<'a> {
    pub config: &'a Config,
    /// Directory of the config file, for resolving relative paths.
    pub base: &'a Path,
}

pub type Command = fn(&Context<'_>, &mut Outputs<'_>) -> Result<Outcome, CliError>;

/// Seeds recorded in the manifest for a command.
pub fn seeds(command: &str, config: &Config) -> Vec<u64> {
    match command {
        "verify-partition" => vec![config.partition.seed],
        "inequalities" => config.inequalities.seeds.clone(),
        "uniqueness" => config.uniqueness.iter().map(|u| u.perturbation_seed).collect(),
        _ => Vec::new(),
    }
}
