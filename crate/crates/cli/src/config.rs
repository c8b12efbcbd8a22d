//! Versioned TOML configuration. Every numeric knob lives here; flags only pick
//! the config file and the output directory.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use besov_mhd::mhd::{InitialData, SolverConfig, TimeStep};
use besov_mhd::partition::Profile;
use besov_mhd::spectral::Grid2D;
use besov_mhd::uniqueness::Target;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    #[serde(default)]
    pub partition: PartitionSection,
    #[serde(default)]
    pub inequalities: InequalitySection,
    pub simulate: Option<SolverSection>,
    pub uniqueness: Option<UniquenessSection>,
    /// Test hooks that break an invariant on purpose.
    #[serde(default)]
    pub fault: FaultSection,
}

fn tau() -> f64 {
    TAU
}

fn default_smoothness() -> f64 {
    Profile::default().smoothness()
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSection {
    #[serde(default = "default_grids")]
    pub grids: Vec<usize>,
    #[serde(default = "tau")]
    pub length: f64,
    #[serde(default = "default_smoothness")]
    pub smoothness: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "hundred")]
    pub reconstruction_fields: u64,
    #[serde(default = "ten")]
    pub composition_fields: u64,
    #[serde(default = "fifty")]
    pub support_fields: u64,
    #[serde(default = "unity_tol")]
    pub unity_tolerance: f64,
    #[serde(default = "recon_tol")]
    pub reconstruction_tolerance: f64,
    #[serde(default = "comp_tol")]
    pub composition_tolerance: f64,
}

fn default_grids() -> Vec<usize> {
    vec![8, 64, 128]
}
fn hundred() -> u64 {
    100
}
fn ten() -> u64 {
    10
}
fn fifty() -> u64 {
    50
}
fn unity_tol() -> f64 {
    1e-12
}
fn recon_tol() -> f64 {
    1e-10
}
fn comp_tol() -> f64 {
    1e-14
}

impl Default for PartitionSection {
    fn default() -> Self {
        toml::from_str("").expect("all partition fields have defaults")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldFamily {
    /// One to three weighted point spikes.
    Spikes,
    WhiteNoise,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InequalitySection {
    #[serde(default = "sixty_four")]
    pub n: usize,
    #[serde(default = "tau")]
    pub length: f64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    /// `[p, q]` pairs; `inf` is accepted.
    #[serde(default = "default_exponents")]
    pub exponents: Vec<[f64; 2]>,
    #[serde(default = "spikes")]
    pub field: FieldFamily,
    /// Largest allowed `1 - min/max` of the per-shell upper constants.
    #[serde(default = "quarter")]
    pub max_spread: f64,
    /// Smallest allowed lower constant, one per alpha; empty means only `> 0`.
    #[serde(default)]
    pub lower_floors: Vec<f64>,
    #[serde(default = "yes")]
    pub log_interpolation: bool,
    #[serde(default = "eleven")]
    pub trajectory_samples: usize,
    #[serde(default = "twentieth")]
    pub trajectory_dt: f64,
    /// Ceiling on the implied interpolation constant, unchecked when absent.
    #[serde(default)]
    pub log_constant_ceiling: Option<f64>,
}

fn sixty_four() -> usize {
    64
}
fn default_seeds() -> Vec<u64> {
    (0..50).collect()
}
fn default_alphas() -> Vec<f64> {
    vec![0.0, 0.5, 1.0]
}
fn default_exponents() -> Vec<[f64; 2]> {
    vec![[2.0, 2.0], [2.0, f64::INFINITY], [1.0, 2.0]]
}
fn spikes() -> FieldFamily {
    FieldFamily::Spikes
}
fn quarter() -> f64 {
    0.25
}
fn yes() -> bool {
    true
}
fn eleven() -> usize {
    11
}
fn twentieth() -> f64 {
    0.05
}

impl Default for InequalitySection {
    fn default() -> Self {
        toml::from_str("").expect("all inequality fields have defaults")
    }
}

/// Solver settings shared by `simulate` and `uniqueness`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub n: usize,
    #[serde(default = "tau")]
    pub length: f64,
    pub nu: f64,
    pub time_step: TimeStep,
    pub t_end: f64,
    #[serde(default = "one_usize")]
    pub snapshot_stride: usize,
    pub initial: InitialData,
    #[serde(default = "yes")]
    pub dealias: bool,
    #[serde(default)]
    pub project_magnetic: bool,
    #[serde(default = "yes")]
    pub magnetic: bool,
    #[serde(default)]
    pub guard_ceiling: Option<f64>,
    /// Largest allowed divergence residual of `u` and `B` over the run.
    #[serde(default = "div_tol")]
    pub divergence_tolerance: f64,
}

fn div_tol() -> f64 {
    1e-10
}

fn one_usize() -> usize {
    1
}

impl SolverSection {
    /// Solver configuration with file paths resolved against `base`.
    pub fn solver_config(&self, base: &Path) -> Result<SolverConfig, CliError> {
        let grid = Grid2D::new(self.n, self.length).map_err(CliError::usage)?;
        let initial = match &self.initial {
            InitialData::File { path, t0 } => InitialData::File { path: resolve(base, path), t0: *t0 },
            other => other.clone(),
        };
        let c = SolverConfig {
            grid,
            nu: self.nu,
            time_step: self.time_step,
            t_end: self.t_end,
            dealias: self.dealias,
            snapshot_stride: self.snapshot_stride,
            initial,
            project_magnetic: self.project_magnetic,
            magnetic: self.magnetic,
            guard_ceiling: self.guard_ceiling,
        };
        c.validate().map_err(CliError::usage)?;
        Ok(c)
    }
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct UniquenessSection {
    pub solver: SolverSection,
    #[serde(default = "one_i32")]
    pub shell: i32,
    #[serde(default)]
    pub perturbation_seed: u64,
    #[serde(default = "both")]
    pub target: Target,
    pub epsilons: Vec<f64>,
    /// Term audit of the largest-epsilon pair at `t_end`.
    #[serde(default = "yes")]
    pub audit: bool,
    #[serde(default = "two")]
    pub audit_stride: usize,
}

fn one_i32() -> i32 {
    1
}
fn both() -> Target {
    Target::Both
}
fn two() -> usize {
    2
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSection {
    /// Overwrite one `phi` table sample on every partition.
    pub corrupt_phi: Option<CorruptPhi>,
    /// Multiply every Osgood envelope before comparing it with `X`.
    pub envelope_scale: Option<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CorruptPhi {
    pub j: i32,
    pub flat: usize,
    pub value: f64,
}

/// Parse and check the schema version.
pub fn parse(text: &str) -> Result<Config, CliError> {
    let config: Config = toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
    if config.schema_version != SCHEMA_VERSION {
        return Err(CliError::Usage(format!(
            "config schema_version {} is not supported (expected {SCHEMA_VERSION})",
            config.schema_version
        )));
    }
    Ok(config)
}
