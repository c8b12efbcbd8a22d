use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Grid size must be a power of two and at least 8; period must be positive.
    #[error("invalid grid: n = {n}, length = {length} ({reason})")]
    GridSize { n: usize, length: f64, reason: &'static str },

    #[error("fields live on different grids ({left_n} vs {right_n} points per axis)")]
    GridMismatch { left_n: usize, right_n: usize },

    #[error("invalid exponent {name} = {value}: {reason}")]
    Exponent { name: &'static str, value: f64, reason: &'static str },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("trajectory error: {0}")]
    Trajectory(String),

    #[error("non-finite value in {context} at mode ({kx}, {ky})")]
    NonFinite { context: &'static str, kx: i64, ky: i64 },

    #[error("step rejected at t = {t}: CFL number {cfl:.3} exceeds limit {limit:.3}")]
    StepRejected { t: f64, cfl: f64, limit: f64 },

    #[error("blow-up guard tripped at t = {t}: monitored norm {value}")]
    GuardTripped { t: f64, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed field blob: {0}")]
    Blob(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
