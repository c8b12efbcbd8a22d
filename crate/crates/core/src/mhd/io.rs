//! Trajectory persistence.
//!
//! Snapshot blob layout (little endian):
//!
//! | bytes | content |
//! |-------|---------|
//! | 5 | magic `PMHD1` |
//! | 8 | `n` as `u64` |
//! | `4 * n^2 * 16` | `u_x, u_y, B_x, B_y`, each `n x n` row-major `(re, im)` `f64` pairs |
//!
//! A trajectory directory holds `manifest.json`, one blob per snapshot and
//! `monitors.csv`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::solver::{Integration, MonitorRow, RunStatus, SolverConfig};
use super::state::MhdState;
use crate::besov::Trajectory;
use crate::error::{Error, Result};
use crate::spectral::{Grid2D, SpectralField, VectorField2D};

pub const BLOB_MAGIC: &[u8; 5] = b"PMHD1";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const MONITORS_FILE: &str = "monitors.csv";

pub fn encode_blob(state: &MhdState) -> Vec<u8> {
    let n = state.grid().n();
    let mut out = Vec::with_capacity(13 + 64 * n * n);
    out.extend_from_slice(BLOB_MAGIC);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    for c in state.components() {
        for z in c.coeffs() {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

/// Decode a blob onto `grid`; a different `n` is an error.
pub fn read_blob(bytes: &[u8], grid: Grid2D) -> Result<(VectorField2D, VectorField2D)> {
    if bytes.len() < 13 || &bytes[..5] != BLOB_MAGIC {
        return Err(Error::Blob("missing PMHD1 header".into()));
    }
    let n = u64::from_le_bytes(bytes[5..13].try_into().expect("8 bytes")) as usize;
    if n != grid.n() {
        return Err(Error::GridMismatch { left_n: n, right_n: grid.n() });
    }
    let len = n * n;
    if bytes.len() != 13 + 64 * len {
        return Err(Error::Blob(format!("expected {} bytes, found {}", 13 + 64 * len, bytes.len())));
    }
    let f64_at = |off: usize| f64::from_le_bytes(bytes[off..off + 8].try_into().expect("8 bytes"));
    let mut fields = (0..4).map(|c| {
        let coeffs: Vec<Complex64> = (0..len)
            .map(|i| {
                let off = 13 + 16 * (c * len + i);
                Complex64::new(f64_at(off), f64_at(off + 8))
            })
            .collect();
        SpectralField::from_coeffs(grid, coeffs, true)
    });
    let mut next = || fields.next().expect("four components");
    let u = VectorField2D::new(next()?, next()?)?;
    let b = VectorField2D::new(next()?, next()?)?;
    Ok((u, b))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    pub n: usize,
    pub length: f64,
    pub nu: f64,
    /// Fixed step, absent for adaptive runs.
    pub dt: Option<f64>,
    pub steps: usize,
    pub times: Vec<f64>,
    pub snapshots: Vec<String>,
    pub monitors: String,
    #[serde(flatten)]
    pub status: RunStatus,
}

pub fn monitors_csv(rows: &[MonitorRow]) -> String {
    let mut out = String::from("t,energy,u_b0_21,u_bdot2_21,b_b1_21,grad_u_sq,div_u,div_b\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            r.t, r.energy, r.u_b0_21, r.u_bdot2_21, r.b_b1_21, r.grad_u_sq, r.div_u, r.div_b
        );
    }
    out
}

pub fn snapshot_name(index: usize) -> String {
    format!("snapshot_{index:05}.pmhd")
}

/// Write blobs and the monitor log; returns the manifest without writing it.
pub fn write_trajectory_data(dir: &Path, run: &Integration, config: &SolverConfig) -> Result<TrajectoryManifest> {
    std::fs::create_dir_all(dir)?;
    let mut names = Vec::with_capacity(run.trajectory.len());
    for (i, s) in run.trajectory.snapshots().iter().enumerate() {
        let name = snapshot_name(i);
        std::fs::write(dir.join(&name), encode_blob(s))?;
        names.push(name);
    }
    std::fs::write(dir.join(MONITORS_FILE), monitors_csv(&run.monitors))?;
    Ok(TrajectoryManifest {
        n: config.grid.n(),
        length: config.grid.length(),
        nu: config.nu,
        dt: config.fixed_dt(),
        steps: run.steps,
        times: run.trajectory.times().to_vec(),
        snapshots: names,
        monitors: MONITORS_FILE.into(),
        status: run.status,
    })
}

/// Write a complete trajectory directory including `manifest.json`.
pub fn write_trajectory(dir: &Path, run: &Integration, config: &SolverConfig) -> Result<TrajectoryManifest> {
    let manifest = write_trajectory_data(dir, run, config)?;
    std::fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}

/// Read the manifest; a wrapping object with a `trajectory` member is accepted too.
pub fn read_manifest(dir: &Path) -> Result<TrajectoryManifest> {
    let text = std::fs::read_to_string(dir.join(MANIFEST_FILE))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let inner = value.get("trajectory").cloned().unwrap_or(value);
    Ok(serde_json::from_value(inner)?)
}

pub fn snapshot_path(dir: &Path, manifest: &TrajectoryManifest, index: usize) -> Result<PathBuf> {
    manifest
        .snapshots
        .get(index)
        .map(|s| dir.join(s))
        .ok_or_else(|| Error::Trajectory(format!("snapshot {index} is not in the manifest")))
}

pub fn read_trajectory(dir: &Path) -> Result<(TrajectoryManifest, Trajectory<MhdState>)> {
    let m = read_manifest(dir)?;
    let grid = Grid2D::new(m.n, m.length)?;
    if m.times.len() != m.snapshots.len() {
        return Err(Error::Trajectory("manifest times and snapshots differ in length".into()));
    }
    let states = m
        .snapshots
        .iter()
        .zip(&m.times)
        .map(|(name, &t)| {
            let (u, b) = read_blob(&std::fs::read(dir.join(name))?, grid)?;
            MhdState::new(u, b, t, m.nu)
        })
        .collect::<Result<Vec<_>>>()?;
    let traj = Trajectory::new(m.times.clone(), states)?;
    Ok((m, traj))
}
