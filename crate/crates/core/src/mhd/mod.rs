//! Pseudo-spectral integrator for viscous, non-resistive incompressible MHD
//!
//! ```text
//! d_t u + u.grad u + grad p - nu Lap u = B.grad B
//! d_t B + u.grad B - B.grad u = 0
//! div u = div B = 0
//! ```
//!
//! on the torus. Time stepping is classical RK4 in the integrating-factor
//! variables `e^{nu |k|^2 t} u(k)`, so viscosity is treated exactly and only the
//! advective CFL restricts `dt`. Quadratic terms are dealiased with the 2/3
//! rule and the pressure is removed by Leray projection.

mod initial;
mod io;
mod solver;
mod state;

pub use initial::{initial_data, magnetic_seed, InitialData};
pub use io::{
    encode_blob, monitors_csv, read_blob, read_manifest, read_trajectory, snapshot_name, snapshot_path,
    write_trajectory, write_trajectory_data, TrajectoryManifest, BLOB_MAGIC, MANIFEST_FILE, MONITORS_FILE,
};
pub use solver::{
    cumulative_integral, energy_identity_residual, integrate, integrate_from, monitor_row, nonlinear_rhs, step,
    Integration, MonitorRow, RunStatus, SolverConfig, TimeStep, CFL_LIMIT,
};
pub use state::MhdState;
