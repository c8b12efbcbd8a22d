use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::io::read_blob;
use super::state::MhdState;
use crate::error::Result;
use crate::partition::Profile;
use crate::random::band_vector;
use crate::spectral::{leray_project, Grid2D, SpectralField, VectorField2D};

fn one() -> f64 {
    1.0
}

/// Named initial-data generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialData {
    /// `u = A (sin x cos y, -cos x sin y)`, `B = 0`.
    TaylorGreen {
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `u = A (-sin y, sin x)`, `B = A (-sin y, sin 2x)`.
    OrszagTangLike {
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Seeded divergence-free fields spread over shells `j_lo..=j_hi`, scaled to
    /// the given `L^2` norms.
    RandomBand {
        seed: u64,
        j_lo: i32,
        j_hi: i32,
        #[serde(default = "one")]
        u_norm: f64,
        #[serde(default = "one")]
        b_norm: f64,
    },
    /// A `PMHD1` snapshot blob.
    File {
        path: PathBuf,
        #[serde(default)]
        t0: f64,
    },
    Zero,
}

/// Seed of the magnetic component of a random-band state.
pub fn magnetic_seed(seed: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15
}

pub fn initial_data(kind: &InitialData, grid: Grid2D, nu: f64) -> Result<MhdState> {
    let w = grid.base_wavenumber();
    let field = |f: &dyn Fn(f64, f64) -> f64| SpectralField::from_fn(grid, f);
    match kind {
        InitialData::TaylorGreen { amplitude: a } => {
            let u = VectorField2D::new(
                field(&|x, y| a * (w * x).sin() * (w * y).cos()),
                field(&|x, y| -a * (w * x).cos() * (w * y).sin()),
            )?;
            MhdState::new(u, VectorField2D::zeros(grid), 0.0, nu)
        }
        InitialData::OrszagTangLike { amplitude: a } => {
            let u = VectorField2D::new(field(&|_, y| -a * (w * y).sin()), field(&|x, _| a * (w * x).sin()))?;
            let b = VectorField2D::new(field(&|_, y| -a * (w * y).sin()), field(&|x, _| a * (2.0 * w * x).sin()))?;
            MhdState::new(leray_project(&u), leray_project(&b), 0.0, nu)
        }
        InitialData::RandomBand { seed, j_lo, j_hi, u_norm, b_norm } => {
            let p = Profile::default();
            let u = band_vector(grid, *seed, *j_lo, *j_hi, &p).scale(*u_norm);
            let b = band_vector(grid, magnetic_seed(*seed), *j_lo, *j_hi, &p).scale(*b_norm);
            MhdState::new(leray_project(&u), leray_project(&b), 0.0, nu)
        }
        InitialData::File { path, t0 } => {
            let bytes = std::fs::read(path)?;
            let (u, b) = read_blob(&bytes, grid)?;
            MhdState::new(u, b, *t0, nu)
        }
        InitialData::Zero => MhdState::zeros(grid, nu),
    }
}
