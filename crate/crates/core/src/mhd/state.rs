use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{divergence_residual, gradient_energy, Grid2D, SpectralField, VectorField2D, DIVERGENCE_TOLERANCE};

/// Velocity and magnetic field at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct MhdState {
    pub u: VectorField2D,
    pub b: VectorField2D,
    pub t: f64,
    pub nu: f64,
}

pub(crate) fn check_viscosity(nu: f64) -> Result<()> {
    if nu.is_finite() && nu > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("viscosity must be positive, got {nu}")))
    }
}

fn zero_mean_exact(v: VectorField2D) -> VectorField2D {
    let solenoidal = v.is_divergence_free();
    let clear = |f: &SpectralField| {
        let mut g = f.clone();
        g.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
        g
    };
    v.map(clear, solenoidal)
}

impl MhdState {
    /// Checks grids, viscosity and solenoidality; mean modes are set to exactly zero.
    pub fn new(u: VectorField2D, b: VectorField2D, t: f64, nu: f64) -> Result<Self> {
        u.grid().check_same(b.grid())?;
        check_viscosity(nu)?;
        for (name, v) in [("u", &u), ("B", &b)] {
            let r = divergence_residual(v);
            if r > DIVERGENCE_TOLERANCE {
                return Err(Error::Precondition(format!("{name} has divergence residual {r:e}")));
            }
            if !(v.x.is_real() && v.y.is_real()) {
                return Err(Error::Precondition(format!("{name} must be a real field")));
            }
        }
        let u = VectorField2D::new_divergence_free(u.x, u.y)?;
        let b = VectorField2D::new_divergence_free(b.x, b.y)?;
        Ok(Self { u: zero_mean_exact(u), b: zero_mean_exact(b), t, nu })
    }

    pub fn zeros(grid: Grid2D, nu: f64) -> Result<Self> {
        Self::new(VectorField2D::zeros(grid), VectorField2D::zeros(grid), 0.0, nu)
    }

    pub fn grid(&self) -> &Grid2D {
        self.u.grid()
    }

    /// `(u_x, u_y, B_x, B_y)`.
    pub fn components(&self) -> [&SpectralField; 4] {
        [&self.u.x, &self.u.y, &self.b.x, &self.b.y]
    }

    /// `E = (||u||_2^2 + ||B||_2^2) / 2`.
    pub fn energy(&self) -> f64 {
        let l2 = self.grid().length().powi(2);
        0.5 * l2 * (self.u.coefficient_energy() + self.b.coefficient_energy())
    }

    /// `||grad u||_2^2`.
    pub fn velocity_gradient_energy(&self) -> f64 {
        gradient_energy(&self.u.x) + gradient_energy(&self.u.y)
    }
}
