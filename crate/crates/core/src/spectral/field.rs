use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;

use super::fft;
use super::grid::Grid2D;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Scalar field on the torus held as Fourier-series coefficients.
///
/// The coefficients satisfy `f(x) = sum_k c(k) e^{i k x}`, so `cos x` has
/// coefficients `1/2` at `k = (+-1, 0)` and Parseval reads
/// `||f||_2^2 = L^2 sum_k |c(k)|^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid2D,
    coeffs: Vec<Complex64>,
    real: bool,
}

impl SpectralField {
    pub fn zeros(grid: Grid2D) -> Self {
        Self { grid, coeffs: vec![ZERO; grid.len()], real: true }
    }

    /// Wrap raw coefficients. `real` asserts the field is real-valued in
    /// physical space (conjugate-symmetric coefficients).
    pub fn from_coeffs(grid: Grid2D, coeffs: Vec<Complex64>, real: bool) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Precondition(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs, real })
    }

    pub fn from_physical_real(grid: Grid2D, values: &[f64]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Precondition(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::forward(grid.n(), &mut data);
        Ok(Self { grid, coeffs: data, real: true })
    }

    pub fn from_physical(grid: Grid2D, values: &[Complex64]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Precondition(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        let mut data = values.to_vec();
        fft::forward(grid.n(), &mut data);
        Ok(Self { grid, coeffs: data, real: false })
    }

    /// Sample a real function at the grid nodes.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for ix in 0..n {
            let x = grid.coordinate(ix);
            for iy in 0..n {
                values.push(f(x, grid.coordinate(iy)));
            }
        }
        Self::from_physical_real(grid, &values).expect("sample count matches grid")
    }

    /// Single complex exponential `amplitude * e^{i (mx, my) . (2 pi / L) x}`.
    pub fn mode(grid: Grid2D, mx: i64, my: i64, amplitude: Complex64) -> Result<Self> {
        let idx = grid.flat_index(mx, my).ok_or_else(|| {
            Error::Precondition(format!("mode ({mx}, {my}) is outside the grid"))
        })?;
        let mut coeffs = vec![ZERO; grid.len()];
        coeffs[idx] = amplitude;
        let real = amplitude == ZERO;
        Ok(Self { grid, coeffs, real })
    }

    /// Real cosine mode `amplitude * cos((mx, my) . (2 pi / L) x)`.
    pub fn cosine_mode(grid: Grid2D, mx: i64, my: i64, amplitude: f64) -> Result<Self> {
        let half = Complex64::new(0.5 * amplitude, 0.0);
        let mut f = Self::mode(grid, mx, my, half)?;
        let partner = grid.flat_index(-mx, -my).ok_or_else(|| {
            Error::Precondition(format!("mode ({mx}, {my}) has no conjugate partner"))
        })?;
        f.coeffs[partner] += half;
        f.real = true;
        Ok(f)
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    #[inline]
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn coeff(&self, mx: i64, my: i64) -> Option<Complex64> {
        self.grid.flat_index(mx, my).map(|i| self.coeffs[i])
    }

    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    pub fn with_zero_mean(mut self) -> Self {
        self.coeffs[0] = ZERO;
        self
    }

    pub fn to_physical(&self) -> Vec<Complex64> {
        let mut data = self.coeffs.clone();
        fft::inverse(self.grid.n(), &mut data);
        data
    }

    /// Real part of the physical samples.
    pub fn to_physical_real(&self) -> Vec<f64> {
        self.to_physical().into_iter().map(|c| c.re).collect()
    }

    /// Multiply every coefficient by a real multiplier of the wavevector.
    pub fn apply_real_multiplier(&self, m: impl Fn(f64, f64) -> f64) -> Self {
        let grid = self.grid;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let (kx, ky) = grid.wavevector(i);
                c * m(kx, ky)
            })
            .collect();
        Self { grid, coeffs, real: self.real }
    }

    /// Multiply coefficient `i` by `table[i]`.
    pub fn apply_table(&self, table: &[f64]) -> Self {
        debug_assert_eq!(table.len(), self.coeffs.len());
        let coeffs = self.coeffs.iter().zip(table).map(|(c, w)| c * w).collect();
        Self { grid: self.grid, coeffs, real: self.real }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            real: self.real,
        }
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: f64, other: &Self) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b * factor).collect(),
            real: self.real && other.real,
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(self.axpy(1.0, other))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(self.axpy(-1.0, other))
    }

    /// Zero every mode outside the 2/3-rule band.
    pub fn dealiased(&self) -> Self {
        let grid = self.grid;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| if grid.is_retained(i) { *c } else { ZERO })
            .collect();
        Self { grid, coeffs, real: self.real }
    }

    /// True when no energy sits outside the 2/3-rule band.
    pub fn is_band_limited(&self) -> bool {
        self.coeffs.iter().enumerate().all(|(i, c)| self.grid.is_retained(i) || *c == ZERO)
    }

    /// `sum_k |c(k)|^2`, summed in buffer order.
    pub fn coefficient_energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `L^2` norm through Parseval.
    pub fn l2_norm_spectral(&self) -> f64 {
        self.grid.length() * self.coefficient_energy().sqrt()
    }

    /// Largest deviation from `c(-k) = conj(c(k))`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = 0.0f64;
        for ix in 0..n {
            let jx = (n - ix) % n;
            for iy in 0..n {
                let jy = (n - iy) % n;
                let d = (self.coeffs[ix * n + iy] - self.coeffs[jx * n + jy].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Max coefficient difference relative to the larger of the two max magnitudes.
    pub fn relative_difference(&self, other: &Self) -> f64 {
        let scale = self
            .coeffs
            .iter()
            .chain(&other.coeffs)
            .fold(0.0f64, |m, c| m.max(c.norm()));
        let diff = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch");
        self.axpy(1.0, rhs)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch");
        self.axpy(-1.0, rhs)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

/// Planar vector field; both components share one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField2D {
    pub x: SpectralField,
    pub y: SpectralField,
    divergence_free: bool,
}

/// Divergence tolerance behind the `divergence_free` flag.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-10;

impl VectorField2D {
    pub fn new(x: SpectralField, y: SpectralField) -> Result<Self> {
        x.grid().check_same(y.grid())?;
        Ok(Self { x, y, divergence_free: false })
    }

    /// Build a field flagged divergence-free, checking the flag against
    /// [`DIVERGENCE_TOLERANCE`].
    pub fn new_divergence_free(x: SpectralField, y: SpectralField) -> Result<Self> {
        let mut v = Self::new(x, y)?;
        let residual = super::ops::divergence_residual(&v);
        if residual > DIVERGENCE_TOLERANCE {
            return Err(Error::Precondition(format!(
                "field flagged divergence-free has residual {residual:e}"
            )));
        }
        v.divergence_free = true;
        Ok(v)
    }

    pub(crate) fn from_parts(x: SpectralField, y: SpectralField, divergence_free: bool) -> Self {
        debug_assert_eq!(x.grid(), y.grid());
        Self { x, y, divergence_free }
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self::from_parts(SpectralField::zeros(grid), SpectralField::zeros(grid), true)
    }

    /// `(-d_y psi, d_x psi)` for a stream function `psi`.
    pub fn from_stream_function(psi: &SpectralField) -> Self {
        let x = super::ops::spectral_derivative(psi, super::Axis::Y, 1).scale(-1.0);
        let y = super::ops::spectral_derivative(psi, super::Axis::X, 1);
        Self::from_parts(x, y, true)
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D {
        self.x.grid()
    }

    #[inline]
    pub fn is_divergence_free(&self) -> bool {
        self.divergence_free
    }

    pub fn components(&self) -> [&SpectralField; 2] {
        [&self.x, &self.y]
    }

    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField, keeps_divergence: bool) -> Self {
        Self::from_parts(f(&self.x), f(&self.y), self.divergence_free && keeps_divergence)
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|c| c.scale(factor), true)
    }

    pub fn axpy(&self, factor: f64, other: &Self) -> Self {
        Self::from_parts(
            self.x.axpy(factor, &other.x),
            self.y.axpy(factor, &other.y),
            self.divergence_free && other.divergence_free,
        )
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.grid().check_same(other.grid())?;
        Ok(self.axpy(-1.0, other))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.grid().check_same(other.grid())?;
        Ok(self.axpy(1.0, other))
    }

    pub fn dealiased(&self) -> Self {
        self.map(SpectralField::dealiased, true)
    }

    pub fn with_zero_mean(self) -> Self {
        let df = self.divergence_free;
        Self::from_parts(self.x.with_zero_mean(), self.y.with_zero_mean(), df)
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn coefficient_energy(&self) -> f64 {
        self.x.coefficient_energy() + self.y.coefficient_energy()
    }

    pub fn l2_norm_spectral(&self) -> f64 {
        self.grid().length() * self.coefficient_energy().sqrt()
    }

    pub fn relative_difference(&self, other: &Self) -> f64 {
        self.x.relative_difference(&other.x).max(self.y.relative_difference(&other.y))
    }
}
