use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform `n x n` grid on the torus `[0, L)^2`.
///
/// Coefficient and sample buffers are row-major with the x index first:
/// entry `ix * n + iy` holds the mode `(mode(ix), mode(iy))` or the sample at
/// `(ix * h, iy * h)` with `h = L / n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    n: usize,
    length: f64,
}

impl Grid2D {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::GridSize { n, length, reason: "period length must be positive" });
        }
        if !n.is_power_of_two() {
            return Err(Error::GridSize { n, length, reason: "n must be a power of two" });
        }
        if n < 8 {
            return Err(Error::GridSize { n, length, reason: "n must be at least 8" });
        }
        Ok(Self { n, length })
    }

    /// `2 pi`-periodic grid.
    pub fn periodic(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of grid nodes, `n^2`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Quadrature weight of one node, `(L/n)^2`.
    #[inline]
    pub fn quadrature_weight(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    /// `2 pi / L`.
    #[inline]
    pub fn base_wavenumber(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Signed integer mode of a buffer index, in `{-n/2, ..., n/2 - 1}`.
    #[inline]
    pub fn mode(&self, index: usize) -> i64 {
        let half = self.n / 2;
        if index < half {
            index as i64
        } else {
            index as i64 - self.n as i64
        }
    }

    /// Buffer index of a signed integer mode; `None` outside `{-n/2, ..., n/2 - 1}`.
    #[inline]
    pub fn index_of_mode(&self, mode: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if mode < -half || mode >= half {
            None
        } else if mode >= 0 {
            Some(mode as usize)
        } else {
            Some((mode + self.n as i64) as usize)
        }
    }

    /// Flat buffer index of the mode pair `(mx, my)`.
    pub fn flat_index(&self, mx: i64, my: i64) -> Option<usize> {
        Some(self.index_of_mode(mx)? * self.n + self.index_of_mode(my)?)
    }

    /// Physical wavenumber of a buffer index.
    #[inline]
    pub fn wavenumber(&self, index: usize) -> f64 {
        self.mode(index) as f64 * self.base_wavenumber()
    }

    /// Per-axis wavenumbers in buffer (FFT) order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.wavenumber(i)).collect()
    }

    /// Per-axis wavenumbers in ascending order: `{-n/2, ..., n/2 - 1} * 2 pi / L`.
    pub fn sorted_wavenumbers(&self) -> Vec<f64> {
        let half = (self.n / 2) as i64;
        (-half..half).map(|m| m as f64 * self.base_wavenumber()).collect()
    }

    /// Wavevector `(kx, ky)` of the flat index.
    #[inline]
    pub fn wavevector(&self, flat: usize) -> (f64, f64) {
        (self.wavenumber(flat / self.n), self.wavenumber(flat % self.n))
    }

    /// Integer mode pair of the flat index.
    #[inline]
    pub fn modes(&self, flat: usize) -> (i64, i64) {
        (self.mode(flat / self.n), self.mode(flat % self.n))
    }

    #[inline]
    pub fn wavevector_norm(&self, flat: usize) -> f64 {
        let (kx, ky) = self.wavevector(flat);
        kx.hypot(ky)
    }

    /// Largest retained integer mode per axis under the 2/3 rule.
    #[inline]
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n as i64 - 1) / 3
    }

    #[inline]
    pub fn is_retained(&self, flat: usize) -> bool {
        let (mx, my) = self.modes(flat);
        let cut = self.dealias_cutoff();
        mx.abs() <= cut && my.abs() <= cut
    }

    /// True for modes on the unpaired Nyquist row or column.
    #[inline]
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let half = self.n / 2;
        flat / self.n == half || flat % self.n == half
    }

    /// Physical coordinate of a node index along one axis.
    #[inline]
    pub fn coordinate(&self, index: usize) -> f64 {
        index as f64 * self.spacing()
    }

    /// Largest `|k|` over all grid modes.
    pub fn max_wavevector_norm(&self) -> f64 {
        let half = (self.n / 2) as f64;
        half * std::f64::consts::SQRT_2 * self.base_wavenumber()
    }

    /// Largest `|k|` over the modes kept by the 2/3 rule.
    pub fn max_retained_norm(&self) -> f64 {
        self.dealias_cutoff() as f64 * std::f64::consts::SQRT_2 * self.base_wavenumber()
    }

    pub(crate) fn check_same(&self, other: &Grid2D) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch { left_n: self.n, right_n: other.n })
        }
    }
}
