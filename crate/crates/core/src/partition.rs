//! Littlewood-Paley partition of unity and the dyadic block operators.
//!
//! `chi` is a radial `C^infinity` step, identically 1 on `|xi| <= 3/4` and 0 on
//! `|xi| >= 4/3`; `phi(xi) = chi(xi/2) - chi(xi)` is then supported in
//! `3/4 <= |xi| <= 8/3`. Blocks act as Fourier multipliers:
//! `Delta_j = phi(2^-j D)`, `S_j = chi(2^-j D)`, so `S_{j+1} - S_j = Delta_j`
//! and `S_j = sum_{k <= j-1} Delta_k`.
//!
//! Shell bounds cover every nonzero grid frequency, so the truncated
//! homogeneous sum `sum_{j_min..=j_max} phi(2^-j xi)` equals 1 on the grid.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::spectral::{dealiased_product, Grid2D, SpectralField};

/// Transition profiles of the partition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Profile {
    smoothness: f64,
}

pub const CHI_PLATEAU: f64 = 0.75;
pub const CHI_SUPPORT: f64 = 4.0 / 3.0;
pub const PHI_INNER: f64 = 0.75;
pub const PHI_OUTER: f64 = 8.0 / 3.0;

impl Profile {
    /// `smoothness = s` uses the mollifier `exp(-s/x)`; `s = 1` is the textbook choice.
    pub fn new(smoothness: f64) -> Result<Self> {
        if !(smoothness.is_finite() && smoothness > 0.0) {
            return Err(Error::Precondition(format!("smoothness must be positive, got {smoothness}")));
        }
        Ok(Self { smoothness })
    }

    pub fn smoothness(&self) -> f64 {
        self.smoothness
    }

    fn mollifier(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            (-self.smoothness / x).exp()
        }
    }

    /// Smooth step from 0 at `t <= 0` to 1 at `t >= 1`.
    fn step(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        let a = self.mollifier(t);
        let b = self.mollifier(1.0 - t);
        a / (a + b)
    }

    pub fn chi(&self, r: f64) -> f64 {
        let r = r.abs();
        if r <= CHI_PLATEAU {
            1.0
        } else if r >= CHI_SUPPORT {
            0.0
        } else {
            self.step((CHI_SUPPORT - r) / (CHI_SUPPORT - CHI_PLATEAU))
        }
    }

    pub fn phi(&self, r: f64) -> f64 {
        self.chi(0.5 * r) - self.chi(r)
    }
}

impl Default for Profile {
    fn default() -> Self {
        Self { smoothness: 1.0 }
    }
}

/// `phi` and `chi` sampled on one grid's frequencies for every relevant shell.
#[derive(Clone, Debug)]
pub struct DyadicPartition {
    grid: Grid2D,
    profile: Profile,
    j_min: i32,
    j_max: i32,
    /// `phi(2^-j |k|)` for `j` in `j_min..=j_max`.
    phi_tables: Vec<Vec<f64>>,
    /// `chi(2^-j |k|)` for `j` in `j_min-1..=j_max+1`.
    chi_tables: Vec<Vec<f64>>,
}

fn scaled(j: i32, r: f64) -> f64 {
    (-(j as f64)).exp2() * r
}

impl DyadicPartition {
    pub fn new(grid: Grid2D, profile: Profile) -> Self {
        let r_min = grid.base_wavenumber();
        let r_max = grid.max_wavevector_norm();
        let nonzero = |j: i32, r: f64| profile.phi(scaled(j, r)) > 0.0;
        let j_min = (-80..80).find(|&j| nonzero(j, r_min)).expect("shell below 2^80");
        let j_max = (-80..80).rev().find(|&j| nonzero(j, r_max)).expect("shell below 2^80");
        let norms: Vec<f64> = (0..grid.len()).map(|i| grid.wavevector_norm(i)).collect();
        let table = |f: &dyn Fn(f64) -> f64, j: i32| -> Vec<f64> {
            norms.iter().map(|&r| f(scaled(j, r))).collect()
        };
        let phi_tables = (j_min..=j_max).map(|j| table(&|x| profile.phi(x), j)).collect();
        let chi_tables = (j_min - 1..=j_max + 1).map(|j| table(&|x| profile.chi(x), j)).collect();
        Self { grid, profile, j_min, j_max, phi_tables, chi_tables }
    }

    pub fn with_default_profile(grid: Grid2D) -> Self {
        Self::new(grid, Profile::default())
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    #[inline]
    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    #[inline]
    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    #[inline]
    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn shells(&self) -> RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    pub fn shell_count(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }

    /// Largest shell with support inside the 2/3-rule band.
    pub fn j_max_retained(&self) -> i32 {
        let r = self.grid.max_retained_norm();
        self.shells().rev().find(|&j| self.profile.phi(scaled(j, r)) > 0.0).unwrap_or(self.j_min)
    }

    pub fn phi_table(&self, j: i32) -> Option<&[f64]> {
        if (self.j_min..=self.j_max).contains(&j) {
            Some(&self.phi_tables[(j - self.j_min) as usize])
        } else {
            None
        }
    }

    /// `chi(2^-j |k|)` on every grid mode.
    pub fn chi_table(&self, j: i32) -> std::borrow::Cow<'_, [f64]> {
        if (self.j_min - 1..=self.j_max + 1).contains(&j) {
            std::borrow::Cow::Borrowed(&self.chi_tables[(j - self.j_min + 1) as usize])
        } else {
            let grid = self.grid;
            std::borrow::Cow::Owned(
                (0..grid.len()).map(|i| self.profile.chi(scaled(j, grid.wavevector_norm(i)))).collect(),
            )
        }
    }

    /// `Delta_j f`; the zero field for shells outside `j_min..=j_max`.
    pub fn dyadic_block(&self, f: &SpectralField, j: i32) -> SpectralField {
        debug_assert_eq!(f.grid(), &self.grid);
        match self.phi_table(j) {
            Some(t) => f.apply_table(t),
            None => f.scale(0.0),
        }
    }

    /// `S_j f = chi(2^-j D) f`.
    pub fn low_pass(&self, f: &SpectralField, j: i32) -> SpectralField {
        debug_assert_eq!(f.grid(), &self.grid);
        f.apply_table(&self.chi_table(j))
    }

    /// `Delta_{k-1} + Delta_k + Delta_{k+1}`.
    pub fn widened_block(&self, f: &SpectralField, k: i32) -> SpectralField {
        let n = self.grid.len();
        let mut w = vec![0.0; n];
        for j in (k - 1)..=(k + 1) {
            if let Some(t) = self.phi_table(j) {
                for (acc, v) in w.iter_mut().zip(t) {
                    *acc += v;
                }
            }
        }
        f.apply_table(&w)
    }

    /// Whether `Delta_j (S_{k-1} f . Delta_k f)` vanishes relative to the product.
    pub fn support_audit(&self, f: &SpectralField, j: i32, k: i32) -> Result<bool> {
        let low = self.low_pass(f, k - 1);
        let high = self.dyadic_block(f, k);
        let product = dealiased_product(&low, &high)?;
        let scale = product.l2_norm_spectral();
        if scale == 0.0 {
            return Ok(true);
        }
        let block = self.dyadic_block(&product, j).l2_norm_spectral();
        Ok(block <= SUPPORT_TOLERANCE * scale)
    }

    /// Largest `|chi(xi) + sum_{j >= 0} phi(2^-j xi) - 1|` over grid frequencies.
    pub fn inhomogeneous_residual(&self) -> f64 {
        let grid = self.grid;
        let mut worst = 0.0f64;
        for i in 0..grid.len() {
            let r = grid.wavevector_norm(i);
            let mut sum = self.profile.chi(r);
            for j in 0..=self.j_max.max(0) {
                sum += self.phi_table(j).map_or_else(|| self.profile.phi(scaled(j, r)), |t| t[i]);
            }
            worst = worst.max((sum - 1.0).abs());
        }
        worst
    }

    /// Largest `|sum_{j_min..=j_max} phi(2^-j xi) - 1|` over nonzero grid frequencies.
    pub fn homogeneous_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 1..self.grid.len() {
            let sum: f64 = self.phi_tables.iter().map(|t| t[i]).sum();
            worst = worst.max((sum - 1.0).abs());
        }
        worst
    }

    /// `[min, max]` of `sum_j phi(2^-j xi)^2` over nonzero grid frequencies;
    /// bounds `sum_j ||Delta_j f||^2 / ||f||^2` for mean-zero `f`.
    pub fn energy_overlap_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for i in 1..self.grid.len() {
            let s: f64 = self.phi_tables.iter().map(|t| t[i] * t[i]).sum();
            lo = lo.min(s);
            hi = hi.max(s);
        }
        (lo, hi)
    }

    /// Profiles as CSV rows `xi,chi,phi` on `samples` equispaced points of `[0, xi_max]`.
    pub fn profiles_csv(&self, xi_max: f64, samples: usize) -> String {
        let mut out = String::from("xi,chi,phi\n");
        let steps = samples.max(2) - 1;
        for i in 0..=steps {
            let xi = xi_max * i as f64 / steps as f64;
            let _ = writeln!(out, "{:.17e},{:.17e},{:.17e}", xi, self.profile.chi(xi), self.profile.phi(xi));
        }
        out
    }

    /// Overwrite one cached `phi` sample. Fault-injection hook for invariant checks.
    #[doc(hidden)]
    pub fn corrupt_phi_sample(&mut self, j: i32, flat: usize, value: f64) {
        if let Some(t) = self.phi_tables.get_mut((j - self.j_min) as usize) {
            t[flat] = value;
        }
    }
}

/// Relative tolerance of [`DyadicPartition::support_audit`].
pub const SUPPORT_TOLERANCE: f64 = 1e-10;
