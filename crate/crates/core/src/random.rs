//! Seeded random fields.
//!
//! Band-limited generators draw coefficients over a fixed integer mode box in a
//! fixed order, independent of the grid size, so the same seed describes the
//! same continuous field on every grid that resolves it.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::partition::{Profile, PHI_OUTER};
use crate::spectral::{Grid2D, SpectralField, VectorField2D};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// i.i.d. standard normal samples at every node.
pub fn white_noise(grid: Grid2D, seed: u64) -> SpectralField {
    let mut r = rng(seed);
    let values: Vec<f64> = (0..grid.len()).map(|_| normal(&mut r)).collect();
    SpectralField::from_physical_real(grid, &values).expect("sample count matches grid")
}

/// White noise with the mean removed.
pub fn white_noise_mean_zero(grid: Grid2D, seed: u64) -> SpectralField {
    white_noise(grid, seed).with_zero_mean()
}

/// White noise truncated to the 2/3-rule band, mean removed.
pub fn white_noise_band_limited(grid: Grid2D, seed: u64) -> SpectralField {
    white_noise(grid, seed).dealiased().with_zero_mean()
}

/// Real field with Gaussian coefficients weighted by `sum_{j_lo..=j_hi} phi(2^-j |k|)`.
pub fn band_field(grid: Grid2D, seed: u64, j_lo: i32, j_hi: i32, profile: &Profile) -> SpectralField {
    let base = grid.base_wavenumber();
    let box_radius = ((j_hi as f64).exp2() * PHI_OUTER / base).ceil() as i64;
    let half = (grid.n() / 2) as i64;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut r = rng(seed);
    for mx in -box_radius..=box_radius {
        for my in -box_radius..=box_radius {
            if !(mx > 0 || (mx == 0 && my > 0)) {
                continue;
            }
            let c = Complex64::new(normal(&mut r), normal(&mut r)) * std::f64::consts::FRAC_1_SQRT_2;
            let k = (mx as f64).hypot(my as f64) * base;
            let w: f64 = (j_lo..=j_hi).map(|j| profile.phi((-(j as f64)).exp2() * k)).sum();
            if w == 0.0 || mx.abs() >= half || my.abs() >= half {
                continue;
            }
            let (Some(i), Some(ic)) = (grid.flat_index(mx, my), grid.flat_index(-mx, -my)) else {
                continue;
            };
            coeffs[i] = c * w;
            coeffs[ic] = (c * w).conj();
        }
    }
    SpectralField::from_coeffs(grid, coeffs, true).expect("same grid")
}

/// Divergence-free band field `grad^perp psi` with `psi` from [`band_field`],
/// scaled to unit `L^2` norm (zero stays zero).
pub fn band_vector(grid: Grid2D, seed: u64, j_lo: i32, j_hi: i32, profile: &Profile) -> VectorField2D {
    let psi = band_field(grid, seed, j_lo, j_hi, profile);
    let v = VectorField2D::from_stream_function(&psi);
    let norm = v.l2_norm_spectral();
    if norm == 0.0 {
        v
    } else {
        v.scale(1.0 / norm)
    }
}

/// Sum of 1 to 3 weighted point spikes at random nodes (before any block is applied).
pub fn random_spikes(grid: Grid2D, seed: u64) -> SpectralField {
    let mut r = rng(seed);
    let count = r.random_range(1..=3);
    let mut values = vec![0.0; grid.len()];
    for _ in 0..count {
        let at = r.random_range(0..grid.len());
        values[at] += normal(&mut r);
    }
    SpectralField::from_physical_real(grid, &values).expect("sample count matches grid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_field_is_grid_independent() {
        let p = Profile::default();
        let a = band_field(Grid2D::periodic(32).unwrap(), 11, 0, 2, &p);
        let b = band_field(Grid2D::periodic(64).unwrap(), 11, 0, 2, &p);
        for mx in -10i64..=10 {
            for my in -10i64..=10 {
                assert_eq!(a.coeff(mx, my), b.coeff(mx, my));
            }
        }
        assert!(a.conjugate_symmetry_defect() == 0.0);
        assert_eq!(a.mean(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn seeds_are_reproducible() {
        let g = Grid2D::periodic(16).unwrap();
        assert_eq!(white_noise(g, 3), white_noise(g, 3));
        assert_ne!(white_noise(g, 3), white_noise(g, 4));
        assert_eq!(random_spikes(g, 9), random_spikes(g, 9));
    }

    #[test]
    fn band_vector_unit_and_solenoidal() {
        let g = Grid2D::periodic(32).unwrap();
        let v = band_vector(g, 5, 0, 1, &Profile::default());
        assert!((v.l2_norm_spectral() - 1.0).abs() < 1e-12);
        assert!(crate::spectral::divergence_residual(&v) < 1e-14);
    }
}
