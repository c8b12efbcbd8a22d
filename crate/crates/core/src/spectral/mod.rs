//! Periodic grid, Fourier-series fields and the spectral operators built on them.
//!
//! The whole plane is replaced by the torus `[0, L)^2`. Coefficients use the
//! Fourier-series normalization `f(x) = sum_k c(k) e^{i k x}` with explicit
//! quadrature weight `(L/n)^2`, so every norm carries the units of the torus.

mod fft;
mod field;
mod grid;
mod ops;

pub use field::{SpectralField, VectorField2D, DIVERGENCE_TOLERANCE};
pub use grid::Grid2D;
pub use ops::{
    advect_scalar, advect_vector, dealiased_product, divergence, divergence_residual,
    fractional_laplacian, gradient_energy, leray_project, lp_norm, spectral_derivative,
    transform_roundtrip, Axis,
};

pub(crate) use fft::{forward as fft_forward, inverse as fft_inverse};
pub(crate) use ops::{
    advect_samples, check_exponent, dealiased_samples, lp_norm_of_samples, spectral_from_samples,
    SampledGradient, SampledVector,
};
