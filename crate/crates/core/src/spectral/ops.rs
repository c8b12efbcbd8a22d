use num_complex::Complex64;

use super::field::{SpectralField, VectorField2D};
use super::fft;
use super::grid::Grid2D;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Inverse transform followed by forward transform.
pub fn transform_roundtrip(f: &SpectralField) -> SpectralField {
    let grid = *f.grid();
    let mut data = f.to_physical();
    if f.is_real() {
        for c in &mut data {
            c.im = 0.0;
        }
    }
    fft::forward(grid.n(), &mut data);
    SpectralField::from_coeffs(grid, data, f.is_real()).expect("same grid")
}

/// Multiply by `(i k_axis)^order`; odd orders zero the Nyquist row/column.
pub fn spectral_derivative(f: &SpectralField, axis: Axis, order: u32) -> SpectralField {
    if order == 0 {
        return f.clone();
    }
    let grid = *f.grid();
    let n = grid.n();
    let odd = order % 2 == 1;
    let half = n / 2;
    let ik_pow = |k: f64| -> Complex64 { Complex64::new(0.0, k).powu(order) };
    let mut out = f.clone();
    for (i, c) in out.coeffs_mut().iter_mut().enumerate() {
        let (ix, iy) = (i / n, i % n);
        let axis_index = match axis {
            Axis::X => ix,
            Axis::Y => iy,
        };
        if odd && axis_index == half {
            *c = ZERO;
            continue;
        }
        *c *= ik_pow(grid.wavenumber(axis_index));
    }
    out
}

/// Multiply by `|k|^{2 alpha}`; the mean maps to zero for `alpha > 0`.
pub fn fractional_laplacian(f: &SpectralField, alpha: f64) -> Result<SpectralField> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Exponent { name: "alpha", value: alpha, reason: "must be a finite non-negative real" });
    }
    if alpha == 0.0 {
        return Ok(f.clone());
    }
    Ok(f.apply_real_multiplier(|kx, ky| {
        let k2 = kx * kx + ky * ky;
        if k2 == 0.0 {
            0.0
        } else {
            k2.powf(alpha)
        }
    }))
}

/// Leray projector `v -> v - k (k . v) / |k|^2` on every nonzero mode.
pub fn leray_project(v: &VectorField2D) -> VectorField2D {
    let grid = *v.grid();
    let mut x = v.x.clone();
    let mut y = v.y.clone();
    {
        let xs = x.coeffs_mut();
        let ys = y.coeffs_mut();
        for i in 0..grid.len() {
            let (kx, ky) = grid.wavevector(i);
            let k2 = kx * kx + ky * ky;
            if k2 == 0.0 {
                continue;
            }
            let dot = xs[i] * kx + ys[i] * ky;
            xs[i] -= dot * (kx / k2);
            ys[i] -= dot * (ky / k2);
        }
    }
    VectorField2D::from_parts(x, y, true)
}

/// Spectral divergence `i k . v`.
pub fn divergence(v: &VectorField2D) -> SpectralField {
    let dx = spectral_derivative(&v.x, Axis::X, 1);
    let dy = spectral_derivative(&v.y, Axis::Y, 1);
    dx.axpy(1.0, &dy)
}

/// `max_k |k . v(k)| / ||v||_2`, zero for the zero field.
pub fn divergence_residual(v: &VectorField2D) -> f64 {
    let grid = *v.grid();
    let norm = v.l2_norm_spectral();
    if norm == 0.0 {
        return 0.0;
    }
    let xs = v.x.coeffs();
    let ys = v.y.coeffs();
    let mut worst = 0.0f64;
    for i in 0..grid.len() {
        let (kx, ky) = grid.wavevector(i);
        worst = worst.max((xs[i] * kx + ys[i] * ky).norm());
    }
    worst / norm
}

/// Grid-quadrature `L^p` norm of the physical samples; `p = INFINITY` is the grid max.
pub fn lp_norm(f: &SpectralField, p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    let samples = f.to_physical();
    Ok(lp_norm_of_samples(f.grid(), samples.iter().map(|c| c.norm()), p))
}

pub(crate) fn check_exponent(name: &'static str, p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Exponent { name, value: p, reason: "must be at least 1" });
    }
    Ok(())
}

/// `L^p` norm from pointwise magnitudes, summed in buffer order.
pub(crate) fn lp_norm_of_samples(grid: &Grid2D, magnitudes: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p.is_infinite() {
        return magnitudes.fold(0.0, f64::max);
    }
    let w = grid.quadrature_weight();
    if p == 1.0 {
        return w * magnitudes.sum::<f64>();
    }
    if p == 2.0 {
        return (w * magnitudes.map(|m| m * m).sum::<f64>()).sqrt();
    }
    (w * magnitudes.map(|m| m.powf(p)).sum::<f64>()).powf(1.0 / p)
}

/// Physical samples of a real field after 2/3-rule truncation.
pub(crate) fn dealiased_samples(f: &SpectralField) -> Vec<f64> {
    let mut data: Vec<Complex64> = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| if f.grid().is_retained(i) { *c } else { ZERO })
        .collect();
    fft::inverse(f.grid().n(), &mut data);
    data.into_iter().map(|c| c.re).collect()
}

/// Forward transform of real samples followed by 2/3-rule truncation.
pub(crate) fn spectral_from_samples(grid: Grid2D, samples: &[f64]) -> SpectralField {
    let mut data: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::forward(grid.n(), &mut data);
    for (i, c) in data.iter_mut().enumerate() {
        if !grid.is_retained(i) {
            *c = ZERO;
        }
    }
    SpectralField::from_coeffs(grid, data, true).expect("same grid")
}

/// Dealiased pointwise product: both factors truncated to the 2/3 band,
/// multiplied in physical space, transformed back and truncated again.
pub fn dealiased_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.grid().check_same(g.grid())?;
    let grid = *f.grid();
    if f.is_real() && g.is_real() {
        let a = dealiased_samples(f);
        let b = dealiased_samples(g);
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        return Ok(spectral_from_samples(grid, &prod));
    }
    let a = f.dealiased().to_physical();
    let b = g.dealiased().to_physical();
    let prod: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    Ok(SpectralField::from_physical(grid, &prod)?.dealiased())
}

/// Physical samples of a real vector field and its gradient, all dealiased.
pub(crate) struct SampledVector {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl SampledVector {
    pub fn of(v: &VectorField2D) -> Self {
        Self { x: dealiased_samples(&v.x), y: dealiased_samples(&v.y) }
    }
}

/// Samples of `d_x f` and `d_y f`.
pub(crate) struct SampledGradient {
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
}

impl SampledGradient {
    pub fn of(f: &SpectralField) -> Self {
        Self {
            dx: dealiased_samples(&spectral_derivative(f, Axis::X, 1)),
            dy: dealiased_samples(&spectral_derivative(f, Axis::Y, 1)),
        }
    }
}

/// Samples of `a . grad f` with `a` and `grad f` already sampled.
pub(crate) fn advect_samples(a: &SampledVector, grad: &SampledGradient) -> Vec<f64> {
    a.x.iter()
        .zip(&a.y)
        .zip(grad.dx.iter().zip(&grad.dy))
        .map(|((ax, ay), (gx, gy))| ax * gx + ay * gy)
        .collect()
}

/// Dealiased `a . grad f` for a real scalar `f`.
pub fn advect_scalar(a: &VectorField2D, f: &SpectralField) -> Result<SpectralField> {
    a.grid().check_same(f.grid())?;
    let s = SampledVector::of(a);
    let g = SampledGradient::of(f);
    Ok(spectral_from_samples(*f.grid(), &advect_samples(&s, &g)))
}

/// Dealiased `(a . grad) b` for real vector fields.
pub fn advect_vector(a: &VectorField2D, b: &VectorField2D) -> Result<VectorField2D> {
    a.grid().check_same(b.grid())?;
    let s = SampledVector::of(a);
    let gx = SampledGradient::of(&b.x);
    let gy = SampledGradient::of(&b.y);
    let grid = *a.grid();
    Ok(VectorField2D::from_parts(
        spectral_from_samples(grid, &advect_samples(&s, &gx)),
        spectral_from_samples(grid, &advect_samples(&s, &gy)),
        false,
    ))
}

/// `||grad f||_2^2` through Parseval.
pub fn gradient_energy(f: &SpectralField) -> f64 {
    let grid = *f.grid();
    let sum: f64 = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let (kx, ky) = grid.wavevector(i);
            (kx * kx + ky * ky) * c.norm_sqr()
        })
        .sum();
    grid.length() * grid.length() * sum
}
