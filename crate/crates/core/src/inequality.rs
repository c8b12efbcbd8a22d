//! Empirical constants of the harmonic-analysis inequalities used by the
//! uniqueness argument: Bernstein bounds, the logarithmic interpolation
//! inequality, Bony's decomposition, frequency-localized commutators and the
//! `Bdot^1_{2,1}` product law.
//!
//! Every constant is measured on the torus and carries the grid metadata it
//! was measured on; none of them is a whole-space constant.

use serde::{Deserialize, Serialize};

use crate::besov::{besov_norm, BesovIndex, Components, ShellTable, Trajectory};
use crate::error::{Error, Result};
use crate::estimate::{BreakdownRow, EstimateReport};
use crate::partition::DyadicPartition;
use crate::spectral::{
    advect_samples, dealiased_product, dealiased_samples, divergence_residual, fractional_laplacian, lp_norm,
    spectral_derivative, spectral_from_samples, Axis, SampledGradient, SampledVector, SpectralField, VectorField2D,
    DIVERGENCE_TOLERANCE,
};

fn grid_meta(report: EstimateReport, partition: &DyadicPartition) -> EstimateReport {
    let g = partition.grid();
    report.with_meta("n", g.n() as u64).with_meta("length", g.length())
}

/// Upper and lower Bernstein ratios for one shell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BernsteinReport {
    /// `||(-Lap)^a Delta_j f||_q` against `2^{2aj + 2j(1/p - 1/q)} ||Delta_j f||_p`.
    pub upper: EstimateReport,
    /// `||(-Lap)^a Delta_j f||_q` against `2^{2aj} ||Delta_j f||_q`.
    pub lower: EstimateReport,
}

pub fn bernstein_report(
    f: &SpectralField,
    j: i32,
    alpha: f64,
    p: f64,
    q: f64,
    partition: &DyadicPartition,
) -> Result<BernsteinReport> {
    if p > q {
        return Err(Error::Exponent { name: "p", value: p, reason: "Bernstein bounds need p <= q" });
    }
    let block = partition.dyadic_block(f, j);
    let lifted = fractional_laplacian(&block, alpha)?;
    let lhs = lp_norm(&lifted, q)?;
    let inv = |e: f64| if e.is_infinite() { 0.0 } else { 1.0 / e };
    let jf = j as f64;
    let upper_weight = (2.0 * alpha * jf + 2.0 * jf * (inv(p) - inv(q))).exp2();
    let lower_weight = (2.0 * alpha * jf).exp2();
    let (block_p, block_q) = if block.is_zero() { (0.0, 0.0) } else { (lp_norm(&block, p)?, lp_norm(&block, q)?) };
    let tag = |r: EstimateReport| {
        grid_meta(r, partition).with_meta("j", j).with_meta("alpha", alpha).with_meta("p", p).with_meta("q", q)
    };
    Ok(BernsteinReport {
        upper: tag(EstimateReport::new("bernstein_upper", lhs, upper_weight * block_p)),
        lower: tag(EstimateReport::new("bernstein_lower", lhs, lower_weight * block_q)),
    })
}

/// Measured sides of the logarithmic interpolation inequality and the replayed
/// three-way shell split of its proof.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogInterpolationReport {
    /// `int ||f||_{Bdot^1_{2,1}}` against
    /// `(A_1 + A_{-1}) log(e + (A_0 + A_2) / (A_1 + A_{-1}))`.
    pub estimate: EstimateReport,
    /// `||f||_{L~^1 Bdot^0_{2,inf}}`.
    pub a0: f64,
    /// `||f||_{L~^1 Bdot^1_{2,inf}}`.
    pub a1: f64,
    /// `||f||_{L^inf Bdot^{-1}_{2,inf}}`.
    pub a_minus1: f64,
    /// `||f||_{L~^1 Bdot^2_{2,inf}}`.
    pub a2: f64,
    /// `log(e + (A_0 + A_2)/(A_1 + A_{-1}))`.
    pub n_real: f64,
    /// `ceil(n_real)`.
    pub n_split: i32,
    /// `2^-N A_0 + 2N A_1 + 2^-N A_2` at `N = n_split - 1, n_split, n_split + 1`.
    pub split_neighbourhood: [(i32, f64); 3],
    /// Integer `N` in `[0, j_max]` minimizing the split bound, and the minimum.
    pub split_optimum: (i32, f64),
    /// The actual low / middle / high partial sums at `n_split`.
    pub split_parts: [f64; 3],
    /// Whether the partial sums respect their bounds at `n_split`, counting the
    /// middle band by the number of torus shells in `[-N, N]`.
    pub split_holds: bool,
}

impl LogInterpolationReport {
    pub fn split_at(&self, n: i32) -> f64 {
        split_bound(n, self.a0, self.a1, self.a2)
    }

    /// `split(n_split) / min_N split(N)`.
    pub fn split_optimality_ratio(&self) -> f64 {
        let at = self.split_neighbourhood[1].1;
        if self.split_optimum.1 == 0.0 {
            if at == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            at / self.split_optimum.1
        }
    }
}

fn split_bound(n: i32, a0: f64, a1: f64, a2: f64) -> f64 {
    let w = (-(n as f64)).exp2();
    w * a0 + 2.0 * n as f64 * a1 + w * a2
}

pub fn log_interp_report<F: Components>(
    traj: &Trajectory<F>,
    partition: &DyadicPartition,
) -> Result<LogInterpolationReport> {
    if traj.len() < 2 {
        return Err(Error::Trajectory("the interpolation inequality needs at least two samples".into()));
    }
    for f in traj.snapshots() {
        if !crate::besov::is_mean_zero(f) {
            return Err(Error::Precondition("the interpolation inequality needs a mean-zero trajectory".into()));
        }
    }
    let table = ShellTable::from_trajectory(traj, 2.0, partition)?;
    Ok(log_interp_from_table(&table, traj.len() - 1, partition))
}

/// Same as [`log_interp_report`] on an already tabulated trajectory, over `[t_0, t_upto]`.
pub fn log_interp_from_table(table: &ShellTable, upto: usize, partition: &DyadicPartition) -> LogInterpolationReport {
    let inf = f64::INFINITY;
    let lhs = table.time_outer_norm(upto, 1.0, 1.0, 1.0);
    let a0 = table.mixed_norm(upto, 1.0, 0.0, inf);
    let a1 = table.mixed_norm(upto, 1.0, 1.0, inf);
    let a_minus1 = table.mixed_norm(upto, inf, -1.0, inf);
    let a2 = table.mixed_norm(upto, 1.0, 2.0, inf);
    let denom = a1 + a_minus1;
    let (n_real, rhs) = if denom > 0.0 {
        let n = (std::f64::consts::E + (a0 + a2) / denom).ln();
        (n, denom * n)
    } else {
        (1.0, 0.0)
    };
    let n_split = n_real.ceil() as i32;
    let neighbourhood = [n_split - 1, n_split, n_split + 1].map(|n| (n, split_bound(n, a0, a1, a2)));
    let top = partition.j_max().max(0);
    let split_optimum = (0..=top)
        .map(|n| (n, split_bound(n, a0, a1, a2)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });

    let integrals = table.shell_time_norms(upto, 1.0);
    let mut parts = [0.0; 3];
    let mut middle_count = 0usize;
    for (i, v) in integrals.iter().enumerate() {
        let j = table.j_min + i as i32;
        let w = (j as f64).exp2() * v;
        if j < -n_split {
            parts[0] += w;
        } else if j > n_split {
            parts[2] += w;
        } else {
            parts[1] += w;
            middle_count += 1;
        }
    }
    let edge = (-(n_split as f64)).exp2();
    let tol = 1e-12 * lhs.max(1e-300);
    let split_holds = parts[0] <= edge * a0 + tol
        && parts[1] <= middle_count as f64 * a1 + tol
        && parts[2] <= edge * a2 + tol;

    let breakdown = neighbourhood
        .iter()
        .chain(std::iter::once(&split_optimum))
        .map(|&(n, v)| BreakdownRow { label: format!("split N={n}"), lhs, rhs: v })
        .collect();
    let estimate = grid_meta(EstimateReport::new("log_interpolation", lhs, rhs), partition)
        .with_breakdown(breakdown)
        .with_meta("n_split", n_split)
        .with_meta("j_min", partition.j_min())
        .with_meta("j_max", partition.j_max());
    LogInterpolationReport {
        estimate,
        a0,
        a1,
        a_minus1,
        a2,
        n_real,
        n_split,
        split_neighbourhood: neighbourhood,
        split_optimum,
        split_parts: parts,
        split_holds,
    }
}

/// Bony's paraproduct split of a dealiased product.
#[derive(Clone, Debug, PartialEq)]
pub struct Paraproducts {
    /// `sum_k S_{k-1} f . Delta_k g`.
    pub low_high: SpectralField,
    /// `sum_k Delta_k f . S_{k-1} g`.
    pub high_low: SpectralField,
    /// `sum_k Delta_k f . (Delta_{k-1} + Delta_k + Delta_{k+1}) g`.
    pub remainder: SpectralField,
}

impl Paraproducts {
    pub fn total(&self) -> SpectralField {
        self.low_high.axpy(1.0, &self.high_low).axpy(1.0, &self.remainder)
    }
}

pub fn bony_decompose(f: &SpectralField, g: &SpectralField, partition: &DyadicPartition) -> Result<Paraproducts> {
    f.grid().check_same(g.grid())?;
    f.grid().check_same(partition.grid())?;
    if !(f.is_real() && g.is_real()) {
        return Err(Error::Precondition("paraproducts are computed for real fields".into()));
    }
    if !(crate::besov::is_mean_zero(f) && crate::besov::is_mean_zero(g)) {
        return Err(Error::Precondition("paraproducts need mean-zero factors".into()));
    }
    let grid = *f.grid();
    let len = grid.len();
    let mut acc = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for k in partition.shells() {
        let df = dealiased_samples(&partition.dyadic_block(f, k));
        let dg = dealiased_samples(&partition.dyadic_block(g, k));
        let sf = dealiased_samples(&partition.low_pass(f, k - 1));
        let sg = dealiased_samples(&partition.low_pass(g, k - 1));
        let wg = dealiased_samples(&partition.widened_block(g, k));
        for i in 0..len {
            acc[0][i] += sf[i] * dg[i];
            acc[1][i] += df[i] * sg[i];
            acc[2][i] += df[i] * wg[i];
        }
    }
    let [lh, hl, rem] = acc;
    Ok(Paraproducts {
        low_high: spectral_from_samples(grid, &lh),
        high_low: spectral_from_samples(grid, &hl),
        remainder: spectral_from_samples(grid, &rem),
    })
}

fn check_solenoidal(u: &VectorField2D) -> Result<()> {
    let r = divergence_residual(u);
    if r > DIVERGENCE_TOLERANCE {
        return Err(Error::Precondition(format!("advecting field has divergence residual {r:e}")));
    }
    Ok(())
}

/// `Delta_j (u . grad f) - u . grad (Delta_j f)`, products dealiased.
pub fn commutator_field(
    u: &VectorField2D,
    f: &SpectralField,
    j: i32,
    partition: &DyadicPartition,
) -> Result<SpectralField> {
    check_solenoidal(u)?;
    u.grid().check_same(f.grid())?;
    let grid = *f.grid();
    let s = SampledVector::of(u);
    let full = spectral_from_samples(grid, &advect_samples(&s, &SampledGradient::of(f)));
    let block = partition.dyadic_block(f, j);
    let inner = spectral_from_samples(grid, &advect_samples(&s, &SampledGradient::of(&block)));
    Ok(partition.dyadic_block(&full, j).axpy(-1.0, &inner))
}

/// `sup_x |grad u(x)|` with the pointwise Frobenius norm.
pub fn gradient_sup(u: &VectorField2D) -> f64 {
    let gx = SampledGradient::of(&u.x);
    let gy = SampledGradient::of(&u.y);
    (0..u.grid().len())
        .map(|i| (gx.dx[i].powi(2) + gx.dy[i].powi(2) + gy.dx[i].powi(2) + gy.dy[i].powi(2)).sqrt())
        .fold(0.0, f64::max)
}

/// Sup of the pointwise Euclidean length.
pub fn vector_sup(u: &VectorField2D) -> f64 {
    let s = SampledVector::of(u);
    s.x.iter().zip(&s.y).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max)
}

/// `||[Delta_j, S_{k-1} u . grad] Delta_k f||_2` against `||grad u||_inf ||Delta_k f||_2`.
pub fn commutator_report(
    u: &VectorField2D,
    f: &SpectralField,
    j: i32,
    k: i32,
    partition: &DyadicPartition,
) -> Result<EstimateReport> {
    let low = u.map(|c| partition.low_pass(c, k - 1), true);
    let block = partition.dyadic_block(f, k);
    let comm = commutator_field(&low, &block, j, partition)?;
    let rhs = gradient_sup(u) * block.l2_norm_spectral();
    Ok(grid_meta(EstimateReport::new("commutator", comm.l2_norm_spectral(), rhs), partition)
        .with_meta("j", j)
        .with_meta("k", k))
}

/// `||Delta_j (u . grad f)||_2` against `||u||_inf ||Delta_j f||_2`: the bound
/// without the commutator structure, which loses a factor `2^j`.
pub fn naive_advection_report(
    u: &VectorField2D,
    f: &SpectralField,
    j: i32,
    partition: &DyadicPartition,
) -> Result<EstimateReport> {
    let grid = *f.grid();
    let s = SampledVector::of(u);
    let adv = spectral_from_samples(grid, &advect_samples(&s, &SampledGradient::of(f)));
    let lhs = partition.dyadic_block(&adv, j).l2_norm_spectral();
    let rhs = vector_sup(u) * partition.dyadic_block(f, j).l2_norm_spectral();
    Ok(grid_meta(EstimateReport::new("naive_advection", lhs, rhs), partition).with_meta("j", j))
}

/// `||f g||_{Bdot^1_{2,1}}` against `||f||_{Bdot^1_{2,1}} ||g||_{Bdot^1_{2,1}}`.
pub fn product_estimate_report(
    f: &SpectralField,
    g: &SpectralField,
    partition: &DyadicPartition,
) -> Result<EstimateReport> {
    if !(crate::besov::is_mean_zero(f) && crate::besov::is_mean_zero(g)) {
        return Err(Error::Precondition("the product law is measured on mean-zero factors".into()));
    }
    let idx = BesovIndex::homogeneous(1.0, 2.0, 1.0);
    let prod = dealiased_product(f, g)?;
    let lhs = besov_norm(&prod, idx, partition)?;
    let rhs = besov_norm(f, idx, partition)? * besov_norm(g, idx, partition)?;
    Ok(grid_meta(EstimateReport::new("product_b1_21", lhs, rhs), partition))
}

/// Spatially constant vector field.
pub fn constant_vector(grid: crate::spectral::Grid2D, ux: f64, uy: f64) -> VectorField2D {
    let x = SpectralField::from_fn(grid, |_, _| ux);
    let y = SpectralField::from_fn(grid, |_, _| uy);
    VectorField2D::new_divergence_free(x, y).expect("constant fields are solenoidal")
}

/// `d_x f` shortcut used by sweeps.
pub fn dx(f: &SpectralField) -> SpectralField {
    spectral_derivative(f, Axis::X, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{band_field, band_vector, white_noise_band_limited};
    use crate::spectral::Grid2D;
    use num_complex::Complex64;

    fn part(n: usize) -> DyadicPartition {
        DyadicPartition::with_default_profile(Grid2D::periodic(n).unwrap())
    }

    #[test]
    fn bernstein_exact_single_mode() {
        let p = part(32);
        // |k| = 2^j: the block is a multiple of the mode and every ratio is 1.
        let f = SpectralField::cosine_mode(*p.grid(), 4, 0, 1.0).unwrap();
        let r = bernstein_report(&f, 2, 1.0, 2.0, 2.0, &p).unwrap();
        assert!((r.upper.constant().unwrap() - 1.0).abs() < 1e-12);
        assert!((r.lower.constant().unwrap() - 1.0).abs() < 1e-12);
        let r0 = bernstein_report(&f, 2, 0.0, 2.0, 2.0, &p).unwrap();
        assert!((r0.upper.constant().unwrap() - 1.0).abs() < 1e-12);
        let rinf = bernstein_report(&f, 2, 0.0, f64::INFINITY, f64::INFINITY, &p).unwrap();
        assert!((rinf.lower.constant().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bernstein_rejects_and_vacuous() {
        let p = part(16);
        let f = SpectralField::cosine_mode(*p.grid(), 1, 0, 1.0).unwrap();
        assert!(bernstein_report(&f, 0, 0.5, f64::INFINITY, 2.0, &p).is_err());
        let r = bernstein_report(&f, 3, 0.5, 2.0, 2.0, &p).unwrap();
        assert!(r.upper.is_vacuous() && r.lower.is_vacuous());
    }

    #[test]
    fn paraproducts_vanish_for_separated_shells() {
        let p = part(256);
        let g0 = *p.grid();
        let f = SpectralField::cosine_mode(g0, 2, 2, 1.0).unwrap();
        let g = SpectralField::cosine_mode(g0, 64, 64, 1.0).unwrap();
        let b = bony_decompose(&f, &g, &p).unwrap();
        let prod = dealiased_product(&f, &g).unwrap();
        let scale = prod.l2_norm_spectral();
        assert!(b.high_low.l2_norm_spectral() <= 1e-10 * scale);
        assert!(b.remainder.l2_norm_spectral() <= 1e-10 * scale);
        assert!(b.low_high.axpy(-1.0, &prod).l2_norm_spectral() <= 1e-10 * scale);
    }

    #[test]
    fn paraproducts_of_a_mode_with_itself() {
        let p = part(32);
        let f = SpectralField::cosine_mode(*p.grid(), 3, 1, 1.0).unwrap();
        let b = bony_decompose(&f, &f, &p).unwrap();
        let prod = dealiased_product(&f, &f).unwrap();
        assert!(b.total().axpy(-1.0, &prod).l2_norm_spectral() <= 1e-10 * prod.l2_norm_spectral());
        let z = SpectralField::zeros(*p.grid());
        let b = bony_decompose(&f, &z, &p).unwrap();
        assert!(b.low_high.is_zero() && b.high_low.is_zero() && b.remainder.is_zero());
    }

    #[test]
    fn commutator_with_constant_advection_vanishes() {
        let p = part(32);
        let u = constant_vector(*p.grid(), 0.7, -1.3);
        let f = white_noise_band_limited(*p.grid(), 5);
        for j in p.shells() {
            let c = commutator_field(&u, &f, j, &p).unwrap();
            assert!(c.l2_norm_spectral() <= 1e-12 * f.l2_norm_spectral());
        }
        let z = SpectralField::zeros(*p.grid());
        let uv = band_vector(*p.grid(), 2, 0, 1, p.profile());
        assert!(commutator_field(&uv, &z, 1, &p).unwrap().is_zero());
    }

    #[test]
    fn commutator_rejects_compressible_advection() {
        let p = part(16);
        let phi = band_field(*p.grid(), 1, 0, 1, p.profile());
        let grad = VectorField2D::new(dx(&phi), spectral_derivative(&phi, Axis::Y, 1)).unwrap();
        let f = SpectralField::cosine_mode(*p.grid(), 1, 1, 1.0).unwrap();
        assert!(commutator_field(&grad, &f, 0, &p).is_err());
    }

    #[test]
    fn product_law_vacuous_on_zero() {
        let p = part(16);
        let f = band_field(*p.grid(), 4, 0, 1, p.profile());
        let z = SpectralField::zeros(*p.grid());
        assert!(product_estimate_report(&f, &z, &p).unwrap().is_vacuous());
        let one = SpectralField::mode(*p.grid(), 0, 0, Complex64::new(1.0, 0.0)).unwrap();
        assert!(product_estimate_report(&f, &one, &p).is_err());
    }
}
