//! Besov, Sobolev and mixed time-space (Chemin-Lerner) norms on the torus.
//!
//! Homogeneous norms sum `2^{sj} ||Delta_j f||_{L^p}` over the partition's
//! finite shell range; the `k = 0` mode never enters because `phi` vanishes
//! near the origin. Time integrals use the trapezoid rule on the recorded
//! sample instants.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::DyadicPartition;
use crate::spectral::{check_exponent, lp_norm_of_samples, Grid2D, SpectralField, VectorField2D};

/// Anything made of scalar spectral components; vector norms use the pointwise Euclidean length.
pub trait Components {
    fn parts(&self) -> Vec<&SpectralField>;

    fn grid(&self) -> &Grid2D {
        self.parts()[0].grid()
    }
}

impl Components for SpectralField {
    fn parts(&self) -> Vec<&SpectralField> {
        vec![self]
    }
}

impl Components for VectorField2D {
    fn parts(&self) -> Vec<&SpectralField> {
        vec![&self.x, &self.y]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovIndex {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub homogeneous: bool,
}

impl BesovIndex {
    pub fn homogeneous(s: f64, p: f64, q: f64) -> Self {
        Self { s, p, q, homogeneous: true }
    }

    pub fn inhomogeneous(s: f64, p: f64, q: f64) -> Self {
        Self { s, p, q, homogeneous: false }
    }

    pub fn validate(&self) -> Result<()> {
        check_exponent("p", self.p)?;
        check_exponent("q", self.q)?;
        if !self.s.is_finite() {
            return Err(Error::Exponent { name: "s", value: self.s, reason: "must be finite" });
        }
        Ok(())
    }
}

/// Mean-zero test used by the negative-regularity preconditions.
pub fn is_mean_zero<F: Components + ?Sized>(f: &F) -> bool {
    f.parts().iter().all(|c| {
        let mean = c.mean().norm();
        mean == 0.0 || mean <= 1e-13 * c.coefficient_energy().sqrt()
    })
}

/// `||Delta_j f||_{L^p}` for every shell of the partition, in shell order.
pub fn shell_lp_norms<F: Components + ?Sized>(f: &F, p: f64, partition: &DyadicPartition) -> Result<Vec<f64>> {
    check_exponent("p", p)?;
    let parts = f.parts();
    for c in &parts {
        c.grid().check_same(partition.grid())?;
    }
    let grid = *partition.grid();
    let out = partition
        .shells()
        .map(|j| {
            let table = partition.phi_table(j).expect("shell in range");
            if p == 2.0 {
                let sum: f64 = parts
                    .iter()
                    .map(|c| c.coeffs().iter().zip(table).map(|(a, w)| w * w * a.norm_sqr()).sum::<f64>())
                    .sum();
                grid.length() * sum.sqrt()
            } else {
                let samples: Vec<Vec<_>> = parts.iter().map(|c| c.apply_table(table).to_physical()).collect();
                let mags = (0..grid.len()).map(|i| samples.iter().map(|s| s[i].norm_sqr()).sum::<f64>().sqrt());
                lp_norm_of_samples(&grid, mags, p)
            }
        })
        .collect();
    Ok(out)
}

/// `l^q` norm of `2^{sj} a_j` over shells starting at `j_min`.
pub fn weighted_lq(values: &[f64], j_min: i32, s: f64, q: f64) -> f64 {
    let terms = values.iter().enumerate().map(|(i, v)| ((j_min + i as i32) as f64 * s).exp2() * v);
    if q.is_infinite() {
        terms.fold(0.0, f64::max)
    } else if q == 1.0 {
        terms.sum()
    } else {
        terms.map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

fn lp_norm_total<F: Components + ?Sized>(f: &F, p: f64) -> Result<f64> {
    let parts = f.parts();
    let grid = *parts[0].grid();
    if p == 2.0 {
        let e: f64 = parts.iter().map(|c| c.coefficient_energy()).sum();
        return Ok(grid.length() * e.sqrt());
    }
    let samples: Vec<Vec<_>> = parts.iter().map(|c| c.to_physical()).collect();
    let mags = (0..grid.len()).map(|i| samples.iter().map(|s| s[i].norm_sqr()).sum::<f64>().sqrt());
    Ok(lp_norm_of_samples(&grid, mags, p))
}

/// `||f||_{B^s_{p,q}}` (homogeneous or inhomogeneous per `idx`).
///
/// The inhomogeneous norm is `||f||_{L^p} + ||f||_{Bdot^s_{p,q}}`.
pub fn besov_norm<F: Components + ?Sized>(f: &F, idx: BesovIndex, partition: &DyadicPartition) -> Result<f64> {
    idx.validate()?;
    if idx.homogeneous && idx.s < 0.0 && !is_mean_zero(f) {
        return Err(Error::Precondition(format!(
            "homogeneous norm with s = {} needs a mean-zero field",
            idx.s
        )));
    }
    let shells = shell_lp_norms(f, idx.p, partition)?;
    let hom = weighted_lq(&shells, partition.j_min(), idx.s, idx.q);
    if idx.homogeneous {
        Ok(hom)
    } else {
        Ok(lp_norm_total(f, idx.p)? + hom)
    }
}

/// Homogeneous Sobolev norm `(L^2 sum_k |k|^{2s} |f(k)|^2)^{1/2}`; `s = 0` keeps the mean.
pub fn sobolev_norm<F: Components + ?Sized>(f: &F, s: f64) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::Exponent { name: "s", value: s, reason: "must be finite" });
    }
    if s < 0.0 && !is_mean_zero(f) {
        return Err(Error::Precondition(format!("Sobolev norm with s = {s} needs a mean-zero field")));
    }
    let parts = f.parts();
    let grid = *parts[0].grid();
    let mut sum = 0.0;
    for c in parts {
        for (i, a) in c.coeffs().iter().enumerate() {
            let k2 = {
                let (kx, ky) = grid.wavevector(i);
                kx * kx + ky * ky
            };
            let w = if s == 0.0 {
                1.0
            } else if k2 == 0.0 {
                0.0
            } else {
                k2.powf(s)
            };
            sum += w * a.norm_sqr();
        }
    }
    Ok(grid.length() * sum.sqrt())
}

/// Time-ordered samples of a field.
#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    times: Vec<f64>,
    snapshots: Vec<S>,
}

impl<S> Trajectory<S> {
    pub fn new(times: Vec<f64>, snapshots: Vec<S>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Trajectory("a trajectory needs at least one sample".into()));
        }
        if times.len() != snapshots.len() {
            return Err(Error::Trajectory(format!(
                "{} times but {} snapshots",
                times.len(),
                snapshots.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Trajectory("sample times must be finite and strictly increasing".into()));
        }
        Ok(Self { times, snapshots })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[S] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn map<T>(&self, f: impl Fn(&S) -> T) -> Trajectory<T> {
        Trajectory { times: self.times.clone(), snapshots: self.snapshots.iter().map(f).collect() }
    }

    pub fn push(&mut self, t: f64, snapshot: S) -> Result<()> {
        if !(t > *self.times.last().expect("nonempty")) {
            return Err(Error::Trajectory(format!("time {t} does not advance the trajectory")));
        }
        self.times.push(t);
        self.snapshots.push(snapshot);
        Ok(())
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<S>) {
        (self.times, self.snapshots)
    }
}

/// Trapezoid integral of `values` over `times[..=upto]`.
pub fn trapezoid(times: &[f64], values: &[f64], upto: usize) -> f64 {
    (1..=upto).map(|i| 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1])).sum()
}

fn time_lr(times: &[f64], values: &[f64], upto: usize, r: f64) -> f64 {
    if r.is_infinite() {
        values[..=upto].iter().copied().fold(0.0, f64::max)
    } else if r == 1.0 {
        trapezoid(times, values, upto)
    } else {
        let powered: Vec<f64> = values[..=upto].iter().map(|v| v.powf(r)).collect();
        trapezoid(times, &powered, upto).powf(1.0 / r)
    }
}

/// Per-sample, per-shell `||Delta_j f(t)||_{L^p}` table; every mixed norm
/// over a running interval `[t_0, t_i]` is computed from it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShellTable {
    pub times: Vec<f64>,
    pub j_min: i32,
    pub p: f64,
    /// `values[shell][sample]`.
    pub values: Vec<Vec<f64>>,
}

impl ShellTable {
    pub fn from_trajectory<F: Components>(
        traj: &Trajectory<F>,
        p: f64,
        partition: &DyadicPartition,
    ) -> Result<Self> {
        let per_sample: Vec<Vec<f64>> =
            traj.snapshots().iter().map(|f| shell_lp_norms(f, p, partition)).collect::<Result<_>>()?;
        Ok(Self::from_samples(traj.times().to_vec(), partition.j_min(), p, &per_sample))
    }

    /// Build from `per_sample[sample][shell]`.
    pub fn from_samples(times: Vec<f64>, j_min: i32, p: f64, per_sample: &[Vec<f64>]) -> Self {
        let shells = per_sample.first().map_or(0, Vec::len);
        let values = (0..shells).map(|j| per_sample.iter().map(|row| row[j]).collect()).collect();
        Self { times, j_min, p, values }
    }

    pub fn sample_count(&self) -> usize {
        self.times.len()
    }

    /// Per-shell time `L^r` norms on `[t_0, t_upto]`.
    pub fn shell_time_norms(&self, upto: usize, r: f64) -> Vec<f64> {
        self.values.iter().map(|v| time_lr(&self.times, v, upto, r)).collect()
    }

    /// `||f||_{L~^r([t_0, t_upto]; Bdot^s_{p,q})}`: time norm inside, shell sum outside.
    pub fn mixed_norm(&self, upto: usize, r: f64, s: f64, q: f64) -> f64 {
        weighted_lq(&self.shell_time_norms(upto, r), self.j_min, s, q)
    }

    /// `||f||_{L^r([t_0, t_upto]; Bdot^s_{p,q})}`: shell sum inside, time norm outside.
    pub fn time_outer_norm(&self, upto: usize, r: f64, s: f64, q: f64) -> f64 {
        let inst: Vec<f64> = (0..self.sample_count()).map(|i| self.instant_norm(i, s, q)).collect();
        time_lr(&self.times, &inst, upto, r)
    }

    /// `||f(t_i)||_{Bdot^s_{p,q}}`.
    pub fn instant_norm(&self, i: usize, s: f64, q: f64) -> f64 {
        let col: Vec<f64> = self.values.iter().map(|v| v[i]).collect();
        weighted_lq(&col, self.j_min, s, q)
    }

    /// CSV rows `t,j,weighted` with `weighted = 2^{sj} ||Delta_j f(t)||_{L^p}`.
    pub fn to_csv(&self, s: f64) -> String {
        let mut out = String::from("t,j,weighted\n");
        for (i, t) in self.times.iter().enumerate() {
            for (k, v) in self.values.iter().enumerate() {
                let j = self.j_min + k as i32;
                let _ = writeln!(out, "{:.17e},{},{:.17e}", t, j, (j as f64 * s).exp2() * v[i]);
            }
        }
        out
    }
}

fn require_homogeneous(idx: &BesovIndex) -> Result<()> {
    if idx.homogeneous {
        Ok(())
    } else {
        Err(Error::Precondition("mixed time-space norms are defined for homogeneous indices".into()))
    }
}

/// `||f||_{L~^r(I; Bdot^s_{p,q})}` over the whole trajectory interval.
pub fn mixed_norm<F: Components>(
    traj: &Trajectory<F>,
    r: f64,
    idx: BesovIndex,
    partition: &DyadicPartition,
) -> Result<f64> {
    check_exponent("r", r)?;
    idx.validate()?;
    require_homogeneous(&idx)?;
    if traj.len() < 2 && r.is_finite() {
        return Err(Error::Trajectory("a finite-r time norm needs at least two samples".into()));
    }
    let table = ShellTable::from_trajectory(traj, idx.p, partition)?;
    Ok(table.mixed_norm(traj.len() - 1, r, idx.s, idx.q))
}

/// `||f||_{L^r(I; Bdot^s_{p,q})}` with the time norm taken last.
pub fn time_outer_norm<F: Components>(
    traj: &Trajectory<F>,
    r: f64,
    idx: BesovIndex,
    partition: &DyadicPartition,
) -> Result<f64> {
    check_exponent("r", r)?;
    idx.validate()?;
    require_homogeneous(&idx)?;
    if traj.len() < 2 && r.is_finite() {
        return Err(Error::Trajectory("a finite-r time norm needs at least two samples".into()));
    }
    let table = ShellTable::from_trajectory(traj, idx.p, partition)?;
    Ok(table.time_outer_norm(traj.len() - 1, r, idx.s, idx.q))
}
