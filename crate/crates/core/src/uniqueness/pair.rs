use serde::{Deserialize, Serialize};

use crate::besov::{shell_lp_norms, ShellTable, Trajectory};
use crate::error::{Error, Result};
use crate::mhd::{integrate_from, magnetic_seed, Integration, MhdState, RunStatus, SolverConfig};
use crate::partition::{DyadicPartition, Profile};
use crate::random::band_vector;
use crate::spectral::{divergence_residual, VectorField2D, DIVERGENCE_TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Velocity,
    Magnetic,
    Both,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Perturbation {
    /// Added to `(u_0, B_0)`.
    Field { du: VectorField2D, db: VectorField2D },
    /// `epsilon` times a unit-`L^2` seeded field living in one shell.
    Shell { shell: i32, epsilon: f64, seed: u64, target: Target },
}

impl Perturbation {
    pub fn fields(&self, base: &MhdState) -> Result<(VectorField2D, VectorField2D)> {
        let grid = *base.grid();
        let zero = VectorField2D::zeros(grid);
        let (du, db) = match self {
            Perturbation::Field { du, db } => (du.clone(), db.clone()),
            Perturbation::Shell { shell, epsilon, seed, target } => {
                if !(epsilon.is_finite() && *epsilon >= 0.0) {
                    return Err(Error::Precondition(format!("perturbation size must be nonnegative, got {epsilon}")));
                }
                let p = Profile::default();
                let vel = || band_vector(grid, *seed, *shell, *shell, &p).scale(*epsilon);
                let mag = || band_vector(grid, magnetic_seed(*seed), *shell, *shell, &p).scale(*epsilon);
                match target {
                    Target::Velocity => (vel(), zero.clone()),
                    Target::Magnetic => (zero.clone(), mag()),
                    Target::Both => (vel(), mag()),
                }
            }
        };
        for v in [&du, &db] {
            v.grid().check_same(&grid)?;
            if divergence_residual(v) > DIVERGENCE_TOLERANCE {
                return Err(Error::Precondition("perturbation must be divergence-free".into()));
            }
            if !crate::besov::is_mean_zero(v) {
                return Err(Error::Precondition("perturbation must be mean-zero".into()));
            }
        }
        Ok((du, db))
    }

    pub fn apply(&self, base: &MhdState) -> Result<MhdState> {
        let (du, db) = self.fields(base)?;
        MhdState::new(base.u.try_add(&du)?, base.b.try_add(&db)?, base.t, base.nu)
    }
}

/// Two runs on a common time grid and their differences `delta = run1 - run2`.
#[derive(Clone, Debug)]
pub struct PairTrajectory {
    pub run1: Trajectory<MhdState>,
    pub run2: Trajectory<MhdState>,
    pub delta_u: Vec<VectorField2D>,
    pub delta_b: Vec<VectorField2D>,
    pub nu: f64,
    /// Completed only if both runs completed.
    pub status: RunStatus,
}

impl PairTrajectory {
    /// Pair two integrations; a guarded run truncates the pair to the common prefix.
    pub fn from_runs(a: &Integration, b: &Integration) -> Result<Self> {
        let n = a.trajectory.len().min(b.trajectory.len());
        let cut = |t: &Trajectory<MhdState>| {
            Trajectory::new(t.times()[..n].to_vec(), t.snapshots()[..n].to_vec())
        };
        let status = match (a.status, b.status) {
            (RunStatus::Completed, RunStatus::Completed) => RunStatus::Completed,
            (RunStatus::GuardTripped { t, value }, _) | (_, RunStatus::GuardTripped { t, value }) => {
                RunStatus::GuardTripped { t, value }
            }
        };
        let mut pair = Self::from_trajectories(cut(&a.trajectory)?, cut(&b.trajectory)?)?;
        pair.status = status;
        Ok(pair)
    }

    /// Pair two trajectories sampled at identical times.
    pub fn from_trajectories(run1: Trajectory<MhdState>, run2: Trajectory<MhdState>) -> Result<Self> {
        if run1.times() != run2.times() {
            return Err(Error::Trajectory("paired runs must share their time grid".into()));
        }
        let s1 = run1.snapshots();
        let s2 = run2.snapshots();
        s1[0].grid().check_same(s2[0].grid())?;
        if s1.iter().chain(s2).any(|s| s.nu != s1[0].nu) {
            return Err(Error::Trajectory("paired runs must share the viscosity".into()));
        }
        let delta_u = s1.iter().zip(s2).map(|(x, y)| x.u.try_sub(&y.u)).collect::<Result<_>>()?;
        let delta_b = s1.iter().zip(s2).map(|(x, y)| x.b.try_sub(&y.b)).collect::<Result<_>>()?;
        let nu = s1[0].nu;
        Ok(Self { run1, run2, delta_u, delta_b, nu, status: RunStatus::Completed })
    }

    pub fn times(&self) -> &[f64] {
        self.run1.times()
    }

    pub fn len(&self) -> usize {
        self.run1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.run1.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.status == RunStatus::Completed
    }

    /// Sample index of the last time `<= t`.
    pub fn index_at(&self, t: f64) -> usize {
        let times = self.times();
        let slack = 1e-9 * (times[times.len() - 1] - times[0]).abs().max(f64::MIN_POSITIVE);
        times.partition_point(|&s| s <= t + slack).saturating_sub(1)
    }
}

fn require_fixed_dt(config: &SolverConfig) -> Result<()> {
    if config.fixed_dt().is_none() {
        return Err(Error::Config("paired runs need a fixed time step".into()));
    }
    Ok(())
}

/// Run the base state and its perturbation with identical numerics.
pub fn run_pair(base: &MhdState, perturbation: &Perturbation, config: &SolverConfig) -> Result<PairTrajectory> {
    require_fixed_dt(config)?;
    let other = perturbation.apply(base)?;
    let a = integrate_from(base.clone(), config)?;
    let b = integrate_from(other, config)?;
    PairTrajectory::from_runs(&a, &b)
}

/// Pair a finished base run with a perturbed run.
pub(crate) fn run_against(
    base_run: &Integration,
    perturbation: &Perturbation,
    config: &SolverConfig,
) -> Result<PairTrajectory> {
    require_fixed_dt(config)?;
    let base = &base_run.trajectory.snapshots()[0];
    let b = integrate_from(perturbation.apply(base)?, config)?;
    PairTrajectory::from_runs(base_run, &b)
}

/// Per-sample `L^2` shell tables of every field entering the difference estimates.
#[derive(Clone, Debug)]
pub struct PairTables {
    pub du: ShellTable,
    pub db: ShellTable,
    pub u1: ShellTable,
    pub u2: ShellTable,
    pub b1: ShellTable,
    pub b2: ShellTable,
}

impl PairTables {
    pub fn new(pair: &PairTrajectory, partition: &DyadicPartition) -> Result<Self> {
        let times = pair.times().to_vec();
        let j0 = partition.j_min();
        let table = |fields: Vec<&VectorField2D>| -> Result<ShellTable> {
            let rows = fields.into_iter().map(|f| shell_lp_norms(f, 2.0, partition)).collect::<Result<Vec<_>>>()?;
            Ok(ShellTable::from_samples(times.clone(), j0, 2.0, &rows))
        };
        let s1 = pair.run1.snapshots();
        let s2 = pair.run2.snapshots();
        Ok(Self {
            du: table(pair.delta_u.iter().collect())?,
            db: table(pair.delta_b.iter().collect())?,
            u1: table(s1.iter().map(|s| &s.u).collect())?,
            u2: table(s2.iter().map(|s| &s.u).collect())?,
            b1: table(s1.iter().map(|s| &s.b).collect())?,
            b2: table(s2.iter().map(|s| &s.b).collect())?,
        })
    }

    /// `X(t_i)`.
    pub fn x(&self, i: usize) -> f64 {
        self.du.mixed_norm(i, f64::INFINITY, -1.0, f64::INFINITY) + self.du.mixed_norm(i, 1.0, 1.0, f64::INFINITY)
    }

    /// `Y(t_i)`.
    pub fn y(&self, i: usize) -> f64 {
        self.db.mixed_norm(i, f64::INFINITY, 0.0, f64::INFINITY)
    }

    /// `V(t_i)`.
    pub fn v(&self, i: usize) -> f64 {
        self.du.mixed_norm(i, 1.0, 0.0, f64::INFINITY) + self.du.mixed_norm(i, 1.0, 2.0, f64::INFINITY)
    }
}

/// Running stability quantities at one sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub v: f64,
    /// `K_1..K_4` on `[0, t]`.
    pub k: [f64; 4],
    /// `J_1..J_4` at `t`.
    pub j: [f64; 4],
}
