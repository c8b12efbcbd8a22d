use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::initial::{initial_data, InitialData};
use super::state::{check_viscosity, MhdState};
use crate::besov::{shell_lp_norms, weighted_lq, Trajectory};
use crate::error::{Error, Result};
use crate::partition::{DyadicPartition, Profile};
use crate::spectral::{
    divergence_residual, fft_forward, fft_inverse, leray_project, Grid2D, SpectralField, VectorField2D,
    DIVERGENCE_TOLERANCE,
};

/// Steps with `dt * max_x(|u| + |B|) * k_max` above this are rejected; it sits
/// just inside the imaginary-axis stability interval of classical RK4.
pub const CFL_LIMIT: f64 = 2.8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum TimeStep {
    Fixed { dt: f64 },
    /// `dt = min(dt_max, safety * CFL_LIMIT / (max(|u| + |B|) k_max))`.
    Adaptive {
        #[serde(default = "default_safety")]
        safety: f64,
        dt_max: f64,
    },
}

fn default_safety() -> f64 {
    0.4
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: Grid2D,
    pub nu: f64,
    pub time_step: TimeStep,
    pub t_end: f64,
    #[serde(default = "yes")]
    pub dealias: bool,
    pub snapshot_stride: usize,
    pub initial: InitialData,
    /// Leray-project `B` whenever its divergence residual exceeds the tolerance.
    #[serde(default)]
    pub project_magnetic: bool,
    /// `false` drops every magnetic term: plain 2D Navier-Stokes.
    #[serde(default = "yes")]
    pub magnetic: bool,
    /// Abort once `||u||_{B^0_{2,1}}` exceeds this value.
    #[serde(default)]
    pub guard_ceiling: Option<f64>,
}

impl SolverConfig {
    pub fn new(grid: Grid2D, nu: f64, dt: f64, t_end: f64, initial: InitialData) -> Self {
        Self {
            grid,
            nu,
            time_step: TimeStep::Fixed { dt },
            t_end,
            dealias: true,
            snapshot_stride: 1,
            initial,
            project_magnetic: false,
            magnetic: true,
            guard_ceiling: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        Grid2D::new(self.grid.n(), self.grid.length())?;
        check_viscosity(self.nu)?;
        if !self.t_end.is_finite() {
            return Err(Error::Config("t_end must be finite".into()));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::Config("snapshot_stride must be at least 1".into()));
        }
        match self.time_step {
            TimeStep::Fixed { dt } if !(dt.is_finite() && dt > 0.0) => {
                Err(Error::Config(format!("dt must be positive, got {dt}")))
            }
            TimeStep::Adaptive { safety, dt_max }
                if !(safety > 0.0 && safety <= 1.0 && dt_max.is_finite() && dt_max > 0.0) =>
            {
                Err(Error::Config("adaptive stepping needs 0 < safety <= 1 and dt_max > 0".into()))
            }
            _ => match self.guard_ceiling {
                Some(c) if !(c > 0.0) => Err(Error::Config("guard_ceiling must be positive".into())),
                _ => Ok(()),
            },
        }
    }

    pub fn fixed_dt(&self) -> Option<f64> {
        match self.time_step {
            TimeStep::Fixed { dt } => Some(dt),
            TimeStep::Adaptive { .. } => None,
        }
    }
}

/// Per-step diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorRow {
    pub t: f64,
    pub energy: f64,
    /// `||u||_{L^2} + ||u||_{Bdot^0_{2,1}}`.
    pub u_b0_21: f64,
    pub u_bdot2_21: f64,
    /// `||B||_{L^2} + ||B||_{Bdot^1_{2,1}}`.
    pub b_b1_21: f64,
    pub grad_u_sq: f64,
    pub div_u: f64,
    pub div_b: f64,
}

pub fn monitor_row(state: &MhdState, partition: &DyadicPartition) -> MonitorRow {
    let j0 = partition.j_min();
    let su = shell_lp_norms(&state.u, 2.0, partition).expect("state on the partition grid");
    let sb = shell_lp_norms(&state.b, 2.0, partition).expect("state on the partition grid");
    let l = state.grid().length();
    MonitorRow {
        t: state.t,
        energy: state.energy(),
        u_b0_21: l * state.u.coefficient_energy().sqrt() + weighted_lq(&su, j0, 0.0, 1.0),
        u_bdot2_21: weighted_lq(&su, j0, 2.0, 1.0),
        b_b1_21: l * state.b.coefficient_energy().sqrt() + weighted_lq(&sb, j0, 1.0, 1.0),
        grad_u_sq: state.velocity_gradient_energy(),
        div_u: divergence_residual(&state.u),
        div_b: divergence_residual(&state.b),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RunStatus {
    Completed,
    GuardTripped { t: f64, value: f64 },
}

#[derive(Clone, Debug)]
pub struct Integration {
    pub trajectory: Trajectory<MhdState>,
    pub monitors: Vec<MonitorRow>,
    pub status: RunStatus,
    pub steps: usize,
}

impl Integration {
    pub fn final_state(&self) -> &MhdState {
        self.trajectory.snapshots().last().expect("trajectories are nonempty")
    }

    pub fn completed(&self) -> bool {
        self.status == RunStatus::Completed
    }
}

type Block = [Vec<Complex64>; 4];

#[derive(Clone, Copy)]
enum Deriv {
    None,
    X,
    Y,
}

struct Factors {
    dt: f64,
    full: Vec<f64>,
    half: Vec<f64>,
}

struct Stepper {
    grid: Grid2D,
    nu: f64,
    keep: Vec<bool>,
    kx: Vec<f64>,
    ky: Vec<f64>,
    k2: Vec<f64>,
    k_max: f64,
    magnetic: bool,
    factors: Option<Factors>,
}

impl Stepper {
    fn new(grid: Grid2D, nu: f64, dealias: bool, magnetic: bool) -> Self {
        let len = grid.len();
        let keep: Vec<bool> = (0..len).map(|i| !dealias || grid.is_retained(i)).collect();
        let (kx, ky): (Vec<f64>, Vec<f64>) = (0..len).map(|i| grid.wavevector(i)).unzip();
        let k2 = kx.iter().zip(&ky).map(|(a, b)| a * a + b * b).collect();
        let k_max = if dealias { grid.max_retained_norm() } else { grid.max_wavevector_norm() };
        Self { grid, nu, keep, kx, ky, k2, k_max, magnetic, factors: None }
    }

    fn components(&self) -> usize {
        if self.magnetic {
            4
        } else {
            2
        }
    }

    fn sample(&self, c: &[Complex64], d: Deriv) -> Vec<f64> {
        let mut buf: Vec<Complex64> = c
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if !self.keep[i] {
                    return ZERO;
                }
                match d {
                    Deriv::None => *v,
                    Deriv::X => *v * Complex64::new(0.0, self.kx[i]),
                    Deriv::Y => *v * Complex64::new(0.0, self.ky[i]),
                }
            })
            .collect();
        if !matches!(d, Deriv::None) {
            for (i, v) in buf.iter_mut().enumerate() {
                if self.grid.is_nyquist(i) {
                    *v = ZERO;
                }
            }
        }
        fft_inverse(self.grid.n(), &mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    /// Dealiased nonlinear tendencies (projected for `u`) and `max_x(|u| + |B|)`.
    fn nonlinear(&self, s: &Block) -> Result<(Block, f64)> {
        let m = self.components();
        let jobs: Vec<(usize, Deriv)> =
            (0..m).flat_map(|c| [(c, Deriv::None), (c, Deriv::X), (c, Deriv::Y)]).collect();
        let v: Vec<Vec<f64>> = jobs.par_iter().map(|&(c, d)| self.sample(&s[c], d)).collect();
        let len = self.grid.len();
        let mut out = vec![vec![0.0; len]; m];
        let mut speed = 0.0f64;
        for i in 0..len {
            let (ux, uxx, uxy) = (v[0][i], v[1][i], v[2][i]);
            let (uy, uyx, uyy) = (v[3][i], v[4][i], v[5][i]);
            let uu_x = ux * uxx + uy * uxy;
            let uu_y = ux * uyx + uy * uyy;
            if self.magnetic {
                let (bx, bxx, bxy) = (v[6][i], v[7][i], v[8][i]);
                let (by, byx, byy) = (v[9][i], v[10][i], v[11][i]);
                out[0][i] = -uu_x + (bx * bxx + by * bxy);
                out[1][i] = -uu_y + (bx * byx + by * byy);
                out[2][i] = -(ux * bxx + uy * bxy) + (bx * uxx + by * uxy);
                out[3][i] = -(ux * byx + uy * byy) + (bx * uyx + by * uyy);
                speed = speed.max(ux.hypot(uy) + bx.hypot(by));
            } else {
                out[0][i] = -uu_x;
                out[1][i] = -uu_y;
                speed = speed.max(ux.hypot(uy));
            }
        }
        let spectra: Vec<Vec<Complex64>> = out
            .par_iter()
            .map(|samples| {
                let mut c: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                fft_forward(self.grid.n(), &mut c);
                for (i, z) in c.iter_mut().enumerate() {
                    if !self.keep[i] {
                        *z = ZERO;
                    }
                }
                c
            })
            .collect();
        for (comp, c) in spectra.iter().enumerate() {
            if let Some(i) = c.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
                let (kx, ky) = self.grid.modes(i);
                let context = ["nonlinear term u_x", "nonlinear term u_y", "nonlinear term B_x", "nonlinear term B_y"][comp];
                return Err(Error::NonFinite { context, kx, ky });
            }
        }
        let mut it = spectra.into_iter();
        let mut nx = it.next().expect("u_x tendency");
        let mut ny = it.next().expect("u_y tendency");
        self.project(&mut nx, &mut ny);
        let bx = it.next().unwrap_or_else(|| vec![ZERO; len]);
        let by = it.next().unwrap_or_else(|| vec![ZERO; len]);
        Ok(([nx, ny, bx, by], speed))
    }

    fn project(&self, x: &mut [Complex64], y: &mut [Complex64]) {
        x[0] = ZERO;
        y[0] = ZERO;
        for i in 1..x.len() {
            let dot = x[i] * self.kx[i] + y[i] * self.ky[i];
            let r = dot / self.k2[i];
            x[i] -= r * self.kx[i];
            y[i] -= r * self.ky[i];
        }
    }

    fn ensure_factors(&mut self, dt: f64) {
        if self.factors.as_ref().is_some_and(|f| f.dt == dt) {
            return;
        }
        let full = self.k2.iter().map(|k| (-self.nu * k * dt).exp()).collect();
        let half = self.k2.iter().map(|k| (-0.5 * self.nu * k * dt).exp()).collect();
        self.factors = Some(Factors { dt, full, half });
    }

    fn cfl(&self, dt: f64, speed: f64) -> f64 {
        dt * speed * self.k_max
    }

    /// One integrating-factor RK4 step. `choose` maps the current speed to `dt`.
    fn advance(&mut self, s: &Block, t: f64, choose: impl Fn(f64) -> f64) -> Result<(Block, f64)> {
        let (a, speed) = self.nonlinear(s)?;
        let dt = choose(speed);
        let cfl = self.cfl(dt, speed);
        if cfl > CFL_LIMIT {
            return Err(Error::StepRejected { t, cfl, limit: CFL_LIMIT });
        }
        self.ensure_factors(dt);
        let f = self.factors.as_ref().expect("factors set");
        let m = self.components();
        let (full, half) = (&f.full, &f.half);
        let e = |c: usize, tab: &[f64], i: usize| if c < 2 { tab[i] } else { 1.0 };
        let combine = |g: &dyn Fn(usize, usize) -> Complex64| -> Block {
            std::array::from_fn(|c| if c < m { (0..s[c].len()).map(|i| g(c, i)).collect() } else { s[c].clone() })
        };
        let ua = combine(&|c, i| (s[c][i] + a[c][i] * (0.5 * dt)) * e(c, half, i));
        let (b, _) = self.nonlinear(&ua)?;
        let ub = combine(&|c, i| s[c][i] * e(c, half, i) + b[c][i] * (0.5 * dt));
        let (cc, _) = self.nonlinear(&ub)?;
        let uc = combine(&|c, i| s[c][i] * e(c, full, i) + cc[c][i] * (dt * e(c, half, i)));
        let (d, _) = self.nonlinear(&uc)?;
        let mut next = combine(&|c, i| {
            s[c][i] * e(c, full, i)
                + (a[c][i] * e(c, full, i) + (b[c][i] + cc[c][i]) * (2.0 * e(c, half, i)) + d[c][i]) * (dt / 6.0)
        });
        let [ux, uy, bx, by] = &mut next;
        self.project(ux, uy);
        bx[0] = ZERO;
        by[0] = ZERO;
        Ok((next, dt))
    }

    fn to_block(state: &MhdState) -> Block {
        state.components().map(|c| c.coeffs().to_vec())
    }

    fn to_state(&self, block: Block, t: f64, project_magnetic: bool) -> Result<MhdState> {
        let [ux, uy, bx, by] = block;
        let field = |c| SpectralField::from_coeffs(self.grid, c, true);
        let u = VectorField2D::from_parts(field(ux)?, field(uy)?, true);
        let mut b = VectorField2D::from_parts(field(bx)?, field(by)?, false);
        let r = divergence_residual(&b);
        if project_magnetic && r > DIVERGENCE_TOLERANCE {
            b = leray_project(&b);
        } else {
            b = VectorField2D::from_parts(b.x, b.y, r <= DIVERGENCE_TOLERANCE);
        }
        Ok(MhdState { u, b, t, nu: self.nu })
    }
}

/// Full tendencies `(du/dt, dB/dt)` with `du/dt = P(-u.grad u + B.grad B) + nu Lap u`
/// and `dB/dt = -u.grad B + B.grad u`, all products dealiased.
pub fn nonlinear_rhs(state: &MhdState) -> Result<(VectorField2D, VectorField2D)> {
    let st = Stepper::new(*state.grid(), state.nu, true, true);
    let (n, _) = st.nonlinear(&Stepper::to_block(state))?;
    let [nx, ny, bx, by] = n;
    let grid = *state.grid();
    let visc = |c: &SpectralField, mut v: Vec<Complex64>| {
        for (i, z) in v.iter_mut().enumerate() {
            *z -= c.coeffs()[i] * (state.nu * st.k2[i]);
        }
        SpectralField::from_coeffs(grid, v, true)
    };
    let du = VectorField2D::from_parts(visc(&state.u.x, nx)?, visc(&state.u.y, ny)?, true);
    let db = VectorField2D::from_parts(
        SpectralField::from_coeffs(grid, bx, true)?,
        SpectralField::from_coeffs(grid, by, true)?,
        false,
    );
    Ok((du, db))
}

/// One step with dealiasing, full coupling and no magnetic re-projection.
pub fn step(state: &MhdState, dt: f64) -> Result<MhdState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Config(format!("dt must be positive, got {dt}")));
    }
    let mut st = Stepper::new(*state.grid(), state.nu, true, true);
    let (next, dt) = st.advance(&Stepper::to_block(state), state.t, |_| dt)?;
    st.to_state(next, state.t + dt, false)
}

pub fn integrate(config: &SolverConfig) -> Result<Integration> {
    config.validate()?;
    let state = initial_data(&config.initial, config.grid, config.nu)?;
    integrate_from(state, config)
}

/// Integrate from an explicit state; `config.initial` is ignored.
pub fn integrate_from(state: MhdState, config: &SolverConfig) -> Result<Integration> {
    config.validate()?;
    state.grid().check_same(&config.grid)?;
    if state.nu != config.nu {
        return Err(Error::Config("state viscosity differs from the configuration".into()));
    }
    if !config.magnetic && !state.b.is_zero() {
        return Err(Error::Config("a Navier-Stokes run needs B = 0".into()));
    }
    let partition = DyadicPartition::new(config.grid, Profile::default());
    let mut st = Stepper::new(config.grid, config.nu, config.dealias, config.magnetic);
    let t0 = state.t;
    let mut monitors = vec![monitor_row(&state, &partition)];
    let mut traj = Trajectory::new(vec![t0], vec![state.clone()])?;
    let mut block = Stepper::to_block(&state);
    let mut current = state;
    let mut status = RunStatus::Completed;
    let mut steps = 0usize;

    let fixed_steps = config.fixed_dt().map(|dt| ((config.t_end - t0) / dt).round().max(0.0) as usize);
    loop {
        let (t_next, next) = match (config.time_step, fixed_steps) {
            (TimeStep::Fixed { dt }, Some(total)) => {
                if steps >= total {
                    break;
                }
                let (next, _) = st.advance(&block, current.t, |_| dt)?;
                (t0 + (steps + 1) as f64 * dt, next)
            }
            (TimeStep::Adaptive { safety, dt_max }, _) => {
                let remaining = config.t_end - current.t;
                if remaining <= 1e-12 * config.t_end.abs().max(1.0) {
                    break;
                }
                let k_max = st.k_max;
                let (next, dt) = st.advance(&block, current.t, |speed| {
                    let limit = if speed > 0.0 { safety * CFL_LIMIT / (speed * k_max) } else { f64::INFINITY };
                    limit.min(dt_max).min(remaining)
                })?;
                (current.t + dt, next)
            }
            _ => unreachable!("fixed steps are precomputed"),
        };
        steps += 1;
        current = st.to_state(next.clone(), t_next, config.project_magnetic)?;
        block = next;
        let row = monitor_row(&current, &partition);
        monitors.push(row);
        let tripped = config.guard_ceiling.is_some_and(|c| !(row.u_b0_21 <= c));
        let last = match fixed_steps {
            Some(total) => steps == total,
            None => config.t_end - current.t <= 1e-12 * config.t_end.abs().max(1.0),
        };
        if tripped || last || steps % config.snapshot_stride == 0 {
            traj.push(current.t, current.clone())?;
        }
        if tripped {
            status = RunStatus::GuardTripped { t: current.t, value: row.u_b0_21 };
            break;
        }
    }
    Ok(Integration { trajectory: traj, monitors, status, steps })
}

/// Running `int_{t_0}^{t_i} g` for every sample: composite Simpson on uniform
/// samples (with a one-sided rule on odd tails), trapezoid otherwise.
pub fn cumulative_integral(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    let h = times[1] - times[0];
    let uniform = times.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs());
    if !uniform || n < 3 {
        for i in 1..n {
            out[i] = out[i - 1] + 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
        }
        return out;
    }
    for i in 1..n {
        if i % 2 == 0 {
            out[i] = out[i - 2] + h / 3.0 * (values[i - 2] + 4.0 * values[i - 1] + values[i]);
        } else if i == 1 {
            out[1] = if n >= 4 {
                h / 24.0 * (9.0 * values[0] + 19.0 * values[1] - 5.0 * values[2] + values[3])
            } else {
                h / 12.0 * (5.0 * values[0] + 8.0 * values[1] - values[2])
            };
        } else {
            out[i] = out[i - 3]
                + 3.0 * h / 8.0 * (values[i - 3] + 3.0 * values[i - 2] + 3.0 * values[i - 1] + values[i]);
        }
    }
    out
}

/// `max_i |E(t_i) - E(t_0) + nu int_{t_0}^{t_i} ||grad u||_2^2| / E(t_0)`.
pub fn energy_identity_residual(monitors: &[MonitorRow], nu: f64) -> f64 {
    let Some(first) = monitors.first() else {
        return 0.0;
    };
    let times: Vec<f64> = monitors.iter().map(|m| m.t).collect();
    let diss: Vec<f64> = monitors.iter().map(|m| m.grad_u_sq).collect();
    let integral = cumulative_integral(&times, &diss);
    let worst = monitors
        .iter()
        .zip(&integral)
        .map(|(m, i)| (m.energy - first.energy + nu * i).abs())
        .fold(0.0, f64::max);
    if first.energy == 0.0 {
        worst
    } else {
        worst / first.energy
    }
}
