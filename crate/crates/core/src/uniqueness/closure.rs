//! The closed difference estimates on a completed pair.
//!
//! With `A_u(t) = max_i ||u_i||_{L^1_t B^2_{2,1}}`, `b(t) = max_i ||B_i(t)||_{B^1_{2,1}}`:
//!
//! ```text
//! velocity:  ||du||_{L^inf B^-1_{2,inf}} + nu ||du||_{L~^1 B^1_{2,inf}}
//!              <= C ( A_u ||du||_{L^inf B^-1_{2,inf}} + int_0^t b ||dB||_{B^0_{2,inf}} )
//! magnetic:  ||dB||_{L^inf B^0_{2,inf}}
//!              <= C ( A_u ||dB||_{L^inf B^0_{2,inf}} + max_i ||B_i||_{L^inf B^1_{2,1}} ||du||_{L^1 B^1_{2,1}} )
//! ```
//!
//! The `_initial` variants add `||du(0)||_{B^-1_{2,inf}}` and `||dB(0)||_{B^0_{2,inf}}` to the right
//! sides. On `[0, T]` with `int_0^T max_i ||u_i||_{B^2_{2,1}} < 1/(4 C_est)` the absorbed forms
//! carry `3/4` on the left and only the coupling term (plus initial data) on the right.

use serde::{Deserialize, Serialize};

use super::pair::{PairTables, PairTrajectory};
use crate::besov::{trapezoid, ShellTable};
use crate::error::{Error, Result};
use crate::estimate::{max_constant, EstimateReport};
use crate::partition::DyadicPartition;
use crate::uniqueness::osgood::modulus;

const INF: f64 = f64::INFINITY;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub velocity: EstimateReport,
    pub magnetic: EstimateReport,
    pub velocity_initial: EstimateReport,
    pub magnetic_initial: EstimateReport,
    /// `d/dt ||dB||_{B^0_{2,inf}} <= C (||(u_1,u_2)||_{B^2_{2,1}} ||dB|| + ||(B_1,B_2)||_{B^1_{2,1}} ||du||_{B^1_{2,1}})`,
    /// the worst sampled interval.
    pub magnetic_differential: EstimateReport,
    /// Max finite implied constant of the four integrated estimates.
    pub c_est: Option<f64>,
    /// Last sample time inside the small-time window, `None` if even the first step exceeds it.
    pub t_bar: Option<f64>,
    pub t_bar_index: Option<usize>,
    pub velocity_small_time: Option<EstimateReport>,
    pub magnetic_small_time: Option<EstimateReport>,
    /// `X(t) - X(t_a) <= C int_{t_a}^t X log(e + V/X)`, worst sample, with `t_a` the first
    /// post-initial sample where `X > 0`.
    pub osgood: EstimateReport,
    pub osgood_start: Option<usize>,
    /// Constant used for the comparison envelope: the largest finite one measured here.
    pub envelope_c: Option<f64>,
}

impl ClosureReport {
    pub fn reports(&self) -> Vec<&EstimateReport> {
        let mut out = vec![
            &self.velocity,
            &self.magnetic,
            &self.velocity_initial,
            &self.magnetic_initial,
            &self.magnetic_differential,
        ];
        out.extend(self.velocity_small_time.iter());
        out.extend(self.magnetic_small_time.iter());
        out.push(&self.osgood);
        out
    }
}

struct Series {
    u_b2: Vec<f64>,
    b_b1: Vec<f64>,
    db0: Vec<f64>,
    du1: Vec<f64>,
}

fn pair_max(a: &ShellTable, b: &ShellTable, s: f64, q: f64, n: usize) -> Vec<f64> {
    (0..n).map(|m| a.instant_norm(m, s, q).max(b.instant_norm(m, s, q))).collect()
}

fn series(t: &PairTables, n: usize) -> Series {
    Series {
        u_b2: pair_max(&t.u1, &t.u2, 2.0, 1.0, n),
        b_b1: pair_max(&t.b1, &t.b2, 1.0, 1.0, n),
        db0: (0..n).map(|m| t.db.instant_norm(m, 0.0, INF)).collect(),
        du1: (0..n).map(|m| t.du.instant_norm(m, 1.0, 1.0)).collect(),
    }
}

struct Sides {
    du_neg: f64,
    du_smooth: f64,
    y: f64,
    a_u: f64,
    coupling_u: f64,
    coupling_b: f64,
    init_u: f64,
    init_b: f64,
}

fn sides(pair: &PairTrajectory, t: &PairTables, s: &Series, i: usize) -> Sides {
    let times = pair.times();
    let weighted: Vec<f64> = s.b_b1.iter().zip(&s.db0).map(|(b, d)| b * d).collect();
    let b_sup = t.b1.time_outer_norm(i, INF, 1.0, 1.0).max(t.b2.time_outer_norm(i, INF, 1.0, 1.0));
    Sides {
        du_neg: t.du.mixed_norm(i, INF, -1.0, INF),
        du_smooth: t.du.mixed_norm(i, 1.0, 1.0, INF),
        y: t.y(i),
        a_u: t.u1.time_outer_norm(i, 1.0, 2.0, 1.0).max(t.u2.time_outer_norm(i, 1.0, 2.0, 1.0)),
        coupling_u: trapezoid(times, &weighted, i),
        coupling_b: b_sup * trapezoid(times, &s.du1, i),
        init_u: t.du.instant_norm(0, -1.0, INF),
        init_b: t.db.instant_norm(0, 0.0, INF),
    }
}

fn differential(pair: &PairTrajectory, s: &Series) -> EstimateReport {
    let times = pair.times();
    let rhs_at = |m: usize| s.u_b2[m] * s.db0[m] + s.b_b1[m] * s.du1[m];
    let mut worst = EstimateReport::new("magnetic_differential", 0.0, 0.0);
    let mut worst_c = -1.0;
    for m in 0..times.len().saturating_sub(1) {
        let rise = (s.db0[m + 1] - s.db0[m]) / (times[m + 1] - times[m]);
        if rise <= 0.0 {
            continue;
        }
        let r = EstimateReport::new("magnetic_differential", rise, 0.5 * (rhs_at(m) + rhs_at(m + 1)));
        let c = r.implied_constant.unwrap_or(INF);
        if c > worst_c {
            worst_c = c;
            worst = r.with_meta("t", times[m]).with_meta("t_next", times[m + 1]);
        }
    }
    worst
}

fn osgood_report(pair: &PairTrajectory, t: &PairTables) -> (EstimateReport, Option<usize>) {
    let n = pair.len();
    let x: Vec<f64> = (0..n).map(|i| t.x(i)).collect();
    let v: Vec<f64> = (0..n).map(|i| t.v(i)).collect();
    let Some(a) = (1..n).find(|&i| x[i] > 0.0) else {
        return (EstimateReport::new("osgood", 0.0, 0.0), None);
    };
    let times = &pair.times()[a..];
    let integrand: Vec<f64> = (a..n).map(|i| modulus(x[i], v[i])).collect();
    let mut worst = EstimateReport::new("osgood", 0.0, 0.0).with_meta("t_start", times[0]);
    let mut worst_c = -1.0;
    for k in 1..times.len() {
        let r = EstimateReport::new("osgood", x[a + k] - x[a], trapezoid(times, &integrand, k));
        let c = r.implied_constant.unwrap_or(INF);
        if r.lhs > 0.0 && c > worst_c {
            worst_c = c;
            worst = r.with_meta("t_start", times[0]).with_meta("t", times[k]);
        }
    }
    (worst, Some(a))
}

/// Evaluate both integrated estimates, their small-time reductions and the Osgood-form
/// inequality over the whole pair.
pub fn verify_closure(pair: &PairTrajectory, partition: &DyadicPartition) -> Result<ClosureReport> {
    if !pair.is_complete() {
        return Err(Error::Precondition("closure needs a completed pair".into()));
    }
    let tables = PairTables::new(pair, partition)?;
    let n = pair.len();
    let last = n - 1;
    let s = series(&tables, n);
    let nu = pair.nu;
    let full = sides(pair, &tables, &s, last);
    let t_end = pair.times()[last];
    let at = |r: EstimateReport, t: f64| {
        r.with_meta("t", t).with_meta("j_min", partition.j_min()).with_meta("j_max", partition.j_max())
    };

    let vel_lhs = full.du_neg + nu * full.du_smooth;
    let vel_rhs = full.a_u * full.du_neg + full.coupling_u;
    let mag_rhs = full.a_u * full.y + full.coupling_b;
    let velocity = at(EstimateReport::new("velocity", vel_lhs, vel_rhs), t_end);
    let magnetic = at(EstimateReport::new("magnetic", full.y, mag_rhs), t_end);
    let velocity_initial = at(EstimateReport::new("velocity_initial", vel_lhs, vel_rhs + full.init_u), t_end);
    let magnetic_initial = at(EstimateReport::new("magnetic_initial", full.y, mag_rhs + full.init_b), t_end);
    let c_est = max_constant([&velocity, &magnetic, &velocity_initial, &magnetic_initial]);

    let mut t_bar = None;
    let mut t_bar_index = None;
    let mut velocity_small_time = None;
    let mut magnetic_small_time = None;
    if let Some(c) = c_est.filter(|&c| c > 0.0) {
        let cumulative: Vec<f64> = (0..n).map(|i| trapezoid(pair.times(), &s.u_b2, i)).collect();
        let limit = 1.0 / (4.0 * c);
        let k = cumulative.partition_point(|&g| g < limit);
        if k >= 2 {
            let i = k - 1;
            let w = sides(pair, &tables, &s, i);
            let tb = pair.times()[i];
            t_bar = Some(tb);
            t_bar_index = Some(i);
            velocity_small_time = Some(at(
                EstimateReport::new("velocity_small_time", 0.75 * w.du_neg + nu * w.du_smooth, w.coupling_u + w.init_u),
                tb,
            ));
            magnetic_small_time =
                Some(at(EstimateReport::new("magnetic_small_time", 0.75 * w.y, w.coupling_b + w.init_b), tb));
        }
    }

    let magnetic_differential = differential(pair, &s);
    let (osgood, osgood_start) = osgood_report(pair, &tables);
    let mut measured: Vec<&EstimateReport> = vec![&velocity, &magnetic, &velocity_initial, &magnetic_initial];
    measured.extend(velocity_small_time.iter());
    measured.extend(magnetic_small_time.iter());
    measured.push(&magnetic_differential);
    measured.push(&osgood);
    let envelope_c = max_constant(measured);

    Ok(ClosureReport {
        velocity,
        magnetic,
        velocity_initial,
        magnetic_initial,
        magnetic_differential,
        c_est,
        t_bar,
        t_bar_index,
        velocity_small_time,
        magnetic_small_time,
        osgood,
        osgood_start,
        envelope_c,
    })
}
