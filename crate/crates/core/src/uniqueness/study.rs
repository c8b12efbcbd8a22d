use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::closure::{verify_closure, ClosureReport};
use super::osgood::{osgood_envelope, Forcing};
use super::pair::{run_against, Perturbation, StabilityRecord, Target};
use super::terms::stability_norms;
use crate::error::{Error, Result};
use crate::mhd::{integrate_from, MhdState, RunStatus, SolverConfig};
use crate::partition::DyadicPartition;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub epsilon: f64,
    pub sup_x: f64,
    pub sup_y: f64,
    /// `min_t (envelope - X)`; zero for an identically zero pair.
    pub margin: f64,
    pub envelope_holds: bool,
    pub envelope_c: Option<f64>,
    pub closure: ClosureReport,
    pub records: Vec<StabilityRecord>,
    pub envelope: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub rows: Vec<StudyRow>,
    /// Least-squares slope of `log sup X` against `log epsilon` over rows with `sup X > 0`.
    pub slope: Option<f64>,
}

impl ConvergenceStudy {
    pub fn envelope_holds(&self) -> bool {
        self.rows.iter().all(|r| r.envelope_holds)
    }
}

/// Envelope for `X` started at `t_0` from the first nonzero post-initial `X` sample.
pub fn envelope_for(records: &[StabilityRecord], closure: &ClosureReport) -> Result<Vec<f64>> {
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    let (Some(a), Some(c)) = (closure.osgood_start, closure.envelope_c.filter(|&c| c > 0.0)) else {
        return Ok(vec![0.0; records.len()]);
    };
    let v = Forcing::Sampled { times: times.clone(), values: records.iter().map(|r| r.v).collect() };
    osgood_envelope(records[a].x, c, &v, &times)
}

fn margin(records: &[StabilityRecord], envelope: &[f64]) -> f64 {
    records.iter().zip(envelope).map(|(r, e)| e - r.x).fold(f64::INFINITY, f64::min)
}

/// Least-squares slope of `y` against `x`.
pub fn fitted_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Perturb `base` by `epsilon` times a seeded one-shell field for each `epsilon` and
/// compare every pair with its envelope.
pub fn convergence_study(
    base: &MhdState,
    shell: i32,
    seed: u64,
    target: Target,
    eps_list: &[f64],
    config: &SolverConfig,
    partition: &DyadicPartition,
) -> Result<ConvergenceStudy> {
    if eps_list.is_empty() {
        return Err(Error::Precondition("epsilon list is empty".into()));
    }
    if eps_list.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(Error::Precondition("epsilon values must be nonnegative".into()));
    }
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Precondition("epsilon values must be strictly decreasing".into()));
    }
    let base_run = integrate_from(base.clone(), config)?;
    let rows = eps_list
        .par_iter()
        .map(|&epsilon| -> Result<StudyRow> {
            let p = Perturbation::Shell { shell, epsilon, seed, target };
            let pair = run_against(&base_run, &p, config)?;
            if let RunStatus::GuardTripped { t, value } = pair.status {
                return Err(Error::GuardTripped { t, value });
            }
            let records = stability_norms(&pair, partition)?;
            let closure = verify_closure(&pair, partition)?;
            let envelope = envelope_for(&records, &closure)?;
            let m = margin(&records, &envelope);
            Ok(StudyRow {
                epsilon,
                sup_x: records.iter().map(|r| r.x).fold(0.0, f64::max),
                sup_y: records.iter().map(|r| r.y).fold(0.0, f64::max),
                margin: m,
                envelope_holds: m >= 0.0,
                envelope_c: closure.envelope_c,
                closure,
                records,
                envelope,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.epsilon > 0.0 && r.sup_x > 0.0).map(|r| (r.epsilon.ln(), r.sup_x.ln())).collect();
    Ok(ConvergenceStudy { slope: fitted_slope(&points), rows })
}

pub const STABILITY_HEADER: &str = "t,X,Y,V,envelope,K1,K2,K3,K4,J1,J2,J3,J4";

/// Time series `t,X,Y,V,envelope,K1..K4,J1..J4`.
pub fn stability_csv(records: &[StabilityRecord], envelope: &[f64]) -> String {
    let mut out = format!("{STABILITY_HEADER}\n");
    for (n, r) in records.iter().enumerate() {
        let env = envelope.get(n).copied().unwrap_or(f64::NAN);
        let _ = write!(out, "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", r.t, r.x, r.y, r.v, env);
        for v in r.k.iter().chain(&r.j) {
            let _ = write!(out, ",{v:.17e}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_line() {
        let pts: Vec<(f64, f64)> = (0..4).map(|i| (i as f64, 2.0 * i as f64 + 1.0)).collect();
        assert!((fitted_slope(&pts).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(fitted_slope(&pts[..1]), None);
    }
}
