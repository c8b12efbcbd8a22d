//! `simulate`: one solver run written as a trajectory directory.

use serde_json::json;

use besov_mhd::mhd::{
    encode_blob, energy_identity_residual, integrate, snapshot_name, write_trajectory_data, InitialData, RunStatus,
    MONITORS_FILE,
};

use super::{Context, Outcome};
use crate::error::CliError;
use crate::manifest::{Outputs, RunState};

pub fn run(ctx: &Context<'_>, out: &mut Outputs<'_>) -> Result<Outcome, CliError> {
    let section = ctx.config.simulate.as_ref().ok_or_else(|| CliError::Usage("config has no [simulate] section".into()))?;
    let config = section.solver_config(ctx.base)?;
    let run = integrate(&config)?;
    let trajectory = write_trajectory_data(out.dir, &run, &config)?;
    out.files.extend(trajectory.snapshots.iter().cloned());
    out.files.push(MONITORS_FILE.to_string());

    let fin = run.final_state();
    let divergence = run.monitors.iter().map(|m| m.div_u.max(m.div_b)).fold(0.0, f64::max);
    let residual = energy_identity_residual(&run.monitors, config.nu);
    let decay_error = match config.initial {
        InitialData::TaylorGreen { .. } => {
            let w = config.grid.base_wavenumber();
            let t = fin.t - run.trajectory.times()[0];
            let exact = run.trajectory.snapshots()[0].u.scale((-2.0 * config.nu * w * w * t).exp());
            Some(fin.u.relative_difference(&exact))
        }
        _ => None,
    };
    let report = json!({
        "status": run.status,
        "steps": run.steps,
        "t_final": fin.t,
        "energy_final": fin.energy(),
        "energy_identity_residual": residual,
        "max_divergence": divergence,
        "taylor_green_decay_error": decay_error,
        "final_state_sha256": crate::manifest::sha256_hex(&encode_blob(fin)),
        "final_snapshot": snapshot_name(run.trajectory.len() - 1),
    });
    out.json("report.json", &report)?;
    let trajectory = Some(serde_json::to_value(&trajectory)?);
    if let RunStatus::GuardTripped { t, value } = run.status {
        return Ok(Outcome {
            state: RunState::GuardTripped,
            message: Some(format!("blow-up guard tripped at t = {t}: monitored norm {value}")),
            summary: report,
            trajectory,
        });
    }
    let mut breaches = Vec::new();
    if !(divergence <= section.divergence_tolerance) {
        breaches.push(format!("divergence {divergence:.3e} exceeds {:.3e}", section.divergence_tolerance));
    }
    if !residual.is_finite() || !fin.energy().is_finite() {
        breaches.push("non-finite energy".into());
    }
    Ok(Outcome { trajectory, ..Outcome::checked(report, breaches) })
}
