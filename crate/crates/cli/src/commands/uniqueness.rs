//! `uniqueness`: epsilon sweep of perturbed pairs against the Osgood envelope.

use serde_json::json;

use besov_mhd::estimate::{reports_csv, EstimateReport};
use besov_mhd::mhd::{initial_data, RunStatus};
use besov_mhd::partition::{DyadicPartition, Profile};
use besov_mhd::uniqueness::{convergence_study, run_pair, stability_csv, term_audit, Perturbation};

use super::{Context, Outcome};
use crate::error::CliError;
use crate::manifest::Outputs;

pub fn run(ctx: &Context<'_>, out: &mut Outputs<'_>) -> Result<Outcome, CliError> {
    let u = ctx.config.uniqueness.as_ref().ok_or_else(|| CliError::Usage("config has no [uniqueness] section".into()))?;
    let config = u.solver.solver_config(ctx.base)?;
    if config.fixed_dt().is_none() {
        return Err(CliError::Usage("uniqueness runs need a fixed time step".into()));
    }
    if u.epsilons.is_empty() {
        return Err(CliError::Usage("uniqueness.epsilons is empty".into()));
    }
    if u.epsilons.windows(2).any(|w| !(w[1] < w[0])) || u.epsilons.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(CliError::Usage("uniqueness.epsilons must be nonnegative and strictly decreasing".into()));
    }
    let scale = ctx.config.fault.envelope_scale.unwrap_or(1.0);
    if !(scale.is_finite() && scale >= 0.0) {
        return Err(CliError::Usage("fault.envelope_scale must be finite and nonnegative".into()));
    }
    let partition = DyadicPartition::new(config.grid, Profile::default());
    let base = initial_data(&config.initial, config.grid, config.nu)?;
    let study = convergence_study(&base, u.shell, u.perturbation_seed, u.target, &u.epsilons, &config, &partition)?;

    let mut rows = Vec::new();
    let mut closure_reports: Vec<EstimateReport> = Vec::new();
    let mut breaches = Vec::new();
    for (i, row) in study.rows.iter().enumerate() {
        let envelope: Vec<f64> = row.envelope.iter().map(|e| e * scale).collect();
        let margin = row.records.iter().zip(&envelope).map(|(r, e)| e - r.x).fold(f64::INFINITY, f64::min);
        let holds = margin >= 0.0;
        if !holds {
            breaches.push(format!("X exceeds the envelope for epsilon = {:e} (margin {margin:.3e})", row.epsilon));
        }
        let name = format!("stability_{i:02}.csv");
        out.text(&name, &stability_csv(&row.records, &envelope))?;
        closure_reports.extend(row.closure.reports().into_iter().map(|r| r.clone().with_meta("epsilon", row.epsilon)));
        rows.push(json!({
            "epsilon": row.epsilon,
            "sup_x": row.sup_x,
            "sup_y": row.sup_y,
            "margin": margin,
            "envelope_holds": holds,
            "envelope_c": row.envelope_c,
            "c_est": row.closure.c_est,
            "t_bar": row.closure.t_bar,
            "series": name,
        }));
    }
    out.text("closure.csv", &reports_csv(&closure_reports))?;

    let mut audit_rows = None;
    if u.audit {
        let epsilon = u.epsilons[0];
        let p = Perturbation::Shell { shell: u.shell, epsilon, seed: u.perturbation_seed, target: u.target };
        let pair = run_pair(&base, &p, &config)?;
        if let RunStatus::GuardTripped { t, value } = pair.status {
            return Err(besov_mhd::Error::GuardTripped { t, value }.into());
        }
        let audit = term_audit(&pair, config.t_end, &partition, u.audit_stride)?;
        out.text("term_audit.csv", &reports_csv(&audit))?;
        audit_rows = Some(audit.len());
    }

    let envelope_holds = breaches.is_empty();
    out.json(
        "study.json",
        &json!({
            "slope": study.slope,
            "envelope_holds": envelope_holds,
            "envelope_scale": scale,
            "shell": u.shell,
            "target": u.target,
            "rows": rows,
            "closure": study.rows.iter().map(|r| json!({ "epsilon": r.epsilon, "report": r.closure })).collect::<Vec<_>>(),
        }),
    )?;
    let summary = json!({
        "slope": study.slope,
        "envelope_holds": envelope_holds,
        "epsilons": u.epsilons,
        "min_margin": rows.iter().filter_map(|r| r["margin"].as_f64()).fold(f64::INFINITY, f64::min),
        "term_audit_reports": audit_rows,
    });
    Ok(Outcome::checked(summary, breaches))
}
