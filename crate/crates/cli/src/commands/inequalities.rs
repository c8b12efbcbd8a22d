//! `inequalities`: seeded Bernstein and logarithmic-interpolation sweeps.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use besov_mhd::besov::Trajectory;
use besov_mhd::inequality::{bernstein_report, log_interp_report};
use besov_mhd::partition::{DyadicPartition, Profile};
use besov_mhd::random::{band_field, random_spikes, white_noise_mean_zero};
use besov_mhd::spectral::{Grid2D, SpectralField};

use super::{Context, Outcome};
use crate::config::{FieldFamily, InequalitySection};
use crate::error::CliError;
use crate::manifest::Outputs;

const INF: f64 = f64::INFINITY;

#[derive(Debug, Serialize)]
struct BernsteinSummary {
    alpha: f64,
    p: String,
    q: String,
    /// Per-shell max of the upper constant over seeds.
    upper_by_shell: Vec<(i32, f64)>,
    spread: f64,
    min_lower: f64,
    lower_floor: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct LogSummary {
    trajectories: usize,
    max_constant: f64,
    max_split_ratio: f64,
    ceiling: Option<f64>,
    pass: bool,
}

fn validate(s: &InequalitySection) -> Result<(), CliError> {
    if s.seeds.is_empty() {
        return Err(CliError::Usage("inequalities.seeds is empty".into()));
    }
    if s.alphas.is_empty() || s.exponents.is_empty() {
        return Err(CliError::Usage("inequalities needs at least one alpha and one exponent pair".into()));
    }
    if s.alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(CliError::Usage("alphas must be finite and nonnegative".into()));
    }
    for [p, q] in &s.exponents {
        if !(*p >= 1.0 && *q >= 1.0) || p > q {
            return Err(CliError::Usage(format!("exponent pair ({p}, {q}) needs 1 <= p <= q")));
        }
    }
    if !s.lower_floors.is_empty() && s.lower_floors.len() != s.alphas.len() {
        return Err(CliError::Usage("lower_floors needs one entry per alpha".into()));
    }
    if s.log_interpolation && (s.trajectory_samples < 2 || !(s.trajectory_dt > 0.0)) {
        return Err(CliError::Usage("log interpolation needs >= 2 samples and a positive dt".into()));
    }
    Ok(())
}

fn field(family: FieldFamily, grid: Grid2D, seed: u64) -> SpectralField {
    match family {
        FieldFamily::Spikes => random_spikes(grid, seed),
        FieldFamily::WhiteNoise => white_noise_mean_zero(grid, seed),
    }
}

fn heat(f: &SpectralField, t: f64) -> SpectralField {
    f.apply_real_multiplier(|kx, ky| (-(kx * kx + ky * ky) * t).exp())
}

fn fmt(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x:.17e}")
    }
}

fn exponent(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        x.to_string()
    }
}

struct Row {
    seed: u64,
    j: i32,
    combo: usize,
    upper: (f64, f64, Option<f64>),
    lower: Option<f64>,
}

fn bernstein(
    s: &InequalitySection,
    p: &DyadicPartition,
    shells: &[i32],
    combos: &[(f64, f64, f64)],
) -> Result<(String, Vec<BernsteinSummary>), CliError> {
    let rows: Vec<Vec<Row>> = s
        .seeds
        .par_iter()
        .map(|&seed| -> Result<Vec<Row>, CliError> {
            let f = field(s.field, *p.grid(), seed);
            let mut rows = Vec::new();
            for (combo, &(alpha, pp, qq)) in combos.iter().enumerate() {
                for &j in shells {
                    let r = bernstein_report(&f, j, alpha, pp, qq, p)?;
                    rows.push(Row {
                        seed,
                        j,
                        combo,
                        upper: (r.upper.lhs, r.upper.rhs, r.upper.constant()),
                        lower: r.lower.constant(),
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_, _>>()?;
    let mut csv = String::from("seed,j,alpha,p,q,lhs,upper_rhs,upper_constant,lower_constant\n");
    let mut upper = vec![vec![0.0f64; shells.len()]; combos.len()];
    let mut lower = vec![INF; combos.len()];
    for r in rows.iter().flatten() {
        let (alpha, pp, qq) = combos[r.combo];
        let na = |c: Option<f64>| c.map_or_else(|| "nan".to_string(), fmt);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            r.seed,
            r.j,
            alpha,
            exponent(pp),
            exponent(qq),
            fmt(r.upper.0),
            fmt(r.upper.1),
            na(r.upper.2),
            na(r.lower)
        );
        let i = shells.iter().position(|&j| j == r.j).expect("shell in sweep");
        upper[r.combo][i] = upper[r.combo][i].max(r.upper.2.unwrap_or(0.0));
        lower[r.combo] = lower[r.combo].min(r.lower.unwrap_or(0.0));
    }
    let summaries = combos
        .iter()
        .enumerate()
        .map(|(c, &(alpha, pp, qq))| {
            let hi = upper[c].iter().cloned().fold(0.0, f64::max);
            let lo = upper[c].iter().cloned().fold(INF, f64::min);
            let spread = if hi > 0.0 { 1.0 - lo / hi } else { 1.0 };
            let ai = s.alphas.iter().position(|&a| a == alpha).expect("alpha in sweep");
            let floor = s.lower_floors.get(ai).copied().unwrap_or(0.0);
            let pass = spread <= s.max_spread && lower[c] > 0.0 && lower[c] >= floor;
            BernsteinSummary {
                alpha,
                p: exponent(pp),
                q: exponent(qq),
                upper_by_shell: shells.iter().copied().zip(upper[c].iter().copied()).collect(),
                spread,
                min_lower: lower[c],
                lower_floor: floor,
                pass,
            }
        })
        .collect();
    Ok((csv, summaries))
}

fn log_interpolation(s: &InequalitySection, p: &DyadicPartition) -> Result<(String, LogSummary), CliError> {
    let profile = Profile::default();
    let j_hi = p.j_max().min(4);
    let times: Vec<f64> = (0..s.trajectory_samples).map(|i| s.trajectory_dt * i as f64).collect();
    let reports = s
        .seeds
        .par_iter()
        .map(|&seed| {
            let f0 = band_field(*p.grid(), seed, 0.min(j_hi), j_hi, &profile);
            let traj = Trajectory::new(times.clone(), times.iter().map(|&t| heat(&f0, t)).collect())?;
            Ok((seed, log_interp_report(&traj, p)?))
        })
        .collect::<Result<Vec<_>, besov_mhd::Error>>()?;
    let mut csv = String::from("seed,lhs,rhs,constant,n_split,split_ratio\n");
    let mut max_c = 0.0f64;
    let mut max_split = 0.0f64;
    for (seed, r) in &reports {
        let c = r.estimate.constant().unwrap_or(if r.estimate.is_vacuous() { 0.0 } else { INF });
        max_c = max_c.max(c);
        max_split = max_split.max(r.split_optimality_ratio());
        let _ = writeln!(
            csv,
            "{seed},{},{},{},{},{}",
            fmt(r.estimate.lhs),
            fmt(r.estimate.rhs),
            fmt(c),
            r.n_split,
            fmt(r.split_optimality_ratio())
        );
    }
    let pass = max_c.is_finite() && max_split <= 2.0 && s.log_constant_ceiling.is_none_or(|ceil| max_c <= ceil);
    let summary = LogSummary {
        trajectories: reports.len(),
        max_constant: max_c,
        max_split_ratio: max_split,
        ceiling: s.log_constant_ceiling,
        pass,
    };
    Ok((csv, summary))
}

pub fn run(ctx: &Context<'_>, out: &mut Outputs<'_>) -> Result<Outcome, CliError> {
    let s = &ctx.config.inequalities;
    validate(s)?;
    let grid = Grid2D::new(s.n, s.length).map_err(CliError::usage)?;
    let p = DyadicPartition::new(grid, Profile::default());
    let shells: Vec<i32> = (2.max(p.j_min())..p.j_max()).collect();
    if shells.len() < 2 {
        return Err(CliError::Usage(format!("n = {} has fewer than two interior shells for a Bernstein sweep", s.n)));
    }
    let combos: Vec<(f64, f64, f64)> =
        s.alphas.iter().flat_map(|&a| s.exponents.iter().map(move |&[pp, qq]| (a, pp, qq))).collect();
    let (csv, bern) = bernstein(s, &p, &shells, &combos)?;
    out.text("bernstein.csv", &csv)?;
    let mut breaches: Vec<String> = bern
        .iter()
        .filter(|b| !b.pass)
        .map(|b| format!("Bernstein alpha={} (p,q)=({},{}) spread {:.4} lower {:.4}", b.alpha, b.p, b.q, b.spread, b.min_lower))
        .collect();
    let log = if s.log_interpolation {
        let (csv, summary) = log_interpolation(s, &p)?;
        out.text("log_interpolation.csv", &csv)?;
        if !summary.pass {
            breaches.push(format!("log interpolation max constant {:.4}", summary.max_constant));
        }
        Some(summary)
    } else {
        None
    };
    out.json(
        "report.json",
        &json!({ "n": s.n, "length": s.length, "field": s.field, "shells": shells, "bernstein": bern, "log_interpolation": log }),
    )?;
    let summary = json!({
        "seeds": s.seeds.len(),
        "max_spread": bern.iter().map(|b| b.spread).fold(0.0, f64::max),
        "min_lower": bern.iter().map(|b| b.min_lower).fold(INF, f64::min),
        "log_max_constant": log.as_ref().map(|l| l.max_constant),
    });
    Ok(Outcome::checked(summary, breaches))
}
