//! `verify-partition`: the Littlewood-Paley invariant suite on every configured grid.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use besov_mhd::partition::{DyadicPartition, Profile};
use besov_mhd::random::{band_field, white_noise, white_noise_mean_zero};
use besov_mhd::spectral::{Grid2D, SpectralField};

use super::{Context, Outcome};
use crate::error::CliError;
use crate::manifest::Outputs;

#[derive(Debug, Serialize)]
struct GridReport {
    n: usize,
    length: f64,
    j_min: i32,
    j_max: i32,
    unity_residual: f64,
    reconstruction_error: f64,
    composition_error: f64,
    support_pairs: usize,
    support_holds: bool,
    pass: bool,
}

fn build(ctx: &Context<'_>, n: usize) -> Result<DyadicPartition, CliError> {
    let s = &ctx.config.partition;
    let grid = Grid2D::new(n, s.length).map_err(CliError::usage)?;
    let mut p = DyadicPartition::new(grid, Profile::new(s.smoothness).map_err(CliError::usage)?);
    if let Some(c) = ctx.config.fault.corrupt_phi {
        if c.flat >= grid.len() {
            return Err(CliError::Usage(format!("corrupt_phi.flat {} is outside the {n}x{n} grid", c.flat)));
        }
        p.corrupt_phi_sample(c.j, c.flat, c.value);
    }
    Ok(p)
}

fn block_sum(p: &DyadicPartition, f: &SpectralField) -> SpectralField {
    let g = *p.grid();
    p.shells().map(|j| p.dyadic_block(f, j)).fold(SpectralField::zeros(g), |a, b| a.axpy(1.0, &b))
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

fn check(ctx: &Context<'_>, p: &DyadicPartition) -> Result<GridReport, CliError> {
    let s = &ctx.config.partition;
    let g = *p.grid();
    let seed = |i: u64| s.seed.wrapping_add(i);
    let unity = p.homogeneous_residual().max(p.inhomogeneous_residual());
    let reconstruction = max_of(
        (0..s.reconstruction_fields)
            .into_par_iter()
            .map(|i| {
                let f = white_noise_mean_zero(g, seed(i));
                block_sum(p, &f).relative_difference(&f)
            })
            .collect::<Vec<_>>(),
    );
    let composition = max_of(
        (0..s.composition_fields)
            .into_par_iter()
            .map(|i| {
                let f = white_noise(g, seed(i));
                let f = f.scale(1.0 / f.l2_norm_spectral());
                let mut worst = 0.0f64;
                for j in p.shells() {
                    for k in p.shells().filter(|k| (j - k).abs() >= 2) {
                        worst = worst.max(p.dyadic_block(&p.dyadic_block(&f, k), j).l2_norm_spectral());
                    }
                }
                worst
            })
            .collect::<Vec<_>>(),
    );
    let pairs: Vec<(i32, i32)> =
        p.shells().flat_map(|k| p.shells().filter(move |j| (j - k).abs() >= 5).map(move |j| (j, k))).collect();
    let support = (0..s.support_fields)
        .into_par_iter()
        .map(|i| {
            let f = band_field(g, seed(i), p.j_min(), p.j_max(), p.profile());
            pairs.iter().try_fold(true, |ok, &(j, k)| Ok::<_, CliError>(ok && p.support_audit(&f, j, k)?))
        })
        .collect::<Result<Vec<bool>, CliError>>()?
        .into_iter()
        .all(|b| b);
    let pass = unity <= s.unity_tolerance
        && reconstruction <= s.reconstruction_tolerance
        && composition <= s.composition_tolerance
        && support;
    Ok(GridReport {
        n: g.n(),
        length: g.length(),
        j_min: p.j_min(),
        j_max: p.j_max(),
        unity_residual: unity,
        reconstruction_error: reconstruction,
        composition_error: composition,
        support_pairs: pairs.len(),
        support_holds: support,
        pass,
    })
}

pub fn run(ctx: &Context<'_>, out: &mut Outputs<'_>) -> Result<Outcome, CliError> {
    let s = &ctx.config.partition;
    if s.grids.is_empty() {
        return Err(CliError::Usage("partition.grids is empty".into()));
    }
    let partitions = s.grids.iter().map(|&n| build(ctx, n)).collect::<Result<Vec<_>, _>>()?;
    let reports = partitions.iter().map(|p| check(ctx, p)).collect::<Result<Vec<_>, _>>()?;
    out.text("profiles.csv", &partitions[0].profiles_csv(3.0, 301))?;
    let tolerances = json!({
        "unity": s.unity_tolerance,
        "reconstruction": s.reconstruction_tolerance,
        "composition": s.composition_tolerance,
    });
    out.json("report.json", &json!({ "tolerances": tolerances, "grids": reports }))?;
    let breaches: Vec<String> =
        reports.iter().filter(|r| !r.pass).map(|r| format!("partition invariants fail on n = {}", r.n)).collect();
    let summary = json!({
        "grids": s.grids,
        "max_unity_residual": max_of(reports.iter().map(|r| r.unity_residual)),
        "max_reconstruction_error": max_of(reports.iter().map(|r| r.reconstruction_error)),
        "max_composition_error": max_of(reports.iter().map(|r| r.composition_error)),
        "support_holds": reports.iter().all(|r| r.support_holds),
    });
    Ok(Outcome::checked(summary, breaches))
}
