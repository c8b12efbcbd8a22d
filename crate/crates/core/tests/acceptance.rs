//! Acceptance gate: every criterion at its pinned tolerance, one PASS/FAIL line each.
//!
//! Baselines marked "measured" were recorded from this implementation and are
//! pinned here; the tolerances themselves are fixed targets.

use std::time::Instant;

use besov_mhd::besov::{besov_norm, mixed_norm, sobolev_norm, time_outer_norm, BesovIndex, Trajectory};
use besov_mhd::estimate::EstimateReport;
use besov_mhd::inequality::{bernstein_report, log_interp_report};
use besov_mhd::mhd::{energy_identity_residual, initial_data, integrate, InitialData, MhdState, SolverConfig};
use besov_mhd::partition::{DyadicPartition, Profile};
use besov_mhd::random::{band_field, random_spikes, white_noise, white_noise_band_limited, white_noise_mean_zero};
use besov_mhd::spectral::{lp_norm, Grid2D, SpectralField};
use besov_mhd::uniqueness::{
    convergence_study, osgood_envelope, run_pair, term_audit, verify_closure, Forcing, Perturbation, Target,
};

const INF: f64 = f64::INFINITY;

/// Ratio envelope of `Bdot^s_{2,2}` to `Hdot^s` over s in {-1, 0, 1, 2} (measured: [0.480, 1.391]).
const SOBOLEV_ENVELOPE: (f64, f64) = (0.47, 1.40);
/// Lower Bernstein ratio floors per alpha in {0, 1/2, 1} (measured minima 1.000, 1.589, 2.676).
const BERNSTEIN_LOWER: [f64; 3] = [0.99, 1.58, 2.67];
/// Log-interpolation implied constant ceiling (measured max 0.583 at n = 128).
const LOG_INTERP_BASELINE: f64 = 0.6;

struct Check {
    name: String,
    ok: bool,
    detail: String,
}

#[derive(Default)]
struct Criterion {
    checks: Vec<Check>,
}

impl Criterion {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        self.checks.push(Check { name: name.to_string(), ok, detail });
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }
}

fn partition(n: usize) -> DyadicPartition {
    DyadicPartition::new(Grid2D::periodic(n).unwrap(), Profile::default())
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

fn heat(f: &SpectralField, t: f64) -> SpectralField {
    f.apply_real_multiplier(|kx, ky| (-(kx * kx + ky * ky) * t).exp())
}

fn partition_blocks() -> Criterion {
    let mut c = Criterion::default();
    for n in [64, 128] {
        let p = partition(n);
        let r = p.homogeneous_residual().max(p.inhomogeneous_residual());
        c.check(&format!("unity residual n={n}"), r <= 1e-12, format!("{r:.2e}"));
    }
    let p = partition(64);
    let g = *p.grid();
    let recon = max_of((0..100).map(|seed| {
        let f = white_noise_mean_zero(g, seed);
        let sum = p.shells().map(|j| p.dyadic_block(&f, j)).fold(SpectralField::zeros(g), |a, b| a.axpy(1.0, &b));
        sum.relative_difference(&f)
    }));
    c.check("reconstruction 100 seeds", recon <= 1e-10, format!("{recon:.2e}"));
    let mut comp: f64 = 0.0;
    for seed in 0..10 {
        let f = white_noise(g, seed);
        let f = f.scale(1.0 / f.l2_norm_spectral());
        for j in p.shells() {
            for k in p.shells().filter(|k| (j - k).abs() >= 2) {
                comp = comp.max(p.dyadic_block(&p.dyadic_block(&f, k), j).l2_norm_spectral());
            }
        }
    }
    c.check("block composition |j-k|>=2", comp <= 1e-14, format!("{comp:.2e}"));
    let p = partition(128);
    let mut support = true;
    for seed in 0..50 {
        let f = band_field(*p.grid(), seed, -1, 6, &Profile::default());
        for k in p.shells() {
            for j in p.shells().filter(|j| (j - k).abs() >= 5) {
                support &= p.support_audit(&f, j, k).unwrap();
            }
        }
    }
    c.check("product support |j-k|>=5, 50 seeds", support, String::new());
    c
}

fn norm_correctness() -> Criterion {
    let mut c = Criterion::default();
    let p = partition(64);
    let g = *p.grid();
    let planch = max_of((0..10).map(|seed| {
        let f = white_noise(g, seed);
        (lp_norm(&f, 2.0).unwrap() - f.l2_norm_spectral()).abs() / f.l2_norm_spectral()
    }));
    c.check("Plancherel", planch <= 1e-10, format!("{planch:.2e}"));

    let (lo_env, hi_env) = SOBOLEV_ENVELOPE;
    let mut lo = INF;
    let mut hi: f64 = 0.0;
    for n in [64, 128] {
        let p = partition(n);
        for s in [-1.0, 0.0, 1.0, 2.0] {
            for seed in 0..50 {
                let f = white_noise_band_limited(*p.grid(), seed);
                let r = besov_norm(&f, BesovIndex::homogeneous(s, 2.0, 2.0), &p).unwrap() / sobolev_norm(&f, s).unwrap();
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
    }
    c.check(
        "B^s_22 / H^s in fixed envelope, C/c <= 4",
        lo >= lo_env && hi <= hi_env && hi_env / lo_env <= 4.0,
        format!("[{lo:.4}, {hi:.4}] within [{lo_env}, {hi_env}], C/c = {:.3}", hi_env / lo_env),
    );

    let p32 = partition(32);
    let f = SpectralField::cosine_mode(*p32.grid(), 2, 2, 1.3).unwrap();
    let mut single: f64 = 0.0;
    for pp in [1.0, 2.0, INF] {
        let norm = lp_norm(&f, pp).unwrap();
        for (s, q) in [(-1.0, 1.0), (0.5, 2.0), (2.0, INF)] {
            let b = besov_norm(&f, BesovIndex::homogeneous(s, pp, q), &p32).unwrap();
            single = single.max((b - 2f64.powf(s) * norm).abs() / (2f64.powf(s) * norm));
        }
    }
    c.check("single-shell closed forms", single <= 1e-10, format!("{single:.2e}"));

    let f0 = band_field(g, 4, -1, 4, &Profile::default());
    let times: Vec<f64> = (0..=12).map(|i| 0.02 * i as f64).collect();
    let traj = Trajectory::new(times.clone(), times.iter().map(|&t| heat(&f0, t)).collect()).unwrap();
    let fub = max_of([-1.0, 0.0, 2.0].map(|s| {
        let idx = BesovIndex::homogeneous(s, 2.0, 1.0);
        let a = mixed_norm(&traj, 1.0, idx, &p).unwrap();
        let b = time_outer_norm(&traj, 1.0, idx, &p).unwrap();
        (a - b).abs() / b
    }));
    c.check("mixed-norm Fubini r=q=1", fub <= 1e-10, format!("{fub:.2e}"));
    c
}

fn bernstein() -> Criterion {
    let mut c = Criterion::default();
    for n in [64, 128] {
        let p = partition(n);
        let fields: Vec<SpectralField> = (0..50).map(|seed| random_spikes(*p.grid(), seed)).collect();
        let shells: Vec<i32> = (2..p.j_max()).collect();
        for (ai, alpha) in [0.0, 0.5, 1.0].into_iter().enumerate() {
            for (pp, qq) in [(2.0, 2.0), (2.0, INF), (1.0, 2.0)] {
                let mut per_shell = vec![0.0f64; shells.len()];
                let mut lower = INF;
                for f in &fields {
                    for (i, &j) in shells.iter().enumerate() {
                        let r = bernstein_report(f, j, alpha, pp, qq, &p).unwrap();
                        per_shell[i] = per_shell[i].max(r.upper.constant().unwrap());
                        lower = lower.min(r.lower.constant().unwrap());
                    }
                }
                let spread = 1.0 - per_shell.iter().cloned().fold(INF, f64::min) / max_of(per_shell.iter().cloned());
                c.check(
                    &format!("n={n} alpha={alpha} (p,q)=({pp},{qq})"),
                    spread <= 0.25 && lower >= BERNSTEIN_LOWER[ai],
                    format!("spread {spread:.4}, lower {lower:.4} >= {}", BERNSTEIN_LOWER[ai]),
                );
            }
        }
    }
    c
}

fn log_interpolation() -> Criterion {
    let mut c = Criterion::default();
    let mut cmax = [0.0f64; 2];
    for (ni, n) in [64, 128].into_iter().enumerate() {
        let p = partition(n);
        let mut split: f64 = 0.0;
        let mut holds = true;
        let mut count = 0;
        for seed in 0..50 {
            let f0 = band_field(*p.grid(), seed, 0, 4, &Profile::default());
            let times: Vec<f64> = (0..=10).map(|i| 0.05 * i as f64).collect();
            let snaps = times.iter().map(|&t| heat(&f0, t)).collect();
            let r = log_interp_report(&Trajectory::new(times, snaps).unwrap(), &p).unwrap();
            let k = r.estimate.constant().unwrap_or(INF);
            holds &= k <= LOG_INTERP_BASELINE;
            cmax[ni] = cmax[ni].max(k);
            split = split.max(r.split_optimality_ratio());
            count += 1;
        }
        c.check(
            &format!("n={n} inequality on {count} trajectories"),
            holds,
            format!("max C {:.4} <= {LOG_INTERP_BASELINE}", cmax[ni]),
        );
        c.check(&format!("n={n} split choice vs optimum"), split <= 2.0, format!("ratio {split:.4}"));
    }
    let refine = cmax[1].max(cmax[0]) / cmax[1].min(cmax[0]);
    c.check("refinement 64 -> 128", refine <= 1.5, format!("{refine:.4}"));
    c
}

fn random_band(seed: u64, u: f64, b: f64) -> InitialData {
    InitialData::RandomBand { seed, j_lo: 0, j_hi: 1, u_norm: u, b_norm: b }
}

fn solver() -> Criterion {
    let mut c = Criterion::default();
    let g64 = Grid2D::periodic(64).unwrap();
    let mut tg = SolverConfig::new(g64, 0.1, 1e-3, 0.1, InitialData::TaylorGreen { amplitude: 1.0 });
    tg.snapshot_stride = 100;
    let run = integrate(&tg).unwrap();
    let fin = run.final_state();
    let exact = run.trajectory.snapshots()[0].u.scale((-0.2 * fin.t).exp());
    let err = fin.u.relative_difference(&exact);
    c.check("Taylor-Green decay", err <= 1e-8, format!("{err:.2e}"));

    let g32 = Grid2D::periodic(32).unwrap();
    let runs: Vec<MhdState> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&dt| integrate(&SolverConfig::new(g32, 0.05, dt, 0.4, random_band(11, 6.0, 6.0))).unwrap().final_state().clone())
        .collect();
    let diff = |x: &MhdState, y: &MhdState| {
        (x.u.axpy(-1.0, &y.u).coefficient_energy() + x.b.axpy(-1.0, &y.b).coefficient_energy()).sqrt()
    };
    let order = (diff(&runs[0], &runs[1]) / diff(&runs[1], &runs[2])).log2();
    c.check("RK self-convergence order", order >= 3.9, format!("{order:.3}"));

    let g128 = Grid2D::periodic(128).unwrap();
    let mut en = SolverConfig::new(g128, 0.05, 2e-3, 1.0, random_band(3, 6.0, 6.0));
    en.snapshot_stride = 1000;
    let run = integrate(&en).unwrap();
    let residual = energy_identity_residual(&run.monitors, 0.05);
    c.check("energy identity n=128, t in [0,1]", residual <= 1e-6, format!("{residual:.2e}"));
    let drift = max_of(run.monitors.iter().map(|m| m.div_u.max(m.div_b)));
    c.check("divergence drift", drift <= 1e-10, format!("{drift:.2e}"));

    let det = SolverConfig::new(g32, 0.05, 5e-3, 0.1, random_band(12, 6.0, 6.0));
    let with = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| integrate(&det).unwrap())
    };
    let (a, b) = (with(1), with(4));
    let same = a.trajectory.snapshots().iter().zip(b.trajectory.snapshots()).all(|(x, y)| {
        x.components().iter().zip(y.components()).all(|(p, q)| {
            p.coeffs().iter().zip(q.coeffs()).all(|(u, v)| u.re.to_bits() == v.re.to_bits() && u.im.to_bits() == v.im.to_bits())
        })
    });
    c.check("bit determinism 1 vs 4 workers", same, String::new());
    c
}

fn uniqueness_config(n: usize) -> (SolverConfig, MhdState, DyadicPartition) {
    let g = Grid2D::periodic(n).unwrap();
    let data = random_band(3, 6.0, 6.0);
    let mut cfg = SolverConfig::new(g, 0.05, 5e-3, 0.5, data.clone());
    cfg.snapshot_stride = 5;
    let base = initial_data(&data, g, 0.05).unwrap();
    (cfg, base, partition(n))
}

fn constants(reports: &[EstimateReport]) -> Vec<(String, Option<f64>)> {
    reports.iter().map(|r| (r.name.clone(), r.constant())).collect()
}

fn uniqueness() -> Criterion {
    let mut c = Criterion::default();
    let start = Instant::now();
    let (cfg, base, p) = uniqueness_config(64);
    let zero = run_pair(&base, &Perturbation::Shell { shell: 1, epsilon: 0.0, seed: 7, target: Target::Both }, &cfg).unwrap();
    let all_zero = zero.delta_u.iter().chain(&zero.delta_b).all(|d| d.is_zero());
    c.check("epsilon = 0 gives zero differences", all_zero, String::new());

    let study = convergence_study(&base, 1, 7, Target::Both, &[1e-2, 1e-3, 1e-4, 0.0], &cfg, &p).unwrap();
    let slope = study.slope.unwrap_or(f64::NAN);
    c.check("slope of log sup X vs log eps", (slope - 1.0).abs() <= 0.2, format!("{slope:.4}"));
    let margins: Vec<String> = study.rows.iter().map(|r| format!("{:.1e}:{:.2e}", r.epsilon, r.margin)).collect();
    c.check("X <= Osgood envelope at every sample", study.envelope_holds(), margins.join(" "));
    let elapsed = start.elapsed().as_secs_f64();
    c.check("sweep runtime n=64 <= 15 min", elapsed <= 900.0, format!("{elapsed:.1} s"));

    let mut by_n = Vec::new();
    for n in [64, 128] {
        let (cfg, base, p) = uniqueness_config(n);
        let pair = run_pair(&base, &Perturbation::Shell { shell: 1, epsilon: 1e-2, seed: 7, target: Target::Both }, &cfg).unwrap();
        let closure = verify_closure(&pair, &p).unwrap();
        let mut reports: Vec<EstimateReport> = closure.reports().into_iter().cloned().collect();
        reports.extend(term_audit(&pair, 0.5, &p, 2).unwrap());
        by_n.push(constants(&reports));
    }
    let finite = by_n.iter().flatten().all(|(_, k)| k.is_some());
    c.check("every closure and term constant finite", finite, format!("{} reports per grid", by_n[0].len()));
    let mut worst = (String::new(), 1.0f64);
    let mut aligned = by_n[0].len() == by_n[1].len();
    for ((na, a), (nb, b)) in by_n[0].iter().zip(&by_n[1]) {
        aligned &= na == nb;
        if let (Some(a), Some(b)) = (a, b) {
            let r = a.max(*b) / a.min(*b);
            if r > worst.1 {
                worst = (na.clone(), r);
            }
        }
    }
    c.check(
        "constants stable 64 -> 128 within 2x",
        aligned && finite && worst.1 <= 2.0,
        format!("worst {} ratio {:.4}", worst.0, worst.1),
    );
    c
}

fn osgood() -> Criterion {
    let mut c = Criterion::default();
    let times: Vec<f64> = (0..=20).map(|i| 0.05 * i as f64).collect();
    let z = osgood_envelope(0.0, 2.0, &Forcing::Constant(3.0), &times).unwrap();
    c.check("x0 = 0 gives zero envelope", z.iter().all(|&r| r == 0.0), String::new());
    let e = osgood_envelope(0.25, 1.7, &Forcing::Constant(0.0), &times).unwrap();
    let err = max_of(times.iter().zip(&e).map(|(t, r)| (r - 0.25 * (1.7 * t).exp()).abs() / (0.25 * (1.7 * t).exp())));
    c.check("V = 0 matches x0 e^{Ct}", err <= 1e-8, format!("{err:.2e}"));
    let got = *osgood_envelope(1e-6, 1.0, &Forcing::Constant(1.0), &[0.0, 1.0]).unwrap().last().unwrap();
    let f = |r: f64| r * (std::f64::consts::E + 1.0 / r).ln();
    let (dt, mut r) = (1e-6, 1e-6);
    for _ in 0..1_000_000 {
        let k1 = f(r);
        let k2 = f(r + 0.5 * dt * k1);
        let k3 = f(r + 0.5 * dt * k2);
        let k4 = f(r + dt * k3);
        r += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    let rel = (got - r).abs() / r;
    c.check("fine-step RK oracle", rel <= 1e-6, format!("{rel:.2e}"));
    c
}

fn main() {
    let criteria: [(&str, fn() -> Criterion); 7] = [
        ("1 partition and blocks", partition_blocks),
        ("2 norm correctness", norm_correctness),
        ("3 Bernstein inequalities", bernstein),
        ("4 logarithmic interpolation", log_interpolation),
        ("5 solver", solver),
        ("6 uniqueness experiment", uniqueness),
        ("7 Osgood integrator", osgood),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let t = Instant::now();
        let result = run();
        let verdict = if result.passed() { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {name} ({:.1} s)", t.elapsed().as_secs_f64());
        for check in &result.checks {
            println!("    [{}] {}: {}", if check.ok { "ok" } else { "FAIL" }, check.name, check.detail);
        }
        if !result.passed() {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
