use besov_mhd::besov::Trajectory;
use besov_mhd::mhd::{initial_data, InitialData, MhdState, SolverConfig};
use besov_mhd::partition::{DyadicPartition, Profile};
use besov_mhd::random::band_vector;
use besov_mhd::spectral::{Grid2D, SpectralField, VectorField2D};
use besov_mhd::uniqueness::{
    convergence_study, osgood_envelope, run_pair, stability_csv, stability_norms, term_audit, verify_closure,
    Forcing, PairTrajectory, Perturbation, Target, STABILITY_HEADER,
};

const NU: f64 = 0.05;

fn grid(n: usize) -> Grid2D {
    Grid2D::periodic(n).unwrap()
}

fn partition(g: Grid2D) -> DyadicPartition {
    DyadicPartition::new(g, Profile::default())
}

fn data(b_norm: f64) -> InitialData {
    InitialData::RandomBand { seed: 3, j_lo: 0, j_hi: 1, u_norm: 6.0, b_norm }
}

fn config(g: Grid2D, t_end: f64, b_norm: f64) -> SolverConfig {
    let mut c = SolverConfig::new(g, NU, 5e-3, t_end, data(b_norm));
    c.snapshot_stride = 5;
    c
}

fn shell(epsilon: f64, target: Target) -> Perturbation {
    Perturbation::Shell { shell: 1, epsilon, seed: 7, target }
}

fn pair(n: usize, epsilon: f64, target: Target, t_end: f64) -> PairTrajectory {
    let g = grid(n);
    let c = config(g, t_end, 6.0);
    run_pair(&initial_data(&c.initial, g, NU).unwrap(), &shell(epsilon, target), &c).unwrap()
}

/// RK4 with a fixed step, used as the reference for the adaptive integrator.
fn rk4_reference(x0: f64, c: f64, v: f64, t_end: f64, dt: f64) -> f64 {
    let f = |r: f64| c * r * (std::f64::consts::E + v / r).ln();
    let steps = (t_end / dt).round() as usize;
    let mut r = x0;
    for _ in 0..steps {
        let k1 = f(r);
        let k2 = f(r + 0.5 * dt * k1);
        let k3 = f(r + 0.5 * dt * k2);
        let k4 = f(r + dt * k3);
        r += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    r
}

#[test]
fn zero_perturbation_gives_zero_differences() {
    let p = pair(32, 0.0, Target::Both, 0.2);
    for (du, db) in p.delta_u.iter().zip(&p.delta_b) {
        assert!(du.is_zero() && db.is_zero());
    }
    let part = partition(grid(32));
    assert!(stability_norms(&p, &part).unwrap().iter().all(|r| r.x == 0.0 && r.y == 0.0 && r.v == 0.0
        && r.k.iter().chain(&r.j).all(|&v| v == 0.0)));
    assert!(term_audit(&p, 0.2, &part, 1).unwrap().iter().all(|r| r.is_vacuous()));
    let closure = verify_closure(&p, &part).unwrap();
    assert!(closure.reports().iter().all(|r| r.is_vacuous()));
    assert_eq!(closure.envelope_c, None);
}

#[test]
fn differences_match_snapshots_exactly() {
    let p = pair(32, 1e-3, Target::Both, 0.1);
    for (i, (a, b)) in p.run1.snapshots().iter().zip(p.run2.snapshots()).enumerate() {
        assert_eq!(p.delta_u[i], a.u.try_sub(&b.u).unwrap());
        assert_eq!(p.delta_b[i], a.b.try_sub(&b.b).unwrap());
    }
}

#[test]
fn magnetic_perturbation_drives_velocity_difference() {
    let p = pair(32, 1e-3, Target::Magnetic, 0.1);
    assert!(p.delta_u[0].is_zero());
    assert!(!p.delta_b[0].is_zero());
    assert!(p.delta_u[1..].iter().all(|d| d.l2_norm_spectral() > 0.0));
}

#[test]
fn response_is_linear_for_small_perturbations() {
    let part = partition(grid(32));
    let x_of = |eps| stability_norms(&pair(32, eps, Target::Both, 0.2), &part).unwrap();
    let (a, b) = (x_of(1e-4), x_of(2e-4));
    for (ra, rb) in a.iter().zip(&b) {
        let ratio = rb.x / ra.x;
        assert!((1.5..=2.5).contains(&ratio), "t = {}: {ratio}", ra.t);
    }
}

#[test]
fn stability_series_are_monotone() {
    let p = pair(32, 1e-2, Target::Both, 0.3);
    let rec = stability_norms(&p, &partition(grid(32))).unwrap();
    for w in rec.windows(2) {
        assert!(w[1].x >= w[0].x && w[1].y >= w[0].y && w[1].v >= w[0].v);
        for n in 0..4 {
            assert!(w[1].k[n] >= w[0].k[n]);
        }
    }
    assert!(rec.iter().all(|r| r.x >= 0.0 && r.y >= 0.0 && r.v >= 0.0));
}

#[test]
fn single_shell_pair_has_closed_form_x() {
    let g = grid(32);
    let part = partition(g);
    // Mode (2, 2) has |k| = 2 sqrt 2 in [8/3, 3]: only shell j = 1 sees it, with weight one.
    let psi = SpectralField::cosine_mode(g, 2, 2, 0.3).unwrap();
    let du = VectorField2D::from_stream_function(&psi);
    let u1 = band_vector(g, 2, 0, 0, &Profile::default());
    let u2 = u1.try_sub(&du).unwrap();
    let zero = VectorField2D::zeros(g);
    let times: Vec<f64> = (0..6).map(|i| 0.1 * i as f64).collect();
    let traj = |u: &VectorField2D| {
        let s: Vec<MhdState> = times.iter().map(|&t| MhdState::new(u.clone(), zero.clone(), t, NU).unwrap()).collect();
        Trajectory::new(times.clone(), s).unwrap()
    };
    let p = PairTrajectory::from_trajectories(traj(&u1), traj(&u2)).unwrap();
    let norm = du.l2_norm_spectral();
    for r in stability_norms(&p, &part).unwrap() {
        let expected = 0.5 * norm + r.t * 2.0 * norm;
        assert!((r.x - expected).abs() <= 1e-10 * expected, "t = {}: {} vs {expected}", r.t, r.x);
        assert_eq!(r.y, 0.0);
    }
}

#[test]
fn unmagnetised_pair_has_vacuous_magnetic_closure() {
    let g = grid(32);
    let c = config(g, 0.2, 0.0);
    let base = initial_data(&c.initial, g, NU).unwrap();
    let p = run_pair(&base, &shell(1e-3, Target::Velocity), &c).unwrap();
    assert!(p.delta_b.iter().all(VectorField2D::is_zero));
    let closure = verify_closure(&p, &partition(g)).unwrap();
    assert!(closure.magnetic.is_vacuous());
    assert_eq!(closure.magnetic.rhs, 0.0);
    assert!(closure.velocity.constant().is_some());
}

#[test]
fn pair_validation() {
    let g = grid(16);
    let c = config(g, 0.05, 1.0);
    let base = initial_data(&c.initial, g, NU).unwrap();
    let bad = Perturbation::Field {
        du: VectorField2D::new(SpectralField::cosine_mode(g, 1, 0, 1.0).unwrap(), SpectralField::zeros(g)).unwrap(),
        db: VectorField2D::zeros(g),
    };
    assert!(run_pair(&base, &bad, &c).is_err());
    assert!(run_pair(&base, &shell(-1.0, Target::Both), &c).is_err());
    let mut adaptive = c.clone();
    adaptive.time_step = besov_mhd::mhd::TimeStep::Adaptive { safety: 0.4, dt_max: 0.01 };
    assert!(run_pair(&base, &shell(1e-3, Target::Both), &adaptive).is_err());
}

#[test]
fn guarded_pair_is_truncated_and_rejected_by_closure() {
    let g = grid(32);
    let mut c = config(g, 0.5, 6.0);
    c.guard_ceiling = Some(1.0);
    let base = initial_data(&c.initial, g, NU).unwrap();
    let p = run_pair(&base, &shell(1e-3, Target::Both), &c).unwrap();
    assert!(!p.is_complete());
    assert!(p.len() >= 1);
    assert!(verify_closure(&p, &partition(g)).is_err());
}

#[test]
fn osgood_zero_and_exponential_cases() {
    let times: Vec<f64> = (0..=20).map(|i| 0.05 * i as f64).collect();
    let z = osgood_envelope(0.0, 3.0, &Forcing::Constant(5.0), &times).unwrap();
    assert!(z.iter().all(|&r| r == 0.0));
    let e = osgood_envelope(0.2, 1.5, &Forcing::Constant(0.0), &times).unwrap();
    for (t, r) in times.iter().zip(&e) {
        let exact = 0.2 * (1.5 * t).exp();
        assert!((r - exact).abs() <= 1e-8 * exact);
    }
}

#[test]
fn osgood_matches_fine_step_reference() {
    let got = *osgood_envelope(1e-6, 1.0, &Forcing::Constant(1.0), &[0.0, 1.0]).unwrap().last().unwrap();
    let reference = rk4_reference(1e-6, 1.0, 1.0, 1.0, 1e-6);
    assert!((got - reference).abs() <= 1e-6 * reference, "{got} vs {reference}");
}

#[test]
fn study_envelope_dominates_and_zero_row_is_zero() {
    let g = grid(32);
    let c = config(g, 0.3, 6.0);
    let base = initial_data(&c.initial, g, NU).unwrap();
    let st = convergence_study(&base, 1, 7, Target::Magnetic, &[1e-2, 1e-3, 0.0], &c, &partition(g)).unwrap();
    assert!(st.envelope_holds());
    let slope = st.slope.unwrap();
    assert!((slope - 1.0).abs() <= 0.2, "{slope}");
    let zero = st.rows.last().unwrap();
    assert_eq!((zero.sup_x, zero.sup_y, zero.margin), (0.0, 0.0, 0.0));
    let csv = stability_csv(&st.rows[0].records, &st.rows[0].envelope);
    assert!(csv.starts_with(STABILITY_HEADER));
    assert_eq!(csv.lines().count(), st.rows[0].records.len() + 1);
    assert!(convergence_study(&base, 1, 7, Target::Both, &[1e-3, 1e-2], &c, &partition(g)).is_err());
    assert!(convergence_study(&base, 1, 7, Target::Both, &[], &c, &partition(g)).is_err());
}
