use besov_mhd::besov::{
    besov_norm, mixed_norm, shell_lp_norms, sobolev_norm, time_outer_norm, BesovIndex, ShellTable, Trajectory,
};
use besov_mhd::partition::{DyadicPartition, Profile};
use besov_mhd::random::{band_field, white_noise, white_noise_band_limited};
use besov_mhd::spectral::{lp_norm, Grid2D, SpectralField, VectorField2D};

const INF: f64 = f64::INFINITY;

fn partition(n: usize) -> DyadicPartition {
    DyadicPartition::new(Grid2D::periodic(n).unwrap(), Profile::default())
}

fn heat_trajectory(f0: &SpectralField, steps: usize, dt: f64) -> Trajectory<SpectralField> {
    let times: Vec<f64> = (0..=steps).map(|i| dt * i as f64).collect();
    let snaps = times.iter().map(|&t| f0.apply_real_multiplier(|kx, ky| (-(kx * kx + ky * ky) * t).exp())).collect();
    Trajectory::new(times, snaps).unwrap()
}

#[test]
fn shell_l2_norms_agree_with_nodal_norms() {
    let p = partition(64);
    let f = white_noise(*p.grid(), 2);
    let spectral = shell_lp_norms(&f, 2.0, &p).unwrap();
    for (j, s) in p.shells().zip(&spectral) {
        let nodal = lp_norm(&p.dyadic_block(&f, j), 2.0).unwrap();
        assert!((nodal - s).abs() <= 1e-10 * nodal.max(1e-300), "j = {j}");
    }
}

#[test]
fn besov_22_brackets_sobolev_by_overlap_bounds() {
    let p = partition(64);
    let (lo, hi) = p.energy_overlap_bounds();
    for seed in 0..10 {
        let f = white_noise_band_limited(*p.grid(), seed);
        let b = besov_norm(&f, BesovIndex::homogeneous(0.0, 2.0, 2.0), &p).unwrap();
        let l2 = sobolev_norm(&f, 0.0).unwrap();
        assert!(b >= lo.sqrt() * l2 * (1.0 - 1e-12) && b <= hi.sqrt() * l2 * (1.0 + 1e-12));
    }
}

#[test]
fn single_shell_closed_forms() {
    let p = partition(32);
    let g = *p.grid();
    // |(2, 2)| = 2 sqrt 2 sits where only phi(2^-1 .) is nonzero, and equals one.
    let f = SpectralField::cosine_mode(g, 2, 2, 1.3).unwrap();
    for pp in [1.0, 2.0, INF] {
        let norm = lp_norm(&f, pp).unwrap();
        for (s, q) in [(-1.0, 1.0), (0.5, 2.0), (2.0, INF)] {
            let b = besov_norm(&f, BesovIndex::homogeneous(s, pp, q), &p).unwrap();
            let expected = 2f64.powf(s) * norm;
            assert!((b - expected).abs() <= 1e-10 * expected, "p = {pp}, s = {s}, q = {q}");
        }
    }
    let inh = besov_norm(&f, BesovIndex::inhomogeneous(1.0, 2.0, 1.0), &p).unwrap();
    assert!((inh - 3.0 * f.l2_norm_spectral()).abs() <= 1e-10 * inh);
}

#[test]
fn vector_norms_combine_components() {
    let p = partition(32);
    let g = *p.grid();
    let a = band_field(g, 1, 0, 2, &Profile::default());
    let b = band_field(g, 2, 0, 2, &Profile::default());
    let v = VectorField2D::new(a.clone(), b.clone()).unwrap();
    let sv = shell_lp_norms(&v, 2.0, &p).unwrap();
    let sa = shell_lp_norms(&a, 2.0, &p).unwrap();
    let sb = shell_lp_norms(&b, 2.0, &p).unwrap();
    for i in 0..sv.len() {
        assert!((sv[i] - sa[i].hypot(sb[i])).abs() <= 1e-12 * sv[i].max(1e-300));
    }
}

#[test]
fn fubini_case_of_mixed_norms() {
    let p = partition(64);
    let f0 = band_field(*p.grid(), 4, -1, 4, &Profile::default());
    let traj = heat_trajectory(&f0, 12, 0.02);
    for s in [-1.0, 0.0, 2.0] {
        let idx = BesovIndex::homogeneous(s, 2.0, 1.0);
        let tilde = mixed_norm(&traj, 1.0, idx, &p).unwrap();
        let outer = time_outer_norm(&traj, 1.0, idx, &p).unwrap();
        assert!((tilde - outer).abs() <= 1e-10 * outer, "s = {s}");
    }
}

#[test]
fn minkowski_ordering_of_mixed_norms() {
    let p = partition(64);
    let f0 = band_field(*p.grid(), 5, -1, 4, &Profile::default());
    let traj = heat_trajectory(&f0, 12, 0.05);
    let idx = BesovIndex::homogeneous(1.0, 2.0, INF);
    // r <= q: the Chemin-Lerner norm is the smaller one.
    assert!(mixed_norm(&traj, 1.0, idx, &p).unwrap() <= time_outer_norm(&traj, 1.0, idx, &p).unwrap() * (1.0 + 1e-12));
    let idx1 = BesovIndex::homogeneous(1.0, 2.0, 1.0);
    // r >= q: reversed.
    assert!(mixed_norm(&traj, INF, idx1, &p).unwrap() >= time_outer_norm(&traj, INF, idx1, &p).unwrap() * (1.0 - 1e-12));
}

#[test]
fn shell_table_running_norms() {
    let times = vec![0.0, 1.0, 3.0];
    let table = ShellTable::from_samples(times, 0, 2.0, &[vec![1.0, 0.0], vec![1.0, 2.0], vec![3.0, 2.0]]);
    assert_eq!(table.mixed_norm(0, INF, 0.0, INF), 1.0);
    assert_eq!(table.mixed_norm(2, INF, 1.0, INF), 4.0);
    // Shell 0: 1 + 4 = 5; shell 1: 1 + 4 = 5, weighted by 2.
    assert_eq!(table.mixed_norm(2, 1.0, 1.0, 1.0), 15.0);
    assert_eq!(table.instant_norm(1, 0.0, 1.0), 3.0);
    assert!(table.to_csv(0.0).lines().count() >= 3);
}

#[test]
fn preconditions() {
    let p = partition(16);
    let f = white_noise(*p.grid(), 1);
    assert!(besov_norm(&f, BesovIndex::homogeneous(-1.0, 2.0, 2.0), &p).is_err());
    assert!(besov_norm(&f, BesovIndex::homogeneous(1.0, 0.5, 2.0), &p).is_err());
    assert!(besov_norm(&f, BesovIndex::homogeneous(1.0, 2.0, 0.0), &p).is_err());
    assert!(sobolev_norm(&f, -1.0).is_err());
    let other = partition(32);
    assert!(shell_lp_norms(&f, 2.0, &other).is_err());
    let one = Trajectory::new(vec![0.0], vec![f.clone().with_zero_mean()]).unwrap();
    assert!(mixed_norm(&one, 1.0, BesovIndex::homogeneous(0.0, 2.0, 1.0), &p).is_err());
    assert!(Trajectory::new(vec![1.0, 0.0], vec![f.clone(), f.clone()]).is_err());
}
