//! The commutator and product terms of the difference system.
//!
//! With `delta = run1 - run2`, the velocity difference is driven by
//!
//! ```text
//! K_1 = sup_j 2^-j || [Delta_j, u_1.grad] du ||_{L^1_t L^2}
//! K_2 = sup_j 2^-j || Delta_j (du.grad u_2) ||_{L^1_t L^2}
//! K_3 = sup_j 2^-j || Delta_j (B_1.grad dB) ||_{L^1_t L^2}
//! K_4 = sup_j 2^-j || Delta_j (dB.grad B_2) ||_{L^1_t L^2}
//! ```
//!
//! and the magnetic difference by the instantaneous
//!
//! ```text
//! J_1 = sup_j || [Delta_j, u_1.grad] dB ||_2     J_2 = sup_j || Delta_j (du.grad B_2) ||_2
//! J_3 = sup_j || Delta_j (B_1.grad du) ||_2      J_4 = sup_j || Delta_j (dB.grad u_2) ||_2
//! ```
//!
//! Sub-splits follow the paraproduct decomposition of each product.

use rayon::prelude::*;

use super::pair::{PairTables, PairTrajectory, StabilityRecord};
use crate::besov::{shell_lp_norms, trapezoid, weighted_lq, ShellTable};
use crate::error::Result;
use crate::estimate::EstimateReport;
use crate::partition::DyadicPartition;
use crate::spectral::{advect_vector, VectorField2D};

fn adv(a: &VectorField2D, b: &VectorField2D) -> VectorField2D {
    advect_vector(a, b).expect("fields share the pair grid")
}

fn block(p: &DyadicPartition, v: &VectorField2D, j: i32) -> VectorField2D {
    v.map(|c| p.dyadic_block(c, j), true)
}

fn low(p: &DyadicPartition, v: &VectorField2D, j: i32) -> VectorField2D {
    v.map(|c| p.low_pass(c, j), true)
}

fn wide(p: &DyadicPartition, v: &VectorField2D, k: i32) -> VectorField2D {
    v.map(|c| p.widened_block(c, k), true)
}

fn shells(p: &DyadicPartition, v: &VectorField2D) -> Vec<f64> {
    shell_lp_norms(v, 2.0, p).expect("fields share the partition grid")
}

/// `|| Delta_j (a.grad y) - a.grad Delta_j y ||_2` per shell.
fn commutator_shells(p: &DyadicPartition, a: &VectorField2D, y: &VectorField2D) -> Vec<f64> {
    let full = adv(a, y);
    p.shells().map(|j| block(p, &full, j).axpy(-1.0, &adv(a, &block(p, y, j))).l2_norm_spectral()).collect()
}

/// The eight per-shell term values at one instant.
fn instant_terms(
    p: &DyadicPartition,
    pair: &PairTrajectory,
    i: usize,
) -> ([Vec<f64>; 4], [Vec<f64>; 4]) {
    let (s1, s2) = (&pair.run1.snapshots()[i], &pair.run2.snapshots()[i]);
    let (du, db) = (&pair.delta_u[i], &pair.delta_b[i]);
    let k = [
        commutator_shells(p, &s1.u, du),
        shells(p, &adv(du, &s2.u)),
        shells(p, &adv(&s1.b, db)),
        shells(p, &adv(db, &s2.b)),
    ];
    let j = [
        commutator_shells(p, &s1.u, db),
        shells(p, &adv(du, &s2.b)),
        shells(p, &adv(&s1.b, du)),
        shells(p, &adv(db, &s2.u)),
    ];
    (k, j)
}

/// Per-shell, per-sample tables of `K_1..K_4` integrands and `J_1..J_4`.
#[derive(Clone, Debug)]
pub struct TermTables {
    pub k: [ShellTable; 4],
    pub j: [ShellTable; 4],
}

impl TermTables {
    pub fn new(pair: &PairTrajectory, partition: &DyadicPartition) -> Self {
        let rows: Vec<_> = (0..pair.len()).into_par_iter().map(|i| instant_terms(partition, pair, i)).collect();
        let times = pair.times().to_vec();
        let j0 = partition.j_min();
        let table = |pick: &dyn Fn(&([Vec<f64>; 4], [Vec<f64>; 4])) -> Vec<f64>| {
            let per: Vec<Vec<f64>> = rows.iter().map(pick).collect();
            ShellTable::from_samples(times.clone(), j0, 2.0, &per)
        };
        Self {
            k: std::array::from_fn(|n| table(&|r| r.0[n].clone())),
            j: std::array::from_fn(|n| table(&|r| r.1[n].clone())),
        }
    }

    /// `K_n` on `[t_0, t_i]`.
    pub fn k_value(&self, n: usize, i: usize) -> f64 {
        self.k[n].mixed_norm(i, 1.0, -1.0, f64::INFINITY)
    }

    /// `J_n(t_i)`.
    pub fn j_value(&self, n: usize, i: usize) -> f64 {
        self.j[n].instant_norm(i, 0.0, f64::INFINITY)
    }
}

/// Running `X, Y, V` with the `K` and `J` terms at every sample.
pub fn stability_norms(pair: &PairTrajectory, partition: &DyadicPartition) -> Result<Vec<StabilityRecord>> {
    let tables = PairTables::new(pair, partition)?;
    let terms = TermTables::new(pair, partition);
    Ok(records(pair, &tables, &terms))
}

pub(crate) fn records(pair: &PairTrajectory, tables: &PairTables, terms: &TermTables) -> Vec<StabilityRecord> {
    (0..pair.len())
        .map(|i| StabilityRecord {
            t: pair.times()[i],
            x: tables.x(i),
            y: tables.y(i),
            v: tables.v(i),
            k: std::array::from_fn(|n| terms.k_value(n, i)),
            j: std::array::from_fn(|n| terms.j_value(n, i)),
        })
        .collect()
}

/// Right-hand sides of the term bounds at sample `i`.
struct Bounds {
    k: [f64; 4],
    j: [f64; 4],
}

fn bounds(pair: &PairTrajectory, t: &PairTables, i: usize) -> Bounds {
    let inf = f64::INFINITY;
    let du_neg = t.du.mixed_norm(i, inf, -1.0, inf);
    let lu1 = t.u1.time_outer_norm(i, 1.0, 2.0, 1.0);
    let lu2 = t.u2.time_outer_norm(i, 1.0, 2.0, 1.0);
    let db0: Vec<f64> = (0..pair.len()).map(|m| t.db.instant_norm(m, 0.0, inf)).collect();
    let weighted = |b: &ShellTable| -> f64 {
        let v: Vec<f64> = (0..pair.len()).map(|m| b.instant_norm(m, 1.0, 1.0) * db0[m]).collect();
        trapezoid(pair.times(), &v, i)
    };
    let b_pair = t.b1.instant_norm(i, 1.0, 1.0).max(t.b2.instant_norm(i, 1.0, 1.0));
    let du1 = t.du.instant_norm(i, 1.0, 1.0);
    Bounds {
        k: [lu1 * du_neg, lu2 * du_neg, weighted(&t.b1), weighted(&t.b2)],
        j: [
            t.u1.instant_norm(i, 2.0, 1.0) * db0[i],
            du1 * b_pair,
            du1 * b_pair,
            t.u2.instant_norm(i, 2.0, 1.0) * db0[i],
        ],
    }
}

/// Paraproduct pieces of the transport term `x.grad y`, per shell `j`:
/// `[Delta_j, S_{k-1}x.grad] Delta_k y`, `Delta_j(Delta_k x.grad S_{k-1} y)`,
/// `Delta_k x.grad Delta_j S_{k+1} y` and `Delta_j(Delta_k x.grad Delta~_k y)`,
/// each summed over its `k` range.
fn transport_split(p: &DyadicPartition, x: &VectorField2D, y: &VectorField2D) -> [Vec<f64>; 4] {
    let js: Vec<i32> = p.shells().collect();
    let at = |j: i32| (j - p.j_min()) as usize;
    let mut out: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; js.len()]);
    for &k in &js {
        let sx = low(p, x, k - 1);
        let dky = block(p, y, k);
        let prod = adv(&sx, &dky);
        let dkx = block(p, x, k);
        let r = shells(p, &adv(&dkx, &low(p, y, k - 1)));
        let w = shells(p, &adv(&dkx, &wide(p, y, k)));
        let sy = low(p, y, k + 1);
        for &j in &js {
            if (j - k).abs() <= 4 {
                let mut c = block(p, &prod, j);
                if (j - k).abs() <= 1 {
                    c = c.axpy(-1.0, &adv(&sx, &block(p, &dky, j)));
                }
                out[0][at(j)] += c.l2_norm_spectral();
                out[1][at(j)] += r[at(j)];
            }
            if k >= j - 3 {
                let q = block(p, &sy, j);
                if !q.is_zero() {
                    out[2][at(j)] += adv(&dkx, &q).l2_norm_spectral();
                }
                out[3][at(j)] += w[at(j)];
            }
        }
    }
    out
}

/// Paraproduct pieces of the stretching-type term `a.grad b`, per shell `j`:
/// `Delta_j(Delta_k a.grad S_{k-1} b)`, `Delta_j(S_{k-1} a.grad Delta_k b)` and
/// `Delta_j(Delta_k a.grad Delta~_k b)`.
fn product_split(p: &DyadicPartition, a: &VectorField2D, b: &VectorField2D) -> [Vec<f64>; 3] {
    let js: Vec<i32> = p.shells().collect();
    let at = |j: i32| (j - p.j_min()) as usize;
    let mut out: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; js.len()]);
    for &k in &js {
        let dka = block(p, a, k);
        let hl = shells(p, &adv(&dka, &low(p, b, k - 1)));
        let lh = shells(p, &adv(&low(p, a, k - 1), &block(p, b, k)));
        let rem = shells(p, &adv(&dka, &wide(p, b, k)));
        for &j in &js {
            if (j - k).abs() <= 4 {
                out[0][at(j)] += hl[at(j)];
                out[1][at(j)] += lh[at(j)];
            }
            if k >= j - 3 {
                out[2][at(j)] += rem[at(j)];
            }
        }
    }
    out
}

pub const K_NAMES: [&str; 4] = ["K1", "K2", "K3", "K4"];
pub const J_NAMES: [&str; 4] = ["J1", "J2", "J3", "J4"];

/// Reports for `K_1..K_4`, `J_1..J_4` at the sample nearest below `t`, followed by
/// the sub-splits `K11..K14`, `K21..K23`, `J11..J14`, `J41..J43`. Sub-split time
/// integrals use every `audit_stride`-th sample of `[t_0, t]` plus `t` itself.
pub fn term_audit(
    pair: &PairTrajectory,
    t: f64,
    partition: &DyadicPartition,
    audit_stride: usize,
) -> Result<Vec<EstimateReport>> {
    let tables = PairTables::new(pair, partition)?;
    let terms = TermTables::new(pair, partition);
    Ok(term_audit_with(pair, &tables, &terms, t, partition, audit_stride))
}

pub(crate) fn term_audit_with(
    pair: &PairTrajectory,
    tables: &PairTables,
    terms: &TermTables,
    t: f64,
    partition: &DyadicPartition,
    audit_stride: usize,
) -> Vec<EstimateReport> {
    let i = pair.index_at(t);
    let b = bounds(pair, tables, i);
    let g = partition.grid();
    let tag = |r: EstimateReport, samples: usize| {
        r.with_meta("t", pair.times()[i])
            .with_meta("n", g.n() as u64)
            .with_meta("length", g.length())
            .with_meta("j_min", partition.j_min())
            .with_meta("j_max", partition.j_max())
            .with_meta("samples", samples as u64)
    };
    let mut out = Vec::with_capacity(30);
    for n in 0..4 {
        out.push(tag(EstimateReport::new(K_NAMES[n], terms.k_value(n, i), b.k[n]), i + 1));
    }
    for n in 0..4 {
        out.push(tag(EstimateReport::new(J_NAMES[n], terms.j_value(n, i), b.j[n]), 1));
    }

    let stride = audit_stride.max(1);
    let mut idx: Vec<usize> = (0..=i).step_by(stride).collect();
    if idx.last() != Some(&i) {
        idx.push(i);
    }
    let sub: Vec<([Vec<f64>; 4], [Vec<f64>; 3])> = idx
        .par_iter()
        .map(|&m| {
            let s1 = &pair.run1.snapshots()[m];
            let s2 = &pair.run2.snapshots()[m];
            (transport_split(partition, &s1.u, &pair.delta_u[m]), product_split(partition, &pair.delta_u[m], &s2.u))
        })
        .collect();
    let times: Vec<f64> = idx.iter().map(|&m| pair.times()[m]).collect();
    let last = idx.len() - 1;
    let j0 = partition.j_min();
    let k_of = |rows: Vec<Vec<f64>>| {
        ShellTable::from_samples(times.clone(), j0, 2.0, &rows).mixed_norm(last, 1.0, -1.0, f64::INFINITY)
    };
    for n in 0..4 {
        let v = k_of(sub.iter().map(|s| s.0[n].clone()).collect());
        out.push(tag(EstimateReport::new(format!("K1{}", n + 1), v, b.k[0]), idx.len()));
    }
    for n in 0..3 {
        let v = k_of(sub.iter().map(|s| s.1[n].clone()).collect());
        out.push(tag(EstimateReport::new(format!("K2{}", n + 1), v, b.k[1]), idx.len()));
    }

    let s1 = &pair.run1.snapshots()[i];
    let s2 = &pair.run2.snapshots()[i];
    let j1 = transport_split(partition, &s1.u, &pair.delta_b[i]);
    let j4 = product_split(partition, &pair.delta_b[i], &s2.u);
    for (n, v) in j1.iter().enumerate() {
        let val = weighted_lq(v, j0, 0.0, f64::INFINITY);
        out.push(tag(EstimateReport::new(format!("J1{}", n + 1), val, b.j[0]), 1));
    }
    for (n, v) in j4.iter().enumerate() {
        let val = weighted_lq(v, j0, 0.0, f64::INFINITY);
        out.push(tag(EstimateReport::new(format!("J4{}", n + 1), val, b.j[3]), 1));
    }
    out
}
