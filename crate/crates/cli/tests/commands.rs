//! End-to-end runs of the binary: exit codes, manifests and output files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use serde_json::Value;
use sha2::{Digest, Sha256};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_besov-mhd"));
    c.env_remove("PMHD_WORKERS");
    c
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(command: &str, config: &Path, out: &Path) -> i32 {
    let status = bin()
        .args([command, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    status.code().expect("exited normally")
}

fn manifest(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

fn file_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "manifest.json")
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect()
}

fn without_timestamps(mut m: Value) -> Value {
    m.as_object_mut().unwrap().remove("timestamps");
    m
}

const SMALL_PARTITION: &str = "schema_version = 1\n[partition]\ngrids = [8, 32]\nsupport_fields = 5\n";

#[test]
fn default_partition_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "schema_version = 1\n");
    let out = dir.path().join("out");
    assert_eq!(run("verify-partition", &cfg, &out), 0);
    let m = manifest(&out);
    assert_eq!(m["status"], "completed");
    assert_eq!(m["exit_code"], 0);
    assert!(m["summary"]["max_unity_residual"].as_f64().unwrap() <= 1e-12);
    let bytes = std::fs::read(&cfg).unwrap();
    assert_eq!(m["config_sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let grids: Vec<u64> = report["grids"].as_array().unwrap().iter().map(|g| g["n"].as_u64().unwrap()).collect();
    assert_eq!(grids, vec![8, 64, 128]);
    assert_eq!(m["outputs"], serde_json::json!(["profiles.csv", "report.json"]));
}

#[test]
fn minimal_grid_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "schema_version = 1\n[partition]\ngrids = [8]\n");
    assert_eq!(run("verify-partition", &cfg, &dir.path().join("out")), 0);
}

#[test]
fn corrupted_phi_table_is_a_breach() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SMALL_PARTITION}[fault]\ncorrupt_phi = {{ j = 1, flat = 2, value = 0.5 }}\n");
    let cfg = write_config(dir.path(), "c.toml", &text);
    let out = dir.path().join("out");
    assert_eq!(run("verify-partition", &cfg, &out), 1);
    assert_eq!(manifest(&out)["status"], "invariant-breach");
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert_eq!(run("verify-partition", &dir.path().join("missing.toml"), &out), 64);
    let bad_version = write_config(dir.path(), "v.toml", "schema_version = 7\n");
    assert_eq!(run("verify-partition", &bad_version, &out), 64);
    let unknown = write_config(dir.path(), "u.toml", "schema_version = 1\n[partition]\ngridz = [8]\n");
    assert_eq!(run("verify-partition", &unknown, &out), 64);
    let no_section = write_config(dir.path(), "s.toml", "schema_version = 1\n");
    assert_eq!(run("simulate", &no_section, &out), 64);
    let status = bin().args(["verify-partition", "--config"]).status().unwrap();
    assert_eq!(status.code(), Some(64));
    let status = bin().arg("bogus").status().unwrap();
    assert_eq!(status.code(), Some(64));
    let status = bin().arg("--help").output().unwrap();
    assert_eq!(status.status.code(), Some(0));
    let status = bin()
        .env("PMHD_WORKERS", "zero")
        .args(["verify-partition", "--config", no_section.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(64));
}

#[test]
fn empty_seed_list_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "schema_version = 1\n[inequalities]\nseeds = []\n");
    assert_eq!(run("inequalities", &cfg, &dir.path().join("out")), 64);
}

#[test]
fn seeded_sweep_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let text = "schema_version = 1\n[inequalities]\nn = 32\nseeds = [3, 4, 5]\nmax_spread = 1.0\n";
    let cfg = write_config(dir.path(), "c.toml", text);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run("inequalities", &cfg, &a), 0);
    let status = bin()
        .env("PMHD_WORKERS", "1")
        .args(["inequalities", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert_eq!(std::fs::read(a.join("bernstein.csv")).unwrap(), std::fs::read(b.join("bernstein.csv")).unwrap());
    assert_eq!(
        std::fs::read(a.join("log_interpolation.csv")).unwrap(),
        std::fs::read(b.join("log_interpolation.csv")).unwrap()
    );
    assert_eq!(manifest(&b)["workers"], 1);
    assert_eq!(manifest(&a)["seeds"], serde_json::json!([3, 4, 5]));
}

#[test]
fn fifty_seed_bernstein_sweep_within_a_minute() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "schema_version = 1\n[inequalities]\nlog_interpolation = false\n");
    let out = dir.path().join("out");
    let start = Instant::now();
    assert_eq!(run("inequalities", &cfg, &out), 0);
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "sweep took {elapsed:.1} s");
    let csv = std::fs::read_to_string(out.join("bernstein.csv")).unwrap();
    // 50 seeds x 9 (alpha, p, q) combinations x shells 2..=4 at n = 64.
    assert_eq!(csv.lines().count(), 1 + 50 * 9 * 3);
    let m = manifest(&out);
    assert!(m["summary"]["max_spread"].as_f64().unwrap() <= 0.25);
    assert!(m["summary"]["min_lower"].as_f64().unwrap() > 0.0);
}

#[test]
fn rerun_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL_PARTITION);
    let out = dir.path().join("out");
    assert_eq!(run("verify-partition", &cfg, &out), 0);
    let (files, m) = (file_bytes(&out), manifest(&out));
    assert_eq!(run("verify-partition", &cfg, &out), 0);
    assert_eq!(file_bytes(&out), files);
    assert_eq!(without_timestamps(manifest(&out)), without_timestamps(m));
}

const SIMULATE_TG: &str = r#"
schema_version = 1
[simulate]
n = 32
nu = 0.1
t_end = 0.1
snapshot_stride = 50
time_step = { mode = "fixed", dt = 1e-3 }
initial = { kind = "taylor-green" }
"#;

#[test]
fn taylor_green_run_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SIMULATE_TG);
    let out = dir.path().join("out");
    assert_eq!(run("simulate", &cfg, &out), 0);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(report["taylor_green_decay_error"].as_f64().unwrap() <= 1e-8);
    let (traj, states) = besov_mhd::mhd::read_trajectory(&out).unwrap();
    assert_eq!(traj.times.len(), 3);
    let (u0, uf) = (&states.snapshots()[0].u, &states.snapshots()[2].u);
    let exact = u0.scale((-2.0f64 * 0.1 * 0.1).exp());
    assert!(uf.relative_difference(&exact) <= 1e-8);
    let m = manifest(&out);
    assert_eq!(m["trajectory"]["status"], "completed");
    assert!(m["outputs"].as_array().unwrap().iter().any(|o| o == "monitors.csv"));
}

#[test]
fn resume_from_snapshot_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let full = r#"
schema_version = 1
[simulate]
n = 32
nu = 0.05
t_end = 0.2
snapshot_stride = 20
time_step = { mode = "fixed", dt = 5e-3 }
initial = { kind = "random-band", seed = 5, j_lo = 0, j_hi = 2, u_norm = 4.0, b_norm = 4.0 }
"#;
    let cfg = write_config(dir.path(), "full.toml", full);
    let a = dir.path().join("a");
    assert_eq!(run("simulate", &cfg, &a), 0);
    // snapshot_00001 sits at step 20, t = 0.1.
    let resume = r#"
schema_version = 1
[simulate]
n = 32
nu = 0.05
t_end = 0.2
snapshot_stride = 20
time_step = { mode = "fixed", dt = 5e-3 }
initial = { kind = "file", path = "a/snapshot_00001.pmhd", t0 = 0.1 }
"#;
    let cfg = write_config(dir.path(), "resume.toml", resume);
    let b = dir.path().join("b");
    assert_eq!(run("simulate", &cfg, &b), 0);
    assert_eq!(std::fs::read(a.join("snapshot_00002.pmhd")).unwrap(), std::fs::read(b.join("snapshot_00001.pmhd")).unwrap());
}

#[test]
fn guard_trip_exits_2_with_partial_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SIMULATE_TG}guard_ceiling = 1e-3\n");
    let cfg = write_config(dir.path(), "c.toml", &text);
    let out = dir.path().join("out");
    assert_eq!(run("simulate", &cfg, &out), 2);
    let m = manifest(&out);
    assert_eq!(m["status"], "guard-tripped");
    assert_eq!(m["exit_code"], 2);
    assert_eq!(m["trajectory"]["status"], "guard-tripped");
    let snaps = m["trajectory"]["snapshots"].as_array().unwrap();
    assert_eq!(snaps.len(), 2);
    assert!(out.join(snaps[1].as_str().unwrap()).exists());
    assert!(m["timestamps"]["finished"].is_string());
}

fn uniqueness_config(epsilons: &str, extra: &str) -> String {
    format!(
        r#"
schema_version = 1
{extra}
[uniqueness]
shell = 1
perturbation_seed = 7
epsilons = {epsilons}
audit_stride = 4
[uniqueness.solver]
n = 32
nu = 0.05
t_end = 0.1
snapshot_stride = 5
time_step = {{ mode = "fixed", dt = 5e-3 }}
initial = {{ kind = "random-band", seed = 3, j_lo = 0, j_hi = 1, u_norm = 6.0, b_norm = 6.0 }}
"#
    )
}

#[test]
fn zero_epsilon_gives_zero_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &uniqueness_config("[0.0]", ""));
    let out = dir.path().join("out");
    assert_eq!(run("uniqueness", &cfg, &out), 0);
    let csv = std::fs::read_to_string(out.join("stability_00.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("t,X,Y,V,envelope"));
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols[1], 0.0);
        assert_eq!(cols[2], 0.0);
        assert_eq!(cols[4], 0.0);
    }
}

#[test]
fn three_epsilon_study_records_slope() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &uniqueness_config("[1e-2, 1e-3, 1e-4]", ""));
    let out = dir.path().join("out");
    assert_eq!(run("uniqueness", &cfg, &out), 0);
    let m = manifest(&out);
    let slope = m["summary"]["slope"].as_f64().unwrap();
    assert!((slope - 1.0).abs() <= 0.2, "slope {slope}");
    assert_eq!(m["summary"]["envelope_holds"], true);
    assert_eq!(m["seeds"], serde_json::json!([7]));
    for f in ["stability_00.csv", "stability_01.csv", "stability_02.csv", "closure.csv", "term_audit.csv", "study.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn injected_envelope_violation_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let text = uniqueness_config("[1e-2]", "[fault]\nenvelope_scale = 0.5\n");
    let cfg = write_config(dir.path(), "c.toml", &text);
    let out = dir.path().join("out");
    assert_eq!(run("uniqueness", &cfg, &out), 1);
    let m = manifest(&out);
    assert_eq!(m["status"], "invariant-breach");
    assert_eq!(m["summary"]["envelope_holds"], false);
}

#[test]
fn bad_epsilon_lists_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    for eps in ["[]", "[1e-3, 1e-2]", "[-1.0]"] {
        let cfg = write_config(dir.path(), "c.toml", &uniqueness_config(eps, ""));
        assert_eq!(run("uniqueness", &cfg, &dir.path().join("out")), 64, "{eps}");
    }
}
