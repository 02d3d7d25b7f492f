use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hvns(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hvns"))
        .args(args)
        .env("HVNS_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn selftest_passes() {
    let out = hvns(&["selftest"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("PASS snapshot_round_trip"));
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn bad_arguments_print_usage() {
    let out = hvns(&["frobnicate"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    let out = hvns(&["simulate", "--bogus"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn simulate_writes_snapshots_and_norms() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "grid.n = 8\nphysics.nu = 1\ninitial.kind = shear\nintegration.t_final = 1\n\
         integration.dt = 0.1\nintegration.stride = 5\n",
    );
    let out_dir = dir.path().join("out");
    let out = hvns(&["simulate", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let snaps: Vec<_> = fs::read_dir(out_dir.join("snapshots")).unwrap().collect();
    assert_eq!(snaps.len(), 3);
    let norms = fs::read_to_string(out_dir.join("norms.csv")).unwrap();
    assert!(norms.starts_with("t,energy,enstrophy"));
    assert_eq!(norms.lines().count(), 12);
    assert!(out_dir.join("config.txt").exists());
}

#[test]
fn verify_names_blowup_guard() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "grid.n = 8\nphysics.nu = 0.01\ninitial.kind = random\ninitial.amplitude = 1e5\n\
         integration.t_final = 1\nintegration.dt = 0.1\nintegration.stride = 1\n",
    );
    let out_dir = dir.path().join("out");
    let out = hvns(&["verify", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL blowup_guard"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("blowup_guard"));
    let report = fs::read_to_string(out_dir.join("report.txt")).unwrap();
    assert!(report.contains("name = blowup_guard\n"));
}

#[test]
fn verify_passes_on_decaying_shear() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "grid.n = 8\nphysics.nu = 1\nphysics.eps = 0.1\ninitial.kind = shear\n\
         integration.t_final = 6\nintegration.dt = 0.05\nintegration.stride = 20\n",
    );
    let out_dir = dir.path().join("out");
    let out = hvns(&["verify", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = fs::read_to_string(out_dir.join("report.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "grid.n = 8\nphysics.viscosity = 1\n");
    let out = hvns(&["simulate", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("physics.viscosity"));
}

#[test]
fn attractor_dist_writes_two_column_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "grid.n = 8\nphysics.nu = 1\ninitial.kind = zero\nforcing.kind = shear\n\
         forcing.amplitude = 0.5\nintegration.dt = 0.05\nexperiment.eps_list = 0.2, 0.1, 0.05\n\
         experiment.t1 = 25\nexperiment.n_samples = 3\nexperiment.gap = 0.5\n",
    );
    let out_dir = dir.path().join("out");
    let out = hvns(&["attractor-dist", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = fs::read_to_string(out_dir.join("semicontinuity.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("eps,dist"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn sweep_and_perturbed_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "grid.n = 8\nphysics.nu = 1\ninitial.kind = shear\nintegration.t_final = 2\n\
         integration.dt = 0.05\nintegration.stride = 1\nexperiment.eps_list = 0.2, 0.1\n\
         forcing.kind = shear\nforcing.amplitude = 0.5\nperturbation.kind = cross_shear\n\
         perturbation.amplitude = 1\nexperiment.t1 = 20\nexperiment.n_samples = 2\n",
    );
    let out_dir = dir.path().join("out");
    let o = out_dir.to_str().unwrap();
    let out = hvns(&["sweep-eps", "--config", &cfg, "--out", o]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(fs::read_to_string(out_dir.join("convergence.csv"))
        .unwrap()
        .starts_with("eps,error\n"));
    let out = hvns(&["perturbed", "--config", &cfg, "--out", o]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = fs::read_to_string(out_dir.join("perturbed.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}
