use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
name = "small"
seed = 7

[model]
kind = "hubbard"
sites = 2
u = 4.0

[simulation]
dt = 0.05
total_steps = 80

[observables]
series = "density"
targets = ["rho_up_0_1"]

[fit]
window = 40
n_s = 4
n_g = 1
tau = 1

[sweep]
m = [20, 30, 40]
"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quench-dmd")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("cfg.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_trajectory_and_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("sim");
    let o = run(&["--config", &cfg, "--out", path(&out), "simulate"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 82);
    let prov: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("provenance.json")).unwrap()).unwrap();
    assert_eq!(prov["seed"], 7);
    assert_eq!(prov["hamiltonian"]["n_qubits"], 4);
    // the config echo re-runs to the same bytes
    let again = dir.path().join("again");
    let echo = out.join("config.toml");
    assert!(run(&["--config", path(&echo), "--out", path(&again), "simulate"]).status.success());
    assert_eq!(csv, std::fs::read_to_string(again.join("trajectory.csv")).unwrap());
}

#[test]
fn extrapolate_from_a_trajectory_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let sim = dir.path().join("sim");
    assert!(run(&["--config", &cfg, "--out", path(&sim), "simulate"]).status.success());
    let out = dir.path().join("ex");
    let traj = sim.join("trajectory.csv");
    let o = run(&["--config", &cfg, "--out", path(&out), "extrapolate", "--trajectory", path(&traj)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["prediction.csv", "error.csv", "model.json", "envelope.json", "error.gp", "config.toml"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let err = std::fs::read_to_string(out.join("error.csv")).unwrap();
    assert!(err.starts_with("t,error\n"));
    let envelope: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("envelope.json")).unwrap()).unwrap();
    assert!(envelope["pass"].is_boolean());
}

#[test]
fn sweep_and_bound_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("sw");
    let o = run(&["--config", &cfg, "--out", path(&out), "--threads", "2", "sweep-m"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);
    assert!(table.starts_with("m,error_at_T\n20,"));
    let one = dir.path().join("one");
    assert!(run(&["--config", &cfg, "--out", path(&one), "sweep-m", "--m", "30"]).status.success());
    assert_eq!(std::fs::read_to_string(one.join("sweep.csv")).unwrap().lines().count(), 2);
    let b = dir.path().join("b");
    assert!(run(&["--config", &cfg, "--out", path(&b), "bound-report"]).status.success());
    let bound: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(b.join("bound.json")).unwrap()).unwrap();
    assert_eq!(bound[0]["label"], "rho_up_0_1");
}

#[test]
fn validation_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let infeasible = write_config(dir.path(), &SMALL.replace("window = 40", "window = 5"));
    let o = run(&["--config", &infeasible, "--out", path(&out), "extrapolate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("m >="));
    assert_eq!(run(&["--out", path(&out), "simulate"]).status.code(), Some(1));
    assert_eq!(run(&["simulate", "--bogus"]).status.code(), Some(1));
}

#[test]
fn verify_passes_and_mutation_fails() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good");
    let o = run(&["--out", path(&good), "verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(good.join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    let bad = dir.path().join("bad");
    let o = run(&["--out", path(&bad), "verify", "--mutation", "jw-sign"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL jw_fermion_oracle"));
}
