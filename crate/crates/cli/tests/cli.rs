use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thermistor"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(scenario: &str, config: &Path, out: &Path, extra: &[&str]) -> i32 {
    let status = bin()
        .arg(scenario)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs");
    status.status.code().expect("exit code")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn zero_horizon_writes_one_row_per_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[problem]\nhorizon = 0.0\n[ensemble]\nfamily = \"bumps\"\ncount = 3\nmin = 1.0\nmax = 2.0\n",
    );
    let out = tmp.path().join("out");
    assert_eq!(run("simulate", &cfg, &out, &[]), 0);
    let csv = read(&out, "trajectory.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("run_id,step,time,linf,l1,l2,lp_max,w1m_seminorm,"));
    assert!(lines[0].ends_with("nonlocal_coeff,newton_iters,picard_iters,r,m"));
    for (k, line) in lines[1..].iter().enumerate() {
        assert!(line.starts_with(&format!("{k},0,0,")));
        assert!(line.split(',').all(|cell| !cell.is_empty()));
    }
    assert_eq!(read(&out, "verdicts.csv").trim(), "check,parameters,lhs,rhs,margin,pass");
}

#[test]
fn shipped_verify_config_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    assert_eq!(run("verify", &configs().join("verify.toml"), &out, &[]), 0);
    let verdicts = read(&out, "verdicts.csv");
    let checks: Vec<&str> = verdicts.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    for name in ["tartar", "legendre.identity", "ghidaglia", "gronwall"] {
        assert!(checks.contains(&name), "{name} missing");
    }
    assert!(verdicts.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn reruns_are_byte_identical_and_independent_of_jobs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "records = 10\n[problem]\nm = 4.0\nhorizon = 0.5\nreg_r = 0.01\n[grid]\nnx = 32\n\
         [stepper]\ndt = 0.01\n[attractor]\nmembers = 4\ncutoff = 0.4\ntolerance = 10.0\n",
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let c = tmp.path().join("c");
    assert_eq!(run("attractor", &cfg, &a, &["--jobs", "1"]), 0);
    assert_eq!(run("attractor", &cfg, &b, &["--jobs", "1"]), 0);
    assert_eq!(run("attractor", &cfg, &c, &["--jobs", "4"]), 0);
    for name in ["trajectory.csv", "constants.csv", "verdicts.csv"] {
        assert_eq!(read(&a, name), read(&b, name), "{name}");
        assert_eq!(read(&a, name), read(&c, name), "{name}");
    }
    assert_eq!(read(&a, "trajectory.csv").lines().count(), 1 + 8 * 11);
}

#[test]
fn seed_flag_changes_ensembles() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[problem]\nhorizon = 0.0\n[ensemble]\nfamily = \"constants\"\ncount = 2\n",
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(run("simulate", &cfg, &a, &["--seed", "1"]), 0);
    assert_eq!(run("simulate", &cfg, &b, &["--seed", "2"]), 0);
    assert_ne!(read(&a, "trajectory.csv"), read(&b, "trajectory.csv"));
    assert!(read(&a, "manifest.toml").contains("seed = 1"));
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let bad = write_config(tmp.path(), "[problem]\nm = 1.5\n");
    assert_eq!(run("simulate", &bad, &out, &[]), 2);
    let unknown = write_config(tmp.path(), "[problem]\nmm = 3.0\n");
    assert_eq!(run("simulate", &unknown, &out, &[]), 2);
    assert_eq!(run("simulate", &tmp.path().join("missing.toml"), &out, &[]), 2);
    let status = bin().arg("teleport").arg("--config").arg(&bad).arg("--out").arg(&out).output().unwrap();
    assert_eq!(status.status.code(), Some(2));
}

#[test]
fn failed_verdict_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    // a tolerance no run can meet
    let cfg = write_config(
        tmp.path(),
        "records = 4\n[problem]\nhorizon = 0.2\n[grid]\nnx = 16\n[attractor]\nmembers = 2\ncutoff = 0.1\ntolerance = 1e-12\n",
    );
    assert_eq!(run("attractor", &cfg, &tmp.path().join("out"), &[]), 1);
}

#[test]
fn solver_failure_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    // one Newton iteration and no step halving cannot converge
    let cfg = write_config(
        tmp.path(),
        "[problem]\nm = 4.0\n[initial]\nfamily = \"sine\"\namplitude = 50.0\n\
         [stepper]\nnewton_max_iters = 1\ndt_halving_max = 0\n",
    );
    assert_eq!(run("simulate", &cfg, &tmp.path().join("out"), &[]), 3);
}
