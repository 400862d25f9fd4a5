use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn velfree(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_velfree"));
    cmd.args(args).env_remove("VELFREE_OUT");
    if let Some(p) = env_out {
        cmd.env("VELFREE_OUT", p);
    }
    cmd.output().unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// Copy of a shipped config with `from` replaced by `to`.
fn variant(dir: &Path, name: &str, edits: &[(&str, &str)]) -> PathBuf {
    let mut text = std::fs::read_to_string(configs().join(name)).unwrap();
    for (from, to) in edits {
        assert!(text.contains(from), "{from}");
        text = text.replacen(from, to, 1);
    }
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_three_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(dir.path(), "r2.toml", &[("horizon = 30.0", "horizon = 2.0")]);
    let out = dir.path().join("out");
    let o = velfree(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--plot"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["timeseries.csv", "summary.txt", "gaincheck.txt", "error.svg"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let csv = std::fs::read_to_string(out.join("timeseries.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "t,q1,q2,q3,qd1,qd2,qd3,tau1,tau2,tau3,err1,err2,err3,theta1,theta2,theta3"
    );
    assert_eq!(csv.lines().count(), 2002);
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("status = completed") && summary.contains("E_tau = "));
}

#[test]
fn zero_dt_is_a_config_error_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(dir.path(), "r2.toml", &[("dt = 1e-3", "dt = 0")]);
    let o = velfree(&["run", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("sim.dt") && err.contains("line 16"), "{err}");
    assert!(!dir.path().join("timeseries.csv").exists());
}

#[test]
fn malformed_file_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(dir.path(), "r2.toml", &[("b = 5.0", "b = [")]);
    let o = velfree(&["check", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line "), "{}", stderr(&o));
}

#[test]
fn divergence_exits_two_and_records_time() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = configs().join("unstable.toml");
    let o = velfree(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("diverged at t = "));
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("status = diverged"));
    assert!(summary.contains("divergence_time = "));
}

#[test]
fn output_root_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(dir.path(), "r2.toml", &[("horizon = 30.0", "horizon = 0.1")]);
    let root = dir.path().join("root");
    let o = velfree(&["run", cfg.to_str().unwrap()], Some(&root));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(root.join("r2").join("summary.txt").is_file());
}

#[test]
fn sweep_rows_follow_values_and_ignore_parallelism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(dir.path(), "r2.toml", &[("horizon = 30.0", "horizon = 1.0")]);
    let run = |out: &str, jobs: &str| {
        let out = dir.path().join(out);
        let o = velfree(
            &[
                "sweep",
                cfg.to_str().unwrap(),
                "--param",
                "b",
                "--values",
                "5,50,100,-1",
                "--out",
                out.to_str().unwrap(),
                "--jobs",
                jobs,
            ],
            None,
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stdout(&o).contains("E_tau"));
        std::fs::read_to_string(out.join("sweep.csv")).unwrap()
    };
    let serial = run("a", "1");
    let parallel = run("b", "4");
    assert_eq!(serial, parallel);
    let lines: Vec<&str> = serial.lines().collect();
    assert_eq!(lines[0], "value,E_tau,overshoot,settling,status");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("5e0,") && lines[1].ends_with(",completed"));
    assert!(lines[4].starts_with("-1e0,,,,") && lines[4].contains("invalid"), "{}", lines[4]);
}

#[test]
fn sweep_rejects_unknown_parameter() {
    let o = velfree(
        &["sweep", configs().join("r2.toml").to_str().unwrap(), "--param", "zeta", "--values", "1"],
        None,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("zeta"));
}

#[test]
fn conservative_observer_bound_is_a_warning() {
    let o = velfree(&["check", configs().join("r1.toml").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = text.lines().find(|l| l.starts_with("k_D > (lambda_max(K_D))^2")).unwrap();
    assert!(row.ends_with("VIOLATED"), "{row}");
}

#[test]
fn tracking_gains_satisfy_every_condition() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(dir.path(), "t2.toml", &[("beta = 0.5", "beta = 0.5\nk_delta = 2.4510")]);
    let o = velfree(&["check", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict: all conditions satisfied"), "{}", stdout(&o));
}

#[test]
fn small_filter_gain_violates_integral_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(dir.path(), "r3_load.toml", &[("b = 50.0", "b = 10.0")]);
    let o = velfree(&["check", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = text.lines().find(|l| l.starts_with("min b_i > 2")).unwrap();
    assert!(row.ends_with("VIOLATED"), "{row}");
}

#[test]
fn validate_is_deterministic_and_passes() {
    for model in ["planar2", "phantom3", "point_mass"] {
        let args = ["validate", "--model", model, "--samples", "2000", "--seed", "3"];
        let a = velfree(&args, None);
        let b = velfree(&args, None);
        assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
        assert_eq!(a.stdout, b.stdout);
        assert!(!stdout(&a).contains("FAIL"));
    }
    let planar = stdout(&velfree(&["validate", "--model", "planar2", "--samples", "100"], None));
    assert!(planar.contains("closed-form two-link oracle"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(velfree(&["validate", "--model", "hexapod"], None).status.code(), Some(1));
    assert_eq!(velfree(&["frobnicate"], None).status.code(), Some(1));
    assert_eq!(velfree(&["run", "/no/such/file.toml"], None).status.code(), Some(1));
    assert_eq!(velfree(&["--help"], None).status.code(), Some(0));
}
