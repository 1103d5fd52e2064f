use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_specular"))
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("specular-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

#[test]
fn lists_every_suite() {
    let out = run(&["list-suites"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["grazing_scan", "jacobian_fd", "holder_trajectory", "ode_suite", "averaging_suite", "integrability_suite", "collision_suite", "duhamel_toy"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn passing_suite_writes_report_and_csv() {
    let cfg = configs().join("grazing.toml");
    let (json, csv) = (scratch("grazing.json"), scratch("grazing.csv"));
    let out = run(&["verify", "grazing_scan", "--config", cfg.to_str().unwrap(), "--out", json.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(&json).unwrap();
    assert!(report.contains("\"schema\": \"specular-report/1\""));
    assert!(report.contains("\"verdict\": \"pass\""));
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert!(rows.starts_with("check,inputs_digest,lhs,rhs,ratio,pass,mandatory,applicable,note"));
}

#[test]
fn same_seed_gives_identical_reports() {
    let cfg = configs().join("quick.toml");
    let paths = [scratch("ode_a.json"), scratch("ode_b.json")];
    for p in &paths {
        let out = run(&["--jobs", "1", "verify", "ode_suite", "--config", cfg.to_str().unwrap(), "--seed", "11", "--out", p.to_str().unwrap()]);
        assert!(out.status.code().is_some());
    }
    let a = std::fs::read(&paths[0]).unwrap();
    let b = std::fs::read(&paths[1]).unwrap();
    assert_eq!(a, b);
    assert!(String::from_utf8(a).unwrap().contains("\"seed\": 11"));
}

#[test]
fn bound_violation_exits_with_one() {
    let cfg = scratch("strict.toml");
    std::fs::write(&cfg, "[suite.jacobian_fd]\nsamples = 5\ntolerance = 1e-30\n").unwrap();
    let out = run(&["verify", "jacobian_fd", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
    // the report still goes to stdout
    assert!(String::from_utf8(out.stdout).unwrap().contains("\"verdict\": \"fail\""));
}

#[test]
fn config_errors_exit_with_two() {
    let bad = scratch("bad.toml");
    std::fs::write(&bad, "[kernel]\nunknown_key = 1\n").unwrap();
    assert_eq!(run(&["verify", "ode_suite", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    let missing = scratch("does-not-exist.toml");
    assert_eq!(run(&["verify", "ode_suite", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
    let ok = configs().join("quick.toml");
    assert_eq!(run(&["verify", "no_such_suite", "--config", ok.to_str().unwrap()]).status.code(), Some(2));
    // grazing_scan needs its own obstacle
    assert_eq!(run(&["verify", "grazing_scan", "--config", ok.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["verify"]).status.code(), Some(2));
}
