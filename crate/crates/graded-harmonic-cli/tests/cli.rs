use std::path::Path;
use std::process::{Command, Output};

fn gharm(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gharm"))
        .args(args)
        .current_dir(cwd)
        .env_remove("GHARM_OUT_DIR")
        .output()
        .expect("gharm runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn figure_writes_the_profile_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = gharm(
        &["--out-dir", "run", "figure", "--points", "11", "--r-max", "5"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("run/phi_alpha.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "r,phi_alpha");
    assert_eq!(lines.len(), 12);
    assert!(!text.contains('\r'));
    let last: Vec<f64> = lines[11].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 5.0);
}

#[test]
fn malformed_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "group = \"R1\"\nsede = 3\n").unwrap();
    let out = gharm(&["--config", "bad.toml", "figure"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("sede"));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&gharm(&["transmogrify"], dir.path())), 1);
    assert_eq!(code(&gharm(&["verify", "no_such_check"], dir.path())), 1);
    assert_eq!(code(&gharm(&["--jobs", "0", "figure"], dir.path())), 1);
    assert_eq!(code(&gharm(&["fracpow", "--alpha", "0.5"], dir.path())), 1);
    assert_eq!(code(&gharm(&["--help"], dir.path())), 0);
}

#[test]
fn out_dir_precedence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.toml"), "out_dir = \"from_config\"\n").unwrap();
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_gharm"));
        cmd.current_dir(dir.path()).env_remove("GHARM_OUT_DIR");
        if let Some(e) = env {
            cmd.env("GHARM_OUT_DIR", e);
        }
        cmd.args(["--config", "cfg.toml"]);
        if let Some(f) = flag {
            cmd.args(["--out-dir", f]);
        }
        let out = cmd.args(["figure", "--points", "3"]).output().unwrap();
        assert_eq!(out.status.code(), Some(0));
    };
    run(None, None);
    assert!(dir.path().join("from_config/phi_alpha.csv").exists());
    run(Some("from_env"), None);
    assert!(dir.path().join("from_env/phi_alpha.csv").exists());
    run(Some("from_env2"), Some("from_flag"));
    assert!(dir.path().join("from_flag/phi_alpha.csv").exists());
    assert!(!dir.path().join("from_env2").exists());
}

#[test]
fn verify_reports_pass_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = gharm(&["--out-dir", "v", "verify", "counterexamples"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout
        .lines()
        .any(|l| l.starts_with("counterexamples") && l.contains("PASS")));
    let summary = std::fs::read_to_string(dir.path().join("v/verify_summary.csv")).unwrap();
    assert!(summary.starts_with("check,family,samples,empirical_constant,stability,metrics,criterion,status\n"));
}
