use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn relqkd(args: &[&str], dir: &Path, workers: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relqkd"))
        .args(args)
        .current_dir(dir)
        .env("RELQKD_WORKERS", workers)
        .output()
        .expect("binary runs")
}

const CONFIG: &str = r#"
[grid]
T = { from = -0.1, to = 1.0, steps = 5 }
k_so = [-5, -10]
eta = [0.8, 1.0]
V_A = [2, 20]

[output]
dir = "out"
prefix = "run"
"#;

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("sweep.toml"), CONFIG).unwrap();
    dir
}

#[test]
fn sweep_writes_all_outputs() {
    let dir = setup();
    let out = relqkd(&["sweep", "sweep.toml"], dir.path(), "2");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let base = dir.path().join("out");
    let csv = fs::read_to_string(base.join("run.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("T,k_so,a,tau_R,kappa,G,V,eta,V_A"));
    assert_eq!(lines.count(), 5 * 2 * 2 * 2);
    assert!(csv.contains(",horizon"));
    assert!(base.join("run_surface.dat").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(base.join("run_manifest.json")).unwrap()).unwrap();
    for key in ["T", "k_so", "eta", "V_A"] {
        assert!(manifest["config"]["grid"].get(key).is_some(), "{key} missing");
    }
    assert_eq!(manifest["points"], 40);
    assert_eq!(manifest["rows_horizon"], 8);
}

#[test]
fn sweep_is_byte_identical_across_worker_counts() {
    let a = setup();
    let b = setup();
    assert!(relqkd(&["sweep", "sweep.toml"], a.path(), "1").status.success());
    assert!(relqkd(&["sweep", "sweep.toml"], b.path(), "5").status.success());
    for f in ["run.csv", "run_surface.dat"] {
        let x = fs::read(a.path().join("out").join(f)).unwrap();
        let y = fs::read(b.path().join("out").join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
}

#[test]
fn overrides_apply_to_sweep() {
    let dir = setup();
    let out = relqkd(
        &["sweep", "sweep.toml", "output.prefix=alt", "k_so=-3"],
        dir.path(),
        "1",
    );
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("out/alt.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5 * 2 * 2);
}

#[test]
fn point_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = relqkd(&["point", "k_so=-10", "T=0.05", "eta=0.9", "V_A=10"], dir.path(), "1");
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let g: f64 = row[5].parse().unwrap();
    let kappa = 2.0 * std::f64::consts::PI * 10.0 * 0.05;
    assert!((g - 1.0 / (1.0 - (-kappa).exp())).abs() < 1e-12);
    assert_eq!(row.last(), Some(&"ok"));
}

#[test]
fn exit_codes() {
    let dir = setup();
    let code = |args: &[&str], workers: &str| relqkd(args, dir.path(), workers).status.code();
    assert_eq!(code(&["validate", "sweep.toml"], "1"), Some(0));
    assert_eq!(code(&["validate", "sweep.toml", "eta=2"], "1"), Some(2));
    assert_eq!(code(&["validate", "sweep.toml", "grid.nope=1"], "1"), Some(2));
    assert_eq!(code(&["validate", "missing.toml"], "1"), Some(4));
    assert_eq!(code(&["point", "k_so=-1", "T=0.5"], "zero"), Some(2));
    fs::write(dir.path().join("out"), "a file, not a directory").unwrap();
    assert_eq!(code(&["sweep", "sweep.toml"], "1"), Some(4));
}

#[test]
fn validate_reports_grid() {
    let dir = setup();
    let out = relqkd(&["validate", "sweep.toml"], dir.path(), "1");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("points: 40"), "{text}");
}

#[test]
fn selftest_reports_every_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let out = relqkd(&["selftest"], dir.path(), "2");
    let text = String::from_utf8(out.stdout).unwrap();
    let verdicts: Vec<&str> = text.lines().filter(|l| l.starts_with("criterion ")).collect();
    assert_eq!(verdicts.len(), 9, "{text}");
    for (i, line) in verdicts.iter().enumerate() {
        assert!(line.starts_with(&format!("criterion {} ", i + 1)));
        assert!(line.ends_with(": PASS") || line.ends_with(": FAIL"), "{line}");
    }
    let all_pass = verdicts.iter().all(|l| l.ends_with("PASS"));
    assert_eq!(out.status.code(), Some(if all_pass { 0 } else { 1 }));
}
