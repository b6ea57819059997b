use std::path::Path;
use std::process::Command;

fn ratelab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ratelab")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn inadmissible_beta_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"experiment": "temporal_weak", "gamma": 0.25, "beta": 0.9}"#);
    let out = ratelab(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("trace condition"), "{msg}");
    assert!(!dir.path().join("c_out.csv").exists());
}

#[test]
fn beta_near_supremum_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"experiment": "temporal_weak", "gamma": 0.25, "beta": 0.72}"#);
    assert_eq!(ratelab(&["run", &cfg]).status.code(), Some(2));
}

#[test]
fn unknown_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"experiment": "temporal_weak", "stepsize": 0.1}"#);
    assert_eq!(ratelab(&["run", &cfg]).status.code(), Some(2));
}

#[test]
fn missing_config_is_an_io_error() {
    assert_eq!(ratelab(&["run", "/nonexistent/ratelab.json"]).status.code(), Some(1));
}

#[test]
fn lists_every_experiment() {
    let out = ratelab(&["list-experiments"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 11);
    for name in ["trace_identity", "temporal_weak", "chc_weak", "representation"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}

#[test]
fn temporal_weak_run_writes_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"experiment": "temporal_weak", "scheme": "crank_nicolson", "gamma": 0.25, "k_levels": [4, 10]}"#;
    let cfg = write(dir.path(), "tw.json", body);
    let out = ratelab(&["run", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("tw_out.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), ratelab::cli::output::CSV_HEADER);
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| r.starts_with("temporal_weak,wave,crank_nicolson,0.25,")));

    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("tw_out.json")).unwrap()).unwrap();
    let rates = json["rates"].as_array().unwrap();
    let slope = rates[0]["report"]["slope"].as_f64().unwrap();
    assert!((slope - 1.0).abs() <= 0.10, "{slope}");
    assert_eq!(rates[0]["report"]["pass"], serde_json::Value::Bool(true));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let body = |p: &Path| {
        format!(
            r#"{{"experiment": "temporal_strong", "j_ref": 32, "k_levels": [2, 4], "n_paths": 500, "seed": 7, "output": "{}"}}"#,
            p.display()
        )
    };
    let ca = write(dir.path(), "a_cfg.json", &body(&a));
    let cb = write(dir.path(), "b_cfg.json", &body(&b));
    assert!(ratelab(&["run", &ca]).status.success());
    assert!(ratelab(&["run", &cb]).status.success());
    let read = |p: &Path, ext: &str| std::fs::read(p.with_extension(ext)).unwrap();
    assert_eq!(read(&a, "csv"), read(&b, "csv"));
    let ja: serde_json::Value = serde_json::from_slice(&read(&a, "json")).unwrap();
    let jb: serde_json::Value = serde_json::from_slice(&read(&b, "json")).unwrap();
    assert_eq!(ja["rates"], jb["rates"]);
    assert_eq!(ja["checks"], jb["checks"]);
}
