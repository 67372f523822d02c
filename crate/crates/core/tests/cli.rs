//! End-to-end tests of the `kgz` binary.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

fn kgz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgz"))
        .args(args)
        .env_remove("KGZ_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect()
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    files(dir).into_iter().filter(|(k, _)| k.ends_with(".csv")).collect()
}

#[test]
fn help_lists_every_experiment() {
    let out = kgz(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in [
        "accuracy-time",
        "accuracy-space",
        "limit-rates",
        "energy",
        "super-resolution",
        "solve",
        "coeffs-dump",
    ] {
        assert!(text.contains(sub), "missing {sub} in:\n{text}");
    }
    let sub = kgz(&["solve", "--help"]);
    let text = String::from_utf8_lossy(&sub.stdout);
    for flag in ["--gamma-rule", "--N", "--T", "--ref-tau", "--emit-config", "--probe-x", "--dealias", "--threads"] {
        assert!(text.contains(flag), "missing {flag}");
    }
}

#[test]
fn invalid_input_exits_with_usage_code() {
    let out = kgz(&["solve", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let out = kgz(&["solve", "--tau", "0.3", "--T", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let out = kgz(&["accuracy-time", "--tau", "1e-3", "--ref-tau", "1e-4", "--m0", "1", "--T", "0.01"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("reference too coarse"));
}

#[test]
fn accuracy_time_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = kgz(&[
        "accuracy-time",
        "--problem",
        "ex2",
        "--m0",
        "1,3",
        "--tau",
        "4e-3,2e-3,1e-3",
        "--T",
        "0.5",
        "--ref-tau",
        "1e-5",
        "--out",
        d,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("accuracy-time.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("epsilon,gamma,tau,N,T,err_psi_linf"));
    assert_eq!(lines.count(), 6);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("accuracy-time.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["rows"].as_array().unwrap().len(), 6);
    assert_eq!(meta["config"]["experiment"], "accuracy-time");
}

#[test]
fn emitted_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let out = kgz(&[
        "solve",
        "--problem",
        "ex2",
        "--m0",
        "2",
        "--N",
        "32",
        "--tau",
        "0.01",
        "--T",
        "0.1",
        "--snapshots",
        "0,0.05",
        "--probe-x",
        "1.0",
        "--emit-config",
        cfg.to_str().unwrap(),
        "--out",
        a.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = kgz(&["solve", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (fa, fb) = (files(&a), files(&b));
    assert_eq!(fa.len(), 4, "{:?}", fa.keys());
    assert_eq!(fa, fb);

    // Flags override file values.
    let c = dir.path().join("c");
    let out = kgz(&["solve", "--config", cfg.to_str().unwrap(), "--T", "0.05", "--out", c.to_str().unwrap()]);
    assert!(out.status.success());
    assert_ne!(files(&c), fa);
}

#[test]
fn output_directory_defaults_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_kgz"))
        .args(["coeffs-dump", "--m0", "1", "--N", "8", "--tau", "0.1"])
        .env("KGZ_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let names: Vec<String> = files(dir.path()).into_keys().collect();
    assert_eq!(names, vec!["coeffs-dump_m0-1_N-8_tau-0.1.csv".to_string()]);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, sub: &str| {
        let d = dir.path().join(format!("{sub}-{threads}"));
        let out = kgz(&[
            sub,
            "--problem",
            "ex2",
            "--m0",
            "1,2,3",
            "--N",
            "64",
            "--tau",
            "0.02,0.01",
            "--T",
            "0.1",
            "--ref-tau",
            "1e-4",
            "--threads",
            threads,
            "--out",
            d.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        csv_files(&d)
    };
    for sub in ["accuracy-time", "energy", "super-resolution"] {
        let one = run("1", sub);
        assert!(!one.is_empty());
        assert_eq!(one, run("3", sub), "{sub}");
        assert_eq!(one, run("3", sub), "{sub}");
    }
}
