use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_tuneprobe");

const UNIT: &str = r#"
seed = 3

[target]
kind = "linear"
height = 5
width = 5

[search]
optimal_budget_per_dim = 20
path_budget_per_dim = 4
n_candidates = 20
subspace_runs = 3
"#;

const BENCH: &str = r#"
seed = 9

[population]
levels = 1
n_networks = 3

[task]
n_classes = 3
samples_per_class = 6
height = 11
width = 11

[search]
optimal_budget_per_dim = 2
path_budget_per_dim = 1
reconstruct_budget_per_dim = 1
optimal_runs = 1
n_candidates = 5
subspace_runs = 3
reconstruction_runs = 2

[study]
n_references = 2
unit_neurons = 1
n_pairs = 40
n_perm = 100
"#;

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Every file below `dir`, relative path and contents.
fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn characterize_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "unit.toml", UNIT);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["characterize", "-c", s(&cfg), "-o", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let snap = snapshot(&a);
    assert!(snap.iter().any(|(p, _)| p.ends_with("report.json")));
    assert_eq!(snap, snapshot(&b));
    let o = run(&["measure", "-i", s(&a)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(a.join("measures.json").exists());
}

#[test]
fn gen_net_is_reproducible_and_creates_out_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("x/y/a"), tmp.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["gen-net", "--seed", "21", "-o", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(snapshot(&a), snapshot(&b));
    assert!(a.join("net-000.weights").exists());
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["input_shape"], serde_json::json!([11, 11]));
}

#[test]
fn malformed_config_exits_1_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "bad.toml", "seed = 1\n[target]\nkind = \"linear\"\nbogus = 2\n");
    let out = tmp.path().join("out");
    let o = run(&["characterize", "-c", s(&cfg), "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["exit_code"], 1);
    assert!(err["error"].is_string());

    let o = run(&["bench", "-c", s(&cfg), "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());

    let o = run(&["characterize", "-c", s(&tmp.path().join("missing.toml")), "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn bench_resume_and_recompute() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "bench.toml", BENCH);
    let out = tmp.path().join("bench");
    let o = run(&["bench", "-c", s(&cfg), "-o", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read(out.join("measures.csv")).unwrap();
    let o = run(&["bench", "-c", s(&cfg), "-o", s(&out), "--resume"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(out.join("measures.csv")).unwrap(), csv);

    let o = run(&["measure", "-i", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r["max_abs_difference"].as_f64().unwrap() <= 1e-9, "{r}");
    assert!(out.join("measures_recomputed.csv").exists());
    let o = run(&["report", "-i", s(&out)]);
    assert!(o.status.success());
    assert!(!o.stdout.is_empty());
}
