use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rim-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn rim(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rim"));
    cmd.args(args);
    cmd
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("running rim")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn certify_star_forest_and_min_bound_exit_code() {
    let dir = scratch("certify");
    let fixture = dir.join("fixture");
    assert!(run(&mut rim(&["gen", "--source", "star-forest:2,3,0.2,0.8", "--out-dir", path(&fixture)])).status.success());
    let graph = fixture.join("graph.tsv");
    let theta = fixture.join("theta.tsv");
    let cert = dir.join("cert.json");

    let ok = run(&mut rim(&[
        "certify", "--exact", "--k", "2", "--graph", path(&graph), "--theta", path(&theta), "--out", path(&cert),
    ]));
    assert!(ok.status.success());
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&cert).unwrap()).unwrap();
    assert!((json["alpha"].as_f64().unwrap() - 8.0 / 17.0).abs() < 1e-9);

    let low = run(&mut rim(&[
        "certify", "--exact", "--k", "2", "--graph", path(&graph), "--theta", path(&theta), "--out", path(&cert),
        "--min-bound", "0.5",
    ]));
    assert_eq!(low.status.code(), Some(2));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn malformed_theta_fails_without_output() {
    let dir = scratch("malformed");
    let fixture = dir.join("fixture");
    assert!(run(&mut rim(&["gen", "--source", "star-forest:1,2,0.2,0.8", "--out-dir", path(&fixture)])).status.success());
    let bad = dir.join("bad.tsv");
    fs::write(&bad, "0\t0.9\t0.1\n").unwrap();
    let out_dir = dir.join("out");
    let res = run(&mut rim(&[
        "certify", "--exact", "--k", "1", "--graph", path(&fixture.join("graph.tsv")), "--theta", path(&bad),
        "--out-dir", path(&out_dir),
    ]));
    assert!(!res.status.success());
    assert!(!String::from_utf8_lossy(&res.stderr).is_empty());
    assert!(!out_dir.exists());
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn env_vars_override_defaults() {
    let dir = scratch("env");
    let fixture = dir.join("fixture");
    let gen = run(rim(&["gen"])
        .env("RIM_SOURCE", "star-forest:1,2,0.2,0.8")
        .env("RIM_OUT_DIR", path(&fixture)));
    assert!(gen.status.success());
    let out = run(rim(&["greedy", "--graph", path(&fixture.join("graph.tsv"))])
        .env("RIM_K", "2")
        .env("RIM_EXACT", "true"));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["seed_set"].as_array().unwrap().len(), 2);
    assert_eq!(json["evaluator"]["kind"], "exact");
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn spread_reports_exact_value() {
    let dir = scratch("spread");
    let graph = dir.join("g.tsv");
    fs::write(&graph, "0\t1\t0.5\n1\t2\t0.5\n").unwrap();
    let out = run(&mut rim(&["spread", "--exact", "--graph", path(&graph), "--seeds", "0"]));
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((json["spread"].as_f64().unwrap() - 1.75).abs() < 1e-12);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn width_sweep_writes_csv_and_metadata() {
    let dir = scratch("sweep");
    let out = run(&mut rim(&[
        "width-sweep", "--source", "wc-random:60,200", "--num-sims", "500", "--num-cascades", "20", "--widths",
        "0,0.2", "--out-dir", path(&dir),
    ]));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("width_sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("width,alpha,alpha_bar,lower_bound,alpha_std_error,seed_set"));
    assert_eq!(lines.count(), 2);
    let meta: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "width-sweep");
    assert_eq!(meta["config"]["source"], "wc-random:60,200");
    assert!(meta["conventions"]["width_interval"].is_string());
    fs::remove_dir_all(&dir).unwrap();
}
