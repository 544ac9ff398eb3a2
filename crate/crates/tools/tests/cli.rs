use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn psvf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psvf"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .env_remove("PSVF_OUT_DIR")
        .output()
        .expect("binary runs")
}

#[test]
fn pressure_beta_zero_row_is_log_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = psvf(
        dir.path(),
        &["pressure", "--family", "zk", "--k", "3", "--p1", "0.5", "--p2", "0.5", "--beta", "0:2:0.1"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("pressure.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "beta,pressure,radius,residual");
    assert_eq!(lines.len(), 22);
    let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - 2f64.ln()).abs() < 1e-12);
    assert!(lines[21].starts_with("2,"));
}

#[test]
fn k3_graph_is_the_four_arc_graph() {
    let dir = tempfile::tempdir().unwrap();
    let out = psvf(dir.path(), &["graph", "--family", "zk", "--k", "3"]);
    assert!(out.status.success());
    let dot = fs::read_to_string(dir.path().join("graph.dot")).unwrap();
    let mut edges: Vec<&str> = dot.lines().filter(|l| l.contains("->")).map(str::trim).collect();
    edges.sort_unstable();
    assert_eq!(
        edges,
        [
            "I0 -> I0;", "I0 -> I1;", "I1 -> I2;", "I1 -> I3;", "I2 -> I0;", "I2 -> I1;", "I3 -> I2;", "I3 -> I3;",
        ]
    );
    assert_eq!(dot.lines().filter(|l| l.trim().starts_with('I') && !l.contains("->")).count(), 4);
}

#[test]
fn same_seed_gives_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let sim = [
        "simulate", "--family", "zk", "--k", "4", "--policy", "random", "--p1", "0.3", "--p2", "0.6", "--seed", "8",
        "--t-end", "12",
    ];
    let emp = [
        "pressure", "--family", "petal", "--k", "3", "--p", "0.2,0.3,0.5", "--beta", "0:1:0.25", "--samples", "10000",
        "--seed", "3",
    ];
    for args in [&sim[..], &emp[..]] {
        assert!(psvf(a.path(), args).status.success());
        assert!(psvf(b.path(), args).status.success());
    }
    for name in ["trajectory.csv", "events.jsonl", "pressure.csv", "matrix.json"] {
        let x = fs::read(a.path().join(name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn usage_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = psvf(dir.path(), &["simulate", "--family", "zk", "--k", "3", "--policy", "random", "--p1", "0.5", "--p2", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`seed`"));
    let out = psvf(dir.path(), &["pressure", "--family", "petal", "--k", "3", "--p", "0.5,0.6,0", "--beta", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`p`"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"family": "zk", "k": 3, "p1": 0.5, "p2": 0.5, "beta": "1"}"#).unwrap();
    let out = psvf(dir.path(), &["pressure", "--config", cfg.to_str().unwrap(), "--beta", "0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("pressure.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("0,0.693147"));
}

#[test]
fn out_dir_defaults_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_psvf"))
        .args(["graph", "--family", "petal", "--k", "2"])
        .env("PSVF_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("graph.dot").exists());
}

#[test]
fn itinerary_prints_the_prescribed_word() {
    let dir = tempfile::tempdir().unwrap();
    let out = psvf(
        dir.path(),
        &["itinerary", "--family", "zk", "--k", "3", "--policy", "prescribed", "--word", "0 1 3 2 0", "--t-end", "4.5"],
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("0 1 3 2 0\n"));
}

#[test]
fn verify_reports_every_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let out = psvf(dir.path(), &["verify"]);
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), psvf_tools::checks::ALL.len());
    let failed: Vec<&str> = lines.iter().filter(|l| l.starts_with("FAIL")).copied().collect();
    // The lap-count estimate at alpha = 1.2 misses its tolerance; verify must say so.
    assert_eq!(failed.len(), 1, "{text}");
    assert!(failed[0].contains("tent-entropy"));
    assert_eq!(out.status.code(), Some(1));
}
