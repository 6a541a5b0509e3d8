use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use restartkit::cli::Summary;
use restartkit::trace::{read_trace_file, write_trace};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_restartkit"));
    c.env("RESTARTKIT_THREADS", "2");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write_config(dir: &Path, name: &str, body: serde_json::Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(&body).unwrap()).unwrap();
    p
}

fn qcbp_config(dir: &Path, scheme: &str, t: u64) -> PathBuf {
    let out = dir.join(format!("qcbp-{scheme}.csv"));
    write_config(
        dir,
        &format!("qcbp-{scheme}.json"),
        serde_json::json!({
            "experiment": "qcbp_gaussian",
            "scheme": scheme,
            "seed": 3,
            "output_path": out,
            "problem": { "n": 64, "m": 32, "s": 4, "sigma": 1e-4 },
            "restart": { "t": t },
            "checkpoint_stride": 5
        }),
    )
}

fn summary_for(trace: &Path) -> Summary {
    serde_json::from_str(&fs::read_to_string(trace.with_extension("summary.json")).unwrap()).unwrap()
}

#[test]
fn run_writes_trace_with_expected_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = qcbp_config(dir.path(), "grid_both", 400);
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let trace = dir.path().join("qcbp-grid_both.csv");
    let text = fs::read_to_string(&trace).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,restart,i,j,k,f,ferr,gap,rerr");
    let s = summary_for(&trace);
    assert!(s.inner_iterations <= 400);
    assert_eq!(s.budget, 400);
}

#[test]
fn every_scheme_runs() {
    let dir = tempfile::tempdir().unwrap();
    for scheme in ["none", "fixed", "grid_alpha", "grid_beta", "grid_both"] {
        let cfg = qcbp_config(dir.path(), scheme, 300);
        let o = run(&["run", cfg.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{scheme}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let out = dir.path().join("ranges.csv");
    let cfg = write_config(
        dir.path(),
        "ranges.json",
        serde_json::json!({
            "experiment": "qcbp_gaussian",
            "scheme": "ranges",
            "output_path": out,
            "problem": { "n": 32, "m": 16, "s": 2, "sigma": 1e-3 },
            "restart": { "t": 200, "ranges": { "i_min": -1, "i_max": 1, "j_min": 0, "j_max": 1 } }
        }),
    );
    assert_eq!(code(&run(&["run", cfg.to_str().unwrap()])), 0);
}

#[test]
fn replay_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = qcbp_config(dir.path(), "grid_both", 500);
    let trace = dir.path().join("qcbp-grid_both.csv");
    assert_eq!(code(&run(&["run", cfg.to_str().unwrap()])), 0);
    let first = (fs::read(&trace).unwrap(), fs::read(trace.with_extension("summary.json")).unwrap());
    assert_eq!(code(&run(&["run", cfg.to_str().unwrap()])), 0);
    let second = (fs::read(&trace).unwrap(), fs::read(trace.with_extension("summary.json")).unwrap());
    assert_eq!(first, second);
    // The parallel engine is also thread-count independent.
    let par1 =
        bin().env("RESTARTKIT_THREADS", "1").args(["run", cfg.to_str().unwrap(), "--parallel"]).output().unwrap();
    assert_eq!(code(&par1), 0);
    let a = fs::read(&trace).unwrap();
    let par4 =
        bin().env("RESTARTKIT_THREADS", "4").args(["run", cfg.to_str().unwrap(), "--parallel"]).output().unwrap();
    assert_eq!(code(&par4), 0);
    assert_eq!(a, fs::read(&trace).unwrap());
}

#[test]
fn trace_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = qcbp_config(dir.path(), "grid_both", 300);
    assert_eq!(code(&run(&["run", cfg.to_str().unwrap()])), 0);
    let trace = dir.path().join("qcbp-grid_both.csv");
    let rows = read_trace_file(&trace).unwrap();
    assert!(rows.len() > 2);
    let mut buf = Vec::new();
    write_trace(&mut buf, &rows).unwrap();
    assert_eq!(buf, fs::read(&trace).unwrap());
}

/// Decades recomputed straight from the CSV columns.
#[test]
fn decades_are_recomputable_from_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = qcbp_config(dir.path(), "grid_both", 1500);
    assert_eq!(code(&run(&["run", cfg.to_str().unwrap()])), 0);
    let trace = dir.path().join("qcbp-grid_both.csv");
    let summary = summary_for(&trace);
    let mut rdr = csv::Reader::from_path(&trace).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "rerr").unwrap();
    let t_col = headers.iter().position(|h| h == "t").unwrap();
    let series: Vec<(u64, f64)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[t_col].parse().unwrap(), r[col].parse().unwrap())
        })
        .collect();
    let first = series[0].1;
    let min = series.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let top = first.log10().ceil() as i32;
    let bottom = min.log10().ceil() as i32;
    let expected: Vec<(i32, u64)> =
        (bottom..=top).rev().map(|q| (q, series.iter().find(|s| s.1 <= 10f64.powi(q)).unwrap().0)).collect();
    let got: Vec<(i32, u64)> = summary.decades.iter().map(|d| (d.exponent, d.iterations)).collect();
    assert_eq!(got, expected);
    assert!(got.len() >= 3, "too few decades to be meaningful: {got:?}");
}

#[test]
fn sweep_writes_per_value_traces_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = qcbp_config(dir.path(), "grid_both", 300);
    let o = run(&["sweep", cfg.to_str().unwrap(), "--param", "sigma", "--values", "1e-2,1e-4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = dir.path().join("qcbp-grid_both-sweep-sigma.csv");
    let text = fs::read_to_string(&table).unwrap();
    assert_eq!(text.lines().count(), 3, "{text}");
    for v in ["1e-2", "1e-4"] {
        assert!(dir.path().join(format!("qcbp-grid_both-sigma={v}.csv")).exists(), "{v}");
    }
}

#[test]
fn empty_sweep_succeeds_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = qcbp_config(dir.path(), "grid_both", 300);
    let before: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    let o = run(&["sweep", cfg.to_str().unwrap(), "--param", "alpha", "--values"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), before.len());
}

#[test]
fn schedule_dump_prints_prefix() {
    let o = run(&["schedule", "dump", "--count", "5"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,i,j,k,h");
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[1], "1,0,0,1,1");
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["run", dir.path().join("missing.json").to_str().unwrap()])), 2);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&run(&["run", bad.to_str().unwrap()])), 2);
    let unknown = write_config(dir.path(), "u.json", serde_json::json!({"experiment": "qcbp_gaussian", "bogus": 1}));
    assert_eq!(code(&run(&["run", unknown.to_str().unwrap()])), 2);
    let wrong_field = write_config(
        dir.path(),
        "w.json",
        serde_json::json!({"experiment": "qcbp_gaussian", "problem": {"lambda": 2.0}}),
    );
    assert_eq!(code(&run(&["run", wrong_field.to_str().unwrap()])), 2);
    let cfg = qcbp_config(dir.path(), "grid_both", 10);
    assert_eq!(code(&run(&["sweep", cfg.to_str().unwrap(), "--param", "zeta", "--values", "1"])), 2);
    assert_eq!(code(&run(&["oracle", cfg.to_str().unwrap(), "--budget", "5"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn solver_failure_exits_with_three_and_keeps_partial_trace() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("huge.csv");
    fs::write(&data, "1,2,1e200\n3,4,1e200\n5,1,2\n").unwrap();
    let out = dir.path().join("huge-trace.csv");
    let cfg = write_config(
        dir.path(),
        "huge.json",
        serde_json::json!({
            "experiment": "srlasso",
            "scheme": "none",
            "output_path": out,
            "problem": { "dataset": { "path": data, "format": "csv" }, "reference_optimum": 1.0 },
            "restart": { "t": 50 }
        }),
    );
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.exists());
}
