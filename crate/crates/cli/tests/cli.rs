use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mcg_core::generator::read_stream;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn mcg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcg")).args(args).output().expect("binary runs")
}

fn run(cmd: &str, config: &str, extra: &[&str]) -> Output {
    let path = data(config);
    let mut args = vec![cmd, "--config", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    mcg(&args)
}

fn csv(out: &Output) -> Vec<Vec<String>> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(!text.contains('\r'));
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn column<'a>(table: &'a [Vec<String>], name: &str) -> Vec<&'a str> {
    let idx = table[0].iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    table[1..].iter().map(|r| r[idx].as_str()).collect()
}

#[test]
fn validate_exit_codes() {
    assert_eq!(run("validate", "fib3.json", &[]).status.code(), Some(0));
    let rejected = run("validate", "fib5.json", &[]);
    assert_eq!(rejected.status.code(), Some(2));
    let verdict: serde_json::Value = serde_json::from_slice(&rejected.stdout).unwrap();
    assert_eq!(verdict["reason"], "multiple-roots-mod-p");
    let dir = tempfile::tempdir().unwrap();
    let truncated = dir.path().join("bad.json");
    std::fs::write(&truncated, r#"{"p": "3", "t": "#).unwrap();
    let out = mcg(&["validate", "--config", truncated.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed"));
    assert_eq!(mcg(&["validate"]).status.code(), Some(1));
}

#[test]
fn rejected_configs_gate_analysis_commands() {
    assert_eq!(run("expsum", "fib5.json", &[]).status.code(), Some(2));
}

#[test]
fn period_table() {
    let table = csv(&run("period", "fib3.json", &[]));
    assert_eq!(table[0], ["s", "tau_s"]);
    assert_eq!(column(&table, "tau_s"), ["8", "24", "72", "216", "648"]);
    let json: serde_json::Value =
        serde_json::from_slice(&run("period", "fib3.json", &["--format", "json"]).stdout).unwrap();
    assert_eq!((json["tau_star"].as_u64(), json["beta_star"].as_i64()), (Some(8), Some(1)));
    assert_eq!(json["w"], 1);
    let out = run("period", "period_cap.json", &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("iteration-cap-exceeded"));
}

#[test]
fn single_period_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s1.json");
    std::fs::write(&cfg, r#"{"p": "3", "matrix": [[0, 1], [1, 1]], "s_max": 1}"#).unwrap();
    let table = csv(&mcg(&["period", "--config", cfg.to_str().unwrap()]));
    assert_eq!(table.len(), 2);
    assert_eq!(table[1], ["1", "8"]);
}

#[test]
fn gen_formats_agree() {
    let table = csv(&run("gen", "fib3.json", &[]));
    assert_eq!(table[0], ["n", "u0", "u1"]);
    assert_eq!(table.len(), 33);
    assert_eq!(&table[1..5], [["0", "1", "0"], ["1", "0", "1"], ["2", "1", "1"], ["3", "1", "2"]]);
    let bin = run("gen", "fib3.json", &["--format", "bin"]);
    assert!(bin.status.success());
    assert_eq!(&bin.stdout[..4], b"MCG1");
    let (d, vectors) = read_stream(&mut bin.stdout.as_slice()).unwrap();
    assert_eq!((d, vectors.len()), (2, 32));
    for (row, v) in table[1..].iter().zip(&vectors) {
        assert_eq!(row[1..], v.entries().iter().map(|x| x.to_string()).collect::<Vec<_>>());
    }
    assert_eq!(run("period", "fib3.json", &["--format", "bin"]).status.code(), Some(1));
}

#[test]
fn expsum_schedule_rows() {
    let table = csv(&run("expsum", "expsum_schedule.json", &[]));
    assert_eq!(table.len(), 8);
    let ns: Vec<u64> = column(&table, "n").iter().map(|n| n.parse().unwrap()).collect();
    assert_eq!(ns, (4..=10).map(|e| 3u64.pow(e)).collect::<Vec<_>>());
    for (rho, e) in column(&table, "rho").iter().zip(4..=10) {
        assert!((rho.parse::<f64>().unwrap() - e as f64 / 10.0).abs() < 1e-12);
    }
    for x in column(&table, "normalized") {
        assert!(x.parse::<f64>().unwrap() <= 1.0);
    }
}

#[test]
fn discrepancy_rows() {
    let table = csv(&run("discrepancy", "fib3.json", &[]));
    assert_eq!(column(&table, "exact"), ["761/6561", "761/6561"]);
    assert_eq!(column(&table, "v"), ["4", "8"]);
    assert!(column(&table, "bound_holds").iter().all(|b| *b == "true"));
    let cubic = csv(&run("discrepancy", "cubic3.json", &[]));
    assert_eq!(column(&cubic, "kind"), ["star", "star"]);
    assert!(column(&cubic, "extreme_upper").iter().all(|x| !x.is_empty()));
}

#[test]
fn vmvt_rows() {
    let table = csv(&run("vmvt", "fib3.json", &[]));
    assert_eq!(table.len(), 1 + 27);
    let row = table[1..].iter().find(|r| r[..3] == ["2", "2", "2"]).unwrap();
    assert_eq!(row[3], "6");
    for r in &table[1..] {
        let (count, diag): (u128, u128) = (r[3].parse().unwrap(), r[4].parse().unwrap());
        assert!(count >= diag);
    }
}

#[test]
fn bounds_rows() {
    let table = csv(&run("bounds", "bounds_large.json", &[]));
    assert_eq!(column(&table, "s"), ["8", "2", ""]);
    assert_eq!(column(&table, "r"), ["8", "32", ""]);
    assert_eq!(column(&table, "k"), ["266", "4258", ""]);
    assert_eq!(column(&table, "r_lt_s"), ["false", "false", ""]);
    assert_eq!(column(&table, "note")[2], "precondition-violated");
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("period.csv");
    let out = run("period", "fib3.json", &["--out", path.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("s,tau_s\n1,8\n"));
}
