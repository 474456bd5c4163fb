use std::process::{Command, Output};

use serde_json::Value;

fn dehn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dehn")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = dehn(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

fn error_kind(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).expect("error object on stderr");
    v["error"]["kind"].as_str().unwrap().to_string()
}

#[test]
fn growth_value() {
    // w_1(2) = L(2) = 7.
    assert_eq!(stdout(&["growth", "--n", "1", "--r", "2"]).trim(), "7");
    assert_eq!(json(&["growth", "--n", "2", "--r", "1", "--format", "json"])["value"], "17");
}

#[test]
fn sphere_inventory_area() {
    let v = json(&["sphere", "--group", "H1", "--r", "1", "--emit", "json"]);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["area"], "38");
    let explicit = json(&["sphere", "--group", "H1", "--r", "1", "--explicit", "--emit", "json"]);
    assert_eq!(explicit["area"], "38");
    assert_eq!(explicit["faces"].as_array().unwrap().len(), 38);
    assert_eq!(explicit["validation"]["passed"], true);
}

#[test]
fn dehn_table_rows() {
    let v = json(&["dehn-table", "--format", "json"]);
    let rows: Vec<(&str, &str)> = v["table"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["group"].as_str().unwrap(), r["notation"].as_str().unwrap()))
        .collect();
    assert_eq!(
        rows,
        [
            ("G0", "x²"),
            ("H1", "e^{√x}"),
            ("G1", "e^x"),
            ("H2", "e^{e^{√x}}"),
            ("G2", "e^{e^x}"),
            ("H3", "e^{e^{e^{√x}}}"),
            ("Hn", "exp^n(√x)"),
            ("Gn", "exp^n(x)"),
        ]
    );
    assert!(!v["steps"].as_array().unwrap().is_empty());
}

#[test]
fn csv_tables() {
    let t = stdout(&["table", "--group", "H1", "--r-max", "3"]);
    let mut lines = t.lines();
    assert_eq!(lines.next(), Some("r,area_exact,vol_lower_exact,log_area,log_vol"));
    // 16r² + 16r + 6.
    let areas: Vec<&str> = lines.map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(areas, ["38", "102", "198"]);

    let d = stdout(&["distort", "--n", "1", "--N-max", "3"]);
    let mut lines = d.lines();
    assert_eq!(lines.next(), Some("N,area_edge_exact,area_ambient_upper,log_edge,fitted_beta"));
    // L(N+1) − 2 and (2N+1)².
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&first[..3], ["1", "5", "9"]);

    let l = stdout(&["lengths", "--max-n", "3"]);
    assert_eq!(l.lines().nth(4).unwrap().split(',').take(3).collect::<Vec<_>>(), ["3", "17", "28"]);
}

#[test]
fn output_is_deterministic_across_modes() {
    for args in [
        vec!["table", "--group", "G1", "--r-max", "4", "--out", "json"],
        vec!["distort", "--n", "1", "--N-max", "6", "--out", "json"],
    ] {
        let par = dehn(&args).stdout;
        let mut seq_args = args.clone();
        seq_args.push("--sequential");
        assert_eq!(par, dehn(&seq_args).stdout);
        assert_eq!(par, dehn(&args).stdout);
    }
}

#[test]
fn present_relator_counts() {
    for (level, count) in [("H0", 12), ("G0", 20), ("H1", 44), ("G1", 56)] {
        let v = json(&["present", "--level", level, "--format", "json"]);
        assert_eq!(v["relators"].as_array().unwrap().len(), count, "{level}");
    }
}

#[test]
fn diagrams_export_and_validate() {
    assert!(stdout(&["diagram", "--kind", "theta", "--n", "1", "--i", "2", "--r", "1", "--format", "dot"]).starts_with("digraph"));
    assert!(stdout(&["diagram", "--kind", "delta", "--r", "1", "--format", "svg"]).starts_with("<svg"));
    let v = json(&["validate", "--kind", "delta", "--n", "1", "--r", "2"]);
    assert_eq!(v["passed"], true);
    assert_eq!(v["level"], "H1");
    let v = json(&["validate", "--kind", "sphere", "--group", "G0", "--r", "1"]);
    assert_eq!(v["euler_characteristic"], 2);
    // A cell that is not a relator of H0.
    let out = dehn(&["validate", "--kind", "cell", "--label", "a[0][1][1] a[0][1][2]"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], false);
}

#[test]
fn errors_are_machine_readable() {
    let out = dehn(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "UsageError");

    let out = dehn(&["growth", "--n", "4", "--r", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_kind(&out), "BudgetExceeded");

    let out = dehn(&["sphere", "--group", "H2", "--r", "1", "--explicit"]);
    assert_eq!(error_kind(&out), "DepthExceeded");

    let out = dehn(&["present", "--level", "H9"]);
    assert_eq!(error_kind(&out), "DepthExceeded");
}
