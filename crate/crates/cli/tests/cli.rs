use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_offset-root"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = run(&all);
    serde_json::from_slice(&out.stdout).expect("valid json")
}

#[test]
fn approx_reproduces_sqrt5_table() {
    let out = run(&["approx", "--x", "5", "--d", "2", "--b", "4", "--c1", "10", "--tol", "1e-9"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("     2 | 0.16666666667"), "{text}");
    assert!(text.contains("     3 | -0.26086956522"));
    assert!(text.contains("    10 | -0.23606797"));
    assert!(text.contains("estimate: b/2 - c_n = 2.23606797746"));
}

#[test]
fn approx_cube_root() {
    let out = run(&["approx", "--x", "1250", "--d", "3", "--b", "70", "--c1", "10"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("estimate: b/2 + c_n = 10.772"));
}

#[test]
fn approx_exit_codes() {
    let out = run(&["approx", "--x", "5", "--d", "2", "--b", "0", "--c1", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("neutral stability"));

    assert_eq!(run(&["approx", "--x", "-5", "--b", "4"]).status.code(), Some(1));
    assert_eq!(run(&["approx", "--x", "5", "--d", "1", "--b", "4"]).status.code(), Some(1));
    assert_eq!(run(&["approx", "--b", "4"]).status.code(), Some(1));
    assert_eq!(run(&["approx", "--x", "abc"]).status.code(), Some(1));

    // unstable offset for the cube root: non-convergence
    let out = run(&["approx", "--x", "1250", "--d", "3", "--b", "7", "--c1", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("estimate: none"));

    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn approx_guesses_offset() {
    let v = json(&["approx", "--x", "1250", "--d", "7"]);
    let b = v["inputs"]["b"].as_f64().unwrap();
    assert!(b > 4.1755);
    assert_eq!(v["results"]["verdict"], "converged_correct");
}

#[test]
fn approx_json_round_trips_bit_exact() {
    let v = json(&["approx", "--x", "5", "--b", "4", "--c1", "10", "--tol", "1e-9"]);
    assert_eq!(v["command"], "approx");
    assert!(v["version"].is_string());
    assert_eq!(v["inputs"]["convention"], "minus");
    let iterates: Vec<f64> = v["results"]["iterates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_f64().unwrap())
        .collect();
    assert_eq!(iterates[1].to_bits(), (1.0f64 / 6.0).to_bits());
    assert_eq!(iterates[2].to_bits(), (-6.0f64 / 23.0).to_bits());
    let estimate = v["results"]["root_estimate"].as_f64().unwrap();
    assert_eq!(estimate.to_bits(), (2.0 - iterates.last().unwrap()).to_bits());
}

#[test]
fn approx_csv_schema() {
    let out = run(&["approx", "--x", "5", "--b", "4", "--c1", "10", "--format", "csv"]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,c_n"));
    assert_eq!(lines.next(), Some("1,1.0000000000000000e1"));
    assert_eq!(lines.next(), Some("2,1.6666666666666666e-1"));
}

#[test]
fn identical_invocations_identical_bytes() {
    for format in ["csv", "json"] {
        let args = ["compare", "--x", "7", "--b", "4", "--format", format];
        assert_eq!(run(&args).stdout, run(&args).stdout);
        let args = ["scan", "--x", "5", "--b-min", "0.5", "--b-max", "10", "--steps", "50", "--format", format];
        assert_eq!(run(&args).stdout, run(&args).stdout);
    }
}

#[test]
fn stability_regime_table() {
    let out = run(&["stability", "--x", "7", "--d", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&["stability", "--x", "7", "--d", "2"]);
    let rows = v["results"]["regimes"].as_array().unwrap();
    let classes: Vec<(String, String)> = rows
        .iter()
        .map(|r| {
            (
                r["c_minus"]["class"].as_str().unwrap().to_string(),
                r["c_plus"]["class"].as_str().unwrap().to_string(),
            )
        })
        .collect();
    let expected = [
        ("unstable", "stable"),
        ("unstable", "superstable"),
        ("unstable", "stable"),
        ("neutral", "neutral"),
        ("stable", "unstable"),
        ("superstable", "unstable"),
        ("stable", "unstable"),
    ];
    for (got, want) in classes.iter().zip(expected) {
        assert_eq!((got.0.as_str(), got.1.as_str()), want);
    }
}

#[test]
fn stability_single_offset() {
    let v = json(&["stability", "--x", "7", "--d", "2", "--b", "4"]);
    let minus = &v["results"]["fixed_points"][0];
    assert_eq!(minus["which"], "c_minus");
    assert_eq!(minus["class"], "stable");
    assert!((minus["derivative_magnitude"].as_f64().unwrap() - 0.139).abs() < 5e-4);

    let v = json(&["stability", "--x", "1250", "--d", "3", "--b", "70"]);
    let fps = v["results"]["fixed_points"].as_array().unwrap();
    assert_eq!(fps.len(), 1);
    assert!((fps[0]["location"].as_f64().unwrap() + 24.2278).abs() < 1e-4);
    assert_eq!(fps[0]["class"], "stable");

    let out = run(&["stability", "--x", "7", "--b", "4", "--format", "csv"]);
    assert!(stdout(&out).starts_with("regime,b,which,location,derivative_magnitude,class\n"));
}

#[test]
fn scan_square_root() {
    let out = run(&["scan", "--x", "5", "--d", "2", "--b-min", "0.5", "--b-max", "10", "--steps", "100", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("b,verdict,root_estimate,residual"));
    assert!(lines.all(|l| l.split(',').nth(1) == Some("converged_correct")));

    let v = json(&["scan", "--x", "5", "--b-min", "0.5", "--b-max", "10", "--steps", "100"]);
    let intervals = v["results"]["intervals"].as_array().unwrap();
    assert_eq!(intervals.len(), 1);
    assert_eq!(intervals[0][0].as_f64(), Some(0.5));
    assert_eq!(intervals[0][1].as_f64(), Some(10.0));
}

#[test]
fn scan_cubic_edge() {
    let v = json(&["scan", "--x", "1250", "--d", "3", "--b-min", "6", "--b-max", "9", "--steps", "3000"]);
    let edge = v["results"]["least_positive_b"].as_f64().unwrap();
    assert!((edge - 7.88578).abs() < 2e-3, "edge {edge}");
}

#[test]
fn scan_degree_seven() {
    let v = json(&["scan", "--x", "1250", "--d", "7", "--b-min", "3", "--b-max", "7", "--steps", "4000"]);
    let b = v["results"]["least_positive_b"].as_f64().unwrap();
    let ratio = v["results"]["threshold_ratio"].as_f64().unwrap();
    assert!((b - 4.1755).abs() < 5e-3, "b {b}");
    assert!((ratio - 17.704).abs() < 0.02, "ratio {ratio}");
}

#[test]
fn scan_rejects_bad_range() {
    let out = run(&["scan", "--x", "5", "--b-min", "3", "--b-max", "1", "--steps", "10"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["scan", "--x", "5", "--b-min", "1", "--b-max", "3", "--steps", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

fn method<'a>(v: &'a Value, name: &str) -> &'a Value {
    v["results"]["methods"]
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["method"] == name)
        .unwrap()
}

#[test]
fn compare_orders() {
    let v = json(&["compare", "--x", "7", "--d", "2", "--b", "4"]);
    let newton = method(&v, "newton")["order"].as_f64().unwrap();
    let offset = method(&v, "offset")["order"].as_f64().unwrap();
    assert!((newton - 2.0).abs() < 0.3);
    assert!((offset - 1.0).abs() < 0.1);
}

#[test]
fn compare_cube_root_iterations() {
    let out = run(&["compare", "--x", "1250", "--d", "3", "--b", "70"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&["compare", "--x", "1250", "--d", "3", "--b", "70"]);
    let newton = method(&v, "newton")["steps_to_1e-12"].as_u64().unwrap();
    let offset = method(&v, "offset")["steps_to_1e-12"].as_u64().unwrap();
    assert!(newton < offset, "{newton} vs {offset}");
    assert!(v["results"]["methods"]
        .as_array()
        .unwrap()
        .iter()
        .all(|m| m["method"] != "babylonian"));

    let out = run(&["compare", "--x", "1250", "--d", "3", "--b", "70", "--format", "csv"]);
    let text = stdout(&out);
    let first = text.lines().nth(1).unwrap();
    assert!(first.ends_with(',') || first.split(',').nth(3) == Some(""));
    assert!(text.starts_with("n,err_offset,err_newton,err_babylonian,err_halley\n"));
}

#[test]
fn compare_perfect_square() {
    let v = json(&["compare", "--x", "4", "--d", "2", "--b", "4"]);
    let offset = method(&v, "offset");
    let iterates = offset["trace"]["iterates"].as_array().unwrap();
    assert_eq!(iterates.len(), 2);
    assert_eq!(offset["errors"][1].as_f64(), Some(0.0));
}

#[test]
fn cf_expansion() {
    let v = json(&["cf", "--x", "5", "--b", "4", "--depth", "10"]);
    assert_eq!(v["results"]["partial_numerator"].as_f64(), Some(1.0));
    assert_eq!(v["results"]["partial_denominator"].as_f64(), Some(-4.0));
    assert_eq!(v["results"]["simple"], true);
    assert_eq!(v["results"]["equivalent_to_iteration"], true);
    let last = v["results"]["truncations"][9].as_f64().unwrap();
    assert!((last + 0.2360680).abs() < 1e-7);

    let v = json(&["cf", "--x", "7", "--b", "4", "--depth", "10"]);
    assert_eq!(v["results"]["partial_numerator"].as_f64(), Some(3.0));
    assert_eq!(v["results"]["partial_denominator"].as_f64(), Some(-4.0));

    let text = stdout(&run(&["cf", "--x", "5", "--b", "4"]));
    assert!(text.contains("compact: 1/(-4 + 1/(-4 + 1/(-4 + ...)))"));
}

#[test]
fn cf_rejects_other_degrees() {
    let out = run(&["cf", "--x", "5", "--d", "3", "--b", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("continued fraction defined for d=2 only"));
    let out = run(&["cf", "--x", "5", "--b", "4", "--depth", "10001"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn writes_to_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.json");
    let out = run(&["approx", "--x", "5", "--b", "4", "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["command"], "approx");
}
