use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qspline(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qspline"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_points(dir: &Path, name: &str, pts: &[(f64, f64)]) -> String {
    let path = dir.join(name);
    let mut text = String::from("x,y\n");
    for (x, y) in pts {
        text.push_str(&format!("{x},{y}\n"));
    }
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn parse_xs(text: &str) -> Vec<(f64, f64)> {
    text.lines()
        .skip(1)
        .map(|l| {
            let (x, s) = l.split_once(',').unwrap();
            (x.parse().unwrap(), s.parse().unwrap())
        })
        .collect()
}

#[test]
fn table_csv_has_one_row_per_end_condition() {
    let out = qspline(&["table", "--id", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "end_condition,6,12,24,48,96");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 6);
        let errs: Vec<f64> = cells[1..].iter().map(|c| c.parse().unwrap()).collect();
        assert!(errs.windows(2).all(|p| p[1] < p[0]), "{row}");
    }
}

#[test]
fn table_json_to_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t3.json");
    let out = qspline(&[
        "table",
        "--id",
        "3",
        "--seed",
        "7",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v.get("errors").is_some());
    let again = dir.path().join("again.json");
    qspline(&["table", "--id", "3", "--seed", "7", "--format", "json", "--out", again.to_str().unwrap()]);
    assert_eq!(fs::read(&path).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn table_id_out_of_range_is_input_error() {
    assert_eq!(qspline(&["table", "--id", "6"]).status.code(), Some(2));
}

#[test]
fn clamped_interpolation_reproduces_a_cubic() {
    let dir = tempfile::tempdir().unwrap();
    let f = |x: f64| x * x * x - 2.0 * x + 1.0;
    let pts: Vec<(f64, f64)> = [-1.0, -0.25, 0.5, 1.0, 2.0].iter().map(|&x| (x, f(x))).collect();
    let data = write_points(dir.path(), "c.csv", &pts);
    // f'(-1) = 1, f'(2) = 10
    let out = qspline(&["interpolate", "--data", &data, "--end-condition", "clamped-first", "--ends", "1,10", "--grid", "31"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_xs(&stdout(&out));
    assert_eq!(rows.len(), 31);
    assert_eq!(rows[0].0, -1.0);
    assert_eq!(rows[30].0, 2.0);
    for (x, s) in rows {
        assert!((s - f(x)).abs() < 1e-12, "x={x}: {s} vs {}", f(x));
    }
}

#[test]
fn negative_end_values_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let pts: Vec<(f64, f64)> = (0..6).map(|i| (i as f64, -(i as f64).powi(2))).collect();
    let data = write_points(dir.path(), "q.csv", &pts);
    let out = qspline(&["interpolate", "--data", &data, "--end-condition", "clamped-second", "--ends", "-2,-2", "--eval", "2.5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_xs(&stdout(&out));
    assert!((rows[0].1 + 6.25).abs() < 1e-12);
}

#[test]
fn export_coeffs_writes_one_row_per_piece() {
    let dir = tempfile::tempdir().unwrap();
    let pts: Vec<(f64, f64)> = (0..9).map(|i| (i as f64 * 0.5, (i as f64 * 0.5).sin())).collect();
    let data = write_points(dir.path(), "s.csv", &pts);
    let coeffs = dir.path().join("coeffs.csv");
    let out = qspline(&["interpolate", "--data", &data, "--end-condition", "q", "--export-coeffs", coeffs.to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(coeffs).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,a,b,c,d");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 8);
    for (row, (x, y)) in rows.iter().zip(&pts) {
        assert_eq!(row[0], *x);
        assert_eq!(row[1], *y);
    }
}

#[test]
fn clamped_without_ends_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_points(dir.path(), "d.csv", &[(0.0, 0.0), (1.0, 1.0), (2.0, 4.0)]);
    let out = qspline(&["interpolate", "--data", &data, "--end-condition", "clamped-first", "--eval", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn malformed_inputs_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "x,y\n0,0\n1,oops\n").unwrap();
    let bad = bad.to_str().unwrap();
    assert_eq!(qspline(&["interpolate", "--data", bad, "--end-condition", "natural"]).status.code(), Some(2));

    let unsorted = write_points(dir.path(), "u.csv", &[(0.0, 0.0), (2.0, 1.0), (1.0, 4.0)]);
    assert_eq!(qspline(&["interpolate", "--data", &unsorted, "--end-condition", "natural"]).status.code(), Some(2));

    let short = write_points(dir.path(), "short.csv", &[(0.0, 0.0), (1.0, 1.0), (2.0, 4.0)]);
    assert_eq!(qspline(&["interpolate", "--data", &short, "--end-condition", "rnak"]).status.code(), Some(2));

    let missing = dir.path().join("missing.csv");
    assert_eq!(
        qspline(&["interpolate", "--data", missing.to_str().unwrap(), "--end-condition", "natural"]).status.code(),
        Some(2)
    );
    assert_eq!(qspline(&["interpolate", "--data", &short, "--end-condition", "bogus"]).status.code(), Some(2));
    assert_eq!(
        qspline(&["interpolate", "--data", &short, "--end-condition", "natural", "--eval", "9"]).status.code(),
        Some(2)
    );
}

#[test]
fn near_coincident_knots_are_numerical_failures() {
    let dir = tempfile::tempdir().unwrap();
    let pts: Vec<(f64, f64)> = [0.0, 1.0, 2.0, 2.000000000000001, 3.0]
        .iter()
        .enumerate()
        .map(|(i, &x)| (x, i as f64))
        .collect();
    let data = write_points(dir.path(), "n.csv", &pts);
    for ec in ["nak", "rnak"] {
        let out = qspline(&["interpolate", "--data", &data, "--end-condition", ec, "--eval", "0.5"]);
        assert_eq!(out.status.code(), Some(3), "{ec}");
    }
}

#[test]
fn conditioning_trace_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig2.csv");
    let out = qspline(&["conditioning", "--figure", "2", "--n", "30", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "series,i,x_i,b_i,c_i,d_i,log_abs_b");
    assert_eq!(lines.count(), 31);
}

#[test]
fn conditioning_rejects_unknown_figure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    let out = qspline(&["conditioning", "--figure", "4", "--n", "10", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn convergence_reports_fourth_order_for_nak() {
    let out = qspline(&[
        "convergence",
        "--function",
        "exp",
        "--interval",
        "-1,1",
        "--end-condition",
        "nak",
        "--knots",
        "12,24,48,96",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let order = v["order"].as_f64().unwrap();
    assert!((3.7..4.3).contains(&order), "order {order}");
    assert_eq!(v["errors"].as_array().unwrap().len(), 4);
}

#[test]
fn bounds_report_contains_measured_error_below_bound() {
    let out = qspline(&["bounds", "--function", "sin", "--interval", "0,3", "--knots", "20", "--end-condition", "clamped-first"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let measured = v["measured_error"].as_f64().unwrap();
    let bound = v["bound"]["value"].as_f64().unwrap();
    assert!(measured > 0.0 && measured <= bound);
    assert_eq!(v["within_bound"], Value::Bool(true));
}

#[test]
fn bounds_without_applicable_estimate_is_null() {
    let out = qspline(&["bounds", "--function", "runge", "--interval", "-1,1", "--knots", "12", "--end-condition", "rnak"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["bound"].is_null());
    assert!(v["measured_error"].as_f64().unwrap() > 0.0);
}

#[test]
fn bounds_rejects_reversed_interval_and_unknown_function() {
    assert_eq!(
        qspline(&["bounds", "--function", "sin", "--interval", "1,0", "--knots", "8", "--end-condition", "q"]).status.code(),
        Some(2)
    );
    assert_eq!(
        qspline(&["bounds", "--function", "tan", "--interval", "0,1", "--knots", "8", "--end-condition", "q"]).status.code(),
        Some(2)
    );
}
