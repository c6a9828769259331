//! End-to-end tests of the command-line front end through `dispatch_with_io`.

use annulus_sle::cli::dispatch_with_io;
use std::fs;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("annulus-sle").chain(args.iter().copied());
    let code = dispatch_with_io(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header = rd.headers().unwrap().iter().map(String::from).collect();
    let rows = rd
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn kernel_vanishes_at_pi() {
    let (code, out, _) = run(&["special", "H", "--r", "1", "--z", "3.14159265"]);
    assert_eq!(code, 0);
    let (header, rows) = parse_csv(&out);
    assert_eq!(header, ["re", "im"]);
    let re: f64 = rows[0][0].parse().unwrap();
    assert!(re.abs() < 1e-7, "{re}");
}

#[test]
fn screen_closed_form_residuals_are_small() {
    let (code, out, _) = run(&[
        "screen",
        "--kappa",
        "4",
        "--method",
        "closed",
        "--check-pde",
        "--r",
        "1",
        "--x-grid",
        "0.3:5.9:40",
    ]);
    assert_eq!(code, 0);
    let (header, rows) = parse_csv(&out);
    assert_eq!(header, ["x", "Z", "pde_residual"]);
    assert_eq!(rows.len(), 40);
    for row in rows {
        let res: f64 = row[2].parse().unwrap();
        assert!(res < 1e-6, "{row:?}");
    }
}

#[test]
fn csv_floats_round_trip_and_output_is_deterministic() {
    let args = [
        "drift",
        "--r",
        "1.2",
        "--kappa",
        "3",
        "--force",
        "2.0:-0.8164965809277261",
        "--xi-grid",
        "-0.5:0.5:5",
    ];
    let (code, a, _) = run(&args);
    let (_, b, _) = run(&args);
    assert_eq!(code, 0);
    assert_eq!(a, b);
    let (header, rows) = parse_csv(&a);
    assert_eq!(header, ["xi", "lambda"]);
    for row in rows {
        for cell in row {
            let v: f64 = cell.parse().unwrap();
            assert_eq!(format!("{v:.16e}"), cell);
        }
    }
}

#[test]
fn exit_codes() {
    // Usage error.
    assert_eq!(run(&["bogus"]).0, 1);
    assert_eq!(run(&["special", "theta"]).0, 1);
    // Help is not an error.
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("screen"));
    // Validation errors: modulus below the floor, broken neutrality.
    assert_eq!(run(&["special", "theta", "--r", "0.1"]).0, 1);
    assert_eq!(
        run(&["drift", "--r", "1", "--kappa", "3", "--force", "2:-0.3"]).0,
        1
    );
    // κ outside the method's range is rejected up front.
    assert_eq!(
        run(&["screen", "--kappa", "2", "--method", "euler", "--x-grid", "1:2:2"]).0,
        1
    );
    // Evaluating on a pole is a numerical failure.
    let (code, _, err) = run(&["special", "H", "--r", "1", "--z", "0"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("screen.json");
    fs::write(
        &cfg,
        r#"{"kappa": 4, "method": "closed", "x_grid": "1:3:3", "check_pde": true}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let (code, out, _) = run(&["screen", "--config", cfg]);
    assert_eq!(code, 0);
    let (_, rows) = parse_csv(&out);
    assert_eq!(rows.len(), 3);
    assert!(!rows[0][2].is_empty());
    let (code, out2, _) = run(&[
        "screen", "--config", cfg, "--kappa", "2", "--x-grid", "1:3:2",
    ]);
    assert_eq!(code, 0);
    let (_, rows2) = parse_csv(&out2);
    assert_eq!(rows2.len(), 2);
    assert_ne!(rows[0][1], rows2[0][1]);
}

#[test]
fn files_and_plot_script_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("green.csv");
    let plot = dir.path().join("plot.py");
    let (code, out, err) = run(&[
        "green",
        "--r",
        "1",
        "--zeta",
        "1+0.5i",
        "--re-grid",
        "0:6:7",
        "--im-grid",
        "0.25:0.75:3",
        "--out",
        csv_path.to_str().unwrap(),
        "--plot-script",
        plot.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.is_empty());
    let (header, rows) = parse_csv(&fs::read_to_string(&csv_path).unwrap());
    assert_eq!(header, ["re", "im", "value"]);
    assert_eq!(rows.len(), 21);
    assert!(fs::read_to_string(&plot).unwrap().contains("green.csv"));
}

#[test]
fn sle_run_writes_traces() {
    let (code, out, err) = run(&[
        "sle",
        "run",
        "--kappa",
        "4",
        "--r0",
        "2",
        "--force",
        "3.141592653589793:-0.7071067811865476",
        "--T",
        "0.02",
        "--dt",
        "1e-3",
        "--paths",
        "3",
        "--seed",
        "4",
        "--stride",
        "5",
    ]);
    assert_eq!(code, 0, "{err}");
    let (header, rows) = parse_csv(&out);
    assert_eq!(header, ["path_id", "t", "xi", "re_gamma", "im_gamma"]);
    assert_eq!(rows.len(), 3 * 5);
    for row in &rows {
        let im: f64 = row[4].parse().unwrap();
        assert!((0.0..=2.0).contains(&im));
    }
}

#[test]
fn martingale_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let csv_path = dir.path().join("report.csv");
    let (code, _, err) = run(&[
        "martingale",
        "--paths",
        "200",
        "--T",
        "0.016",
        "--dt",
        "1e-3",
        "--seed",
        "9",
        "--json",
        json.to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["n_paths"], 200);
    assert_eq!(report["times"].as_array().unwrap().len(), 6);
    let (header, rows) = parse_csv(&fs::read_to_string(&csv_path).unwrap());
    assert_eq!(header, ["t", "mean_increment", "std_error", "z_score"]);
    assert_eq!(rows.len(), 6);
}

#[test]
fn partition_from_divisor_file() {
    let dir = tempfile::tempdir().unwrap();
    let div = dir.path().join("div.json");
    fs::write(
        &div,
        r#"{"points":[{"re":1.0,"im":0.5,"sigma":1.0,"sigma_star":0.0},{"re":2.0,"im":0.7,"sigma":-1.0,"sigma_star":0.0}]}"#,
    )
    .unwrap();
    let (code, out, err) = run(&[
        "partition",
        "--r",
        "1",
        "--kappa",
        "4",
        "--divisor",
        div.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let (header, rows) = parse_csv(&out);
    assert_eq!(header, ["re", "im"]);
    assert_eq!(rows.len(), 1);
    let (code, out, _) = run(&[
        "partition",
        "--r",
        "1",
        "--kappa",
        "4",
        "--p",
        "0",
        "--force",
        "2:-0.7071067811865476",
    ]);
    assert_eq!(code, 0);
    let v: f64 = parse_csv(&out).1[0][0].parse().unwrap();
    assert!(v > 0.0);
}

#[test]
fn selftest_reports_every_check() {
    let (code, out, _) = run(&["selftest"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 11);
    assert!(out.lines().all(|l| l.starts_with("PASS")));
}
