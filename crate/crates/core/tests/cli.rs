use std::path::PathBuf;
use std::process::{Command, Output};

use cpscan::report::{Results, RunReport};

fn cpscan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpscan")).args(args).output().expect("run cpscan")
}

fn ok_report(args: &[&str]) -> (RunReport, String) {
    let out = cpscan(args);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    (RunReport::from_json(&stdout).unwrap(), stdout)
}

fn code(args: &[&str]) -> i32 {
    cpscan(args).status.code().unwrap()
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cpscan-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn stat_z4_with_pvalue() {
    let f = temp_file("step.txt", "0\n0\n2\n2\n");
    let (r, _) = ok_report(&["stat", "--input", f.to_str().unwrap(), "--kind", "z4"]);
    let Results::Stat { entries } = r.results else { panic!() };
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0].report.value, 2.0);
    assert_eq!((entries[0].report.i_star, entries[0].report.j_star), (2, 4));
    let p = entries[0].pvalue.unwrap().value;
    assert!((p - 0.728_004_222_341_734_7).abs() < 1e-12);
}

#[test]
fn stat_all_with_header_skips_what_it_cannot_compute() {
    let f = temp_file("hdr.txt", "value\n0\n\n0\n2\n2\n");
    let (r, _) = ok_report(&["stat", "--input", f.to_str().unwrap(), "--skip-header", "--delta", "1"]);
    let Results::Stat { entries } = &r.results else { panic!() };
    assert_eq!(entries.len(), 3);
    assert!(r.flags.iter().any(|f| f.contains("Z1 skipped") && f.contains("mu0")));
    assert!(r.flags.iter().any(|f| f == "header line skipped"));
}

#[test]
fn stat_errors_use_distinct_exit_codes() {
    let empty = temp_file("empty.txt", "");
    let bad = temp_file("bad.txt", "1\nx\n");
    let hdr = temp_file("hdr2.txt", "value\n1\n2\n");
    let good = temp_file("good.txt", "1\n2\n3\n");
    assert_eq!(code(&["stat", "--input", empty.to_str().unwrap()]), 2);
    assert_eq!(code(&["stat", "--input", "/nonexistent/series.txt"]), 2);
    let out = cpscan(&["stat", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert_eq!(code(&["stat", "--input", hdr.to_str().unwrap()]), 2);
    let out = cpscan(&["stat", "--input", good.to_str().unwrap(), "--kind", "z1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mu0"));
    assert_eq!(code(&["stat", "--input", good.to_str().unwrap(), "--kind", "z9"]), 3);
}

#[test]
fn pvalue_examples() {
    let (r, _) = ok_report(&["pvalue", "--kind", "p1", "--c", "1.5", "--d", "0.5", "--u", "2"]);
    let Results::Pvalue { approx, .. } = r.results else { panic!() };
    assert!((approx.value - 0.029_745_026_119_996_302).abs() < 1e-12);
    let (r, _) = ok_report(&["pvalue", "--kind", "p4", "--d", "4"]);
    let Results::Pvalue { approx, .. } = r.results else { panic!() };
    assert!((approx.value - 0.016_215_675_818_557_4).abs() < 1e-12);
    let out = cpscan(&["pvalue", "--kind", "p3", "--c", "1", "--d", "1", "--u", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("requires c > 4d > 0"));
    let (r, _) = ok_report(&["pvalue", "--kind", "p1", "--c", "20", "--d", "1", "--u", "0.3"]);
    assert!(r.flags.iter().any(|f| f.starts_with("pre-asymptotic")));
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(code(&["bogus"]), 3);
    assert_eq!(code(&["pvalue"]), 3);
    for sub in ["stat", "pvalue", "constants", "simulate", "curve"] {
        assert_eq!(code(&[sub, "--help"]), 0, "{sub}");
    }
}

#[test]
fn simulate_flags_and_errors() {
    let (r, _) = ok_report(&[
        "simulate", "--kind", "free2", "--c", "0", "--u", "1.5", "--grid", "10", "--reps", "200", "--seed", "1",
    ]);
    assert!(r.flags.iter().any(|f| f.starts_with("coarse grid")));
    assert!(r.flags.iter().any(|f| f.starts_with("few replicates")));
    assert_eq!(r.seed, Some(1));
    assert_eq!(code(&["simulate", "--kind", "free2", "--c", "0", "--u", "1.5", "--reps", "0"]), 3);
    assert_eq!(code(&["simulate", "--kind", "p1", "--c", "0.1", "--d", "1", "--u", "1"]), 3);
}

#[test]
fn seed_is_drawn_and_echoed_when_omitted() {
    let (r, _) = ok_report(&["simulate", "--kind", "p4", "--d", "3", "--grid", "50", "--reps", "100"]);
    assert!(r.seed.is_some());
}

#[test]
fn monte_carlo_commands_ignore_thread_count() {
    let sim = ["simulate", "--kind", "p4", "--d", "3", "--grid", "300", "--reps", "3000", "--seed", "42"];
    let con = [
        "constants",
        "--kind",
        "P",
        "--alpha",
        "1.2",
        "--lambda",
        "1",
        "--lambda1",
        "0.5",
        "--step",
        "0.05",
        "--reps",
        "400",
        "--seed",
        "42",
    ];
    for args in [&sim[..], &con[..]] {
        let (_, one) = ok_report(&[args, &["--threads", "1"]].concat());
        let (_, three) = ok_report(&[args, &["--threads", "3"]].concat());
        assert_eq!(one, three, "{args:?}");
    }
}

#[test]
fn reports_round_trip() {
    let f = temp_file("rt.txt", "0.5\n-1\n2\n0.25\n");
    let runs: Vec<Vec<&str>> = vec![
        vec!["stat", "--input", f.to_str().unwrap(), "--mu0", "0", "--delta", "1"],
        vec!["pvalue", "--kind", "p2", "--c", "1", "--d", "1", "--u", "1"],
        vec![
            "constants",
            "--kind",
            "H",
            "--alpha",
            "1",
            "--lambda",
            "1",
            "--step",
            "0.05",
            "--reps",
            "200",
            "--seed",
            "3",
        ],
        vec![
            "constants",
            "--kind",
            "Q",
            "--alpha",
            "2",
            "--lambda",
            "1",
            "--lambda1",
            "0.5",
            "--step",
            "0.05",
            "--reps",
            "200",
            "--seed",
            "3",
        ],
        vec!["simulate", "--kind", "free3", "--c", "2", "--u", "1", "--grid", "100", "--reps", "500", "--seed", "3"],
    ];
    for args in runs {
        let (r, text) = ok_report(&args);
        assert_eq!(r.to_json() + "\n", text, "{args:?}");
        assert_eq!(RunReport::from_json(&r.to_json()).unwrap(), r);
    }
}

#[test]
fn constants_report_both_steps() {
    let (r, _) =
        ok_report(&["constants", "--kind", "H", "--alpha", "2", "--lambda", "2", "--reps", "500", "--seed", "9"]);
    let Results::Constants { coarse, fine } = r.results else { panic!() };
    assert!((coarse.grid.step - 0.01).abs() < 1e-15);
    assert!((fine.grid.step - 0.005).abs() < 1e-15);
    assert_eq!(code(&["constants", "--kind", "X", "--alpha", "1"]), 3);
    assert_eq!(code(&["constants", "--kind", "H", "--alpha", "3"]), 3);
    assert_eq!(code(&["constants", "--kind", "H", "--alpha", "1", "--reps", "10"]), 3);
    assert_eq!(code(&["constants", "--kind", "P", "--alpha", "1", "--lambda1", "-1"]), 3);
}

#[test]
fn curve_csv_and_report() {
    let out = cpscan(&[
        "curve",
        "--kind",
        "p1",
        "--c",
        "1.5",
        "--d",
        "0.5",
        "--u-min",
        "1",
        "--u-max",
        "3",
        "--n-points",
        "5",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("u,analytic"));
    let vals: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(vals.len(), 5);
    for w in vals.windows(2) {
        assert!(w[1] < w[0]);
    }
    assert_eq!(
        code(&["curve", "--kind", "p1", "--c", "1.5", "--d", "0.5", "--u-min", "1", "--u-max", "3", "--n-points", "1"]),
        3
    );
    assert_eq!(code(&["curve", "--kind", "p1", "--c", "1.5", "--d", "0.5", "--u-min", "3", "--u-max", "1"]), 3);

    // rises then falls across the stationary point 1/√(2cd), with no warning
    let csv = temp_file("curve.csv", "");
    let rep = temp_file("curve.json", "");
    let out = cpscan(&[
        "curve",
        "--kind",
        "p1",
        "--c",
        "1.5",
        "--d",
        "0.5",
        "--u-min",
        "0.2",
        "--u-max",
        "2",
        "--n-points",
        "7",
        "--reps",
        "300",
        "--grid",
        "100",
        "--seed",
        "5",
        "--out",
        csv.to_str().unwrap(),
        "--report",
        rep.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("u,analytic,empirical,ci_low,ci_high\n"));
    let r = RunReport::from_json(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    let Results::Curve { rows } = &r.results else { panic!() };
    let a: Vec<f64> = rows.iter().map(|r| r.analytic).collect();
    let peak = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(a[0] < peak && *a.last().unwrap() < peak);
    assert!(!r.flags.iter().any(|f| f.contains("monoton")));
    assert!(rows.iter().all(|r| r.empirical.is_some()));
}
