//! End-to-end tests of the `etk` binary.

use std::path::Path;
use std::process::{Command, Output};

fn etk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_etk"))
        .args(args)
        .env("ETK_THREADS", "2")
        .output()
        .expect("run etk")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

const HEADER: &str =
    "axis_name,tau_l_ps,e0_kjmol,lambda_kjmol,v_kjmol,temp_k,s_psinv,k_fwd_psinv,k_bwd_psinv,\
dg_kjmol,ds_kjmol_per_k,dh_kjmol,kappa,n_used,validity";

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn rates_sweep_has_exact_header_and_ordered_rows() {
    let out = etk(&[
        "rates",
        "--axis",
        "tau_l",
        "--log",
        "1e-3:100:60",
        "--e0",
        "-3",
        "--lambda",
        "3",
        "--v",
        "1",
        "--temp",
        "298",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), HEADER);
    let rows = rows(&text);
    assert_eq!(rows.len(), 60);
    let taus: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(taus.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(taus[0], 1e-3);
    assert_eq!(taus[59], 100.0);
    // The turnover maximum lies strictly inside the grid.
    let ks: Vec<f64> = rows.iter().map(|r| r[7].parse().unwrap()).collect();
    let imax = (0..ks.len())
        .max_by(|&a, &b| ks[a].total_cmp(&ks[b]))
        .unwrap();
    assert!(imax > 0 && imax < 59);
    for r in &rows {
        assert_eq!(r.len(), 15);
        assert_eq!(r[0], "tau_l");
        assert!(r[9].is_empty() && r[10].is_empty() && r[11].is_empty());
        assert_eq!(r[14], "ok");
    }
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let args = [
        "rates", "--axis", "e0", "--lin", "-6:0:13", "--tau-l", "10", "--v", "0.01",
    ];
    let one = Command::new(env!("CARGO_BIN_EXE_etk"))
        .args(args)
        .env("ETK_THREADS", "1")
        .output()
        .unwrap();
    let three = Command::new(env!("CARGO_BIN_EXE_etk"))
        .args(args)
        .env("ETK_THREADS", "3")
        .output()
        .unwrap();
    assert!(one.status.success() && three.status.success());
    assert_eq!(one.stdout, three.stdout);
}

#[test]
fn rows_are_self_describing() {
    let out = etk(&["rates", "--axis", "v", "--lin", "0.5:1.5:3", "--s", "0.25"]);
    assert!(out.status.success());
    let row = &rows(&stdout(&out))[1];
    let again = etk(&[
        "rates",
        "--axis",
        "s",
        "--lin",
        &format!("{}:1:2", row[6]),
        "--tau-l",
        &row[1],
        "--e0",
        &row[2],
        "--lambda",
        &row[3],
        "--v",
        &row[4],
        "--temp",
        &row[5],
    ]);
    assert!(again.status.success(), "{}", stderr(&again));
    let first = &rows(&stdout(&again))[0];
    assert_eq!(&first[1..9], &row[1..9]);
}

#[test]
fn empty_grid_is_a_usage_error() {
    let out = etk(&["rates", "--axis", "e0", "--lin", "-6:0:1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("COUNT"));
    assert!(stdout(&out).is_empty());
}

#[test]
fn flag_errors_exit_with_usage_code() {
    for args in [
        vec!["rates", "--axis", "e0"],
        vec!["rates", "--axis", "nonsense", "--lin", "0:1:3"],
        vec!["rates", "--axis", "tau_l", "--log", "0:1:3"],
        vec!["rates", "--axis", "e0", "--lin", "-1:1:3", "--log", "1:2:3"],
        vec!["rates", "--axis", "lambda", "--lin", "-1:1:3"],
        vec!["thermo", "--axis", "s", "--lin", "0:1:3"],
        vec!["verify", "--only", "nonsense"],
        vec!["frobnicate"],
    ] {
        let out = etk(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn numerical_failure_names_the_grid_point() {
    let out = etk(&[
        "rates",
        "--axis",
        "tau_l",
        "--log",
        "1e5:1e6:2",
        "--lambda",
        "30",
        "--rel-tol",
        "1e-14",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let err = stderr(&out);
    assert!(
        err.contains("tau_l=100000") && err.contains("lambda=30"),
        "{err}"
    );
}

#[test]
fn symmetric_thermo_row_has_no_free_energy() {
    let out = etk(&[
        "thermo",
        "--axis",
        "tau_l",
        "--log",
        "0.01:10:4",
        "--e0",
        "0",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    for r in rows(&stdout(&out)) {
        assert!(r[6].is_empty());
        let dg: f64 = r[9].parse().unwrap();
        assert!(dg.abs() < 1e-6, "{dg}");
    }
}

#[test]
fn two_axis_thermo_grid_with_gnuplot_script() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("surface.csv");
    let out = etk(&[
        "thermo",
        "--axis",
        "lambda",
        "--lin",
        "0.5:6:3",
        "--axis2",
        "tau_l",
        "--log2",
        "1e-3:100:4",
        "--output",
        csv.to_str().unwrap(),
        "--gnuplot",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows = rows(&text);
    assert_eq!(rows.len(), 12);
    assert_eq!(rows[0][0], "lambda:tau_l");
    // Outer loop over lambda, inner over tau_l.
    assert_eq!(rows[3][3], rows[0][3]);
    assert_ne!(rows[4][3], rows[0][3]);
    for r in &rows {
        let (dg, dh): (f64, f64) = (r[9].parse().unwrap(), r[11].parse().unwrap());
        assert!(dg < -3.0 && dh <= dg, "{r:?}");
    }
    let script = std::fs::read_to_string(dir.path().join("surface.gp")).unwrap();
    assert!(script.contains("'surface.csv'"));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(
        &cfg,
        "# weak coupling\naxis = e0\nlin = -6:0:3\nv = 0.01\ntau_l = 10\ntemp = 300\n",
    )
    .unwrap();
    let out = etk(&["rates", "--config", cfg.to_str().unwrap(), "--temp", "298"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = rows(&stdout(&out));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][0], "e0");
    assert_eq!(rows[0][4].parse::<f64>().unwrap(), 0.01);
    assert_eq!(rows[0][5].parse::<f64>().unwrap(), 298.0);

    std::fs::write(&cfg, "colour = blue\n").unwrap();
    let out = etk(&[
        "rates",
        "--config",
        cfg.to_str().unwrap(),
        "--axis",
        "e0",
        "--lin",
        "0:1:2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_single_criterion() {
    let out = etk(&["verify", "--only", "kappa"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("[PASS]  1 kappa"), "{text}");
    assert!(text.contains("16.47"));
}

#[test]
fn propagate_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let out = etk(&[
        "propagate",
        "--depth",
        "8",
        "--t-end",
        "0.5",
        "--sample-interval",
        "0.1",
        "--site",
        "acceptor",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(Path::new(&path)).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t_ps,p_a,p_b,trace_err"));
    let data: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(data.len(), 6);
    assert_eq!(data[0][1], 0.0);
    assert!(data[5][1] > 0.0);
    for row in &data {
        assert!((row[1] + row[2] - 1.0).abs() < 1e-10);
    }

    let out = etk(&["propagate", "--dt", "1"]);
    assert_eq!(out.status.code(), Some(2));
}
