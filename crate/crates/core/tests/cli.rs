use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_timebin"))
        .arg("--config")
        .arg(&cfg)
        .args(extra)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn columns(line: &str) -> Vec<f64> {
    line.split(',').map(|x| x.parse().unwrap()).collect()
}

#[test]
fn collision_run_writes_series_and_summary() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), "experiment = collision\ndt = 0.01\nt_final = 1\nout_path = decay.csv\n", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = stdout(&out);
    assert!(summary.contains("rho_ee=0.367265"), "{summary}");
    assert!(summary.contains("analytic=0.367879"), "{summary}");
    assert!(summary.contains("abs_err=6.1e-4"), "{summary}");

    let csv = fs::read_to_string(dir.path().join("decay.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,rho_gg,rho_ee,re_rho_eg,im_rho_eg,trace,purity");
    assert_eq!(lines.len(), 102);
    let last = columns(lines[101]);
    assert!((last[0] - 1.0).abs() < 1e-12);
    assert!((last[2] - 0.1f64.cos().powi(200)).abs() < 1e-13);
    assert!((last[5] - 1.0).abs() < 1e-12);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let cfg = "experiment = collision\nsystem = tls-driven\ndt = 0.02\nt_final = 2\n";
    run(dir.path(), cfg, &["--out", "a.csv"]);
    run(dir.path(), cfg, &["--out", "b.csv"]);
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    let b = fs::read(dir.path().join("b.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn convergence_table() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), "experiment = convergence\ndt = 0.1\nt_final = 5\n", &["--out", "conv.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let csv = fs::read_to_string(dir.path().join("conv.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "dt,max_error");
    let dts: Vec<f64> = lines[1..5].iter().map(|l| columns(l)[0]).collect();
    assert!(dts.windows(2).all(|w| w[1] < w[0]));
    let order: f64 = lines[5].strip_prefix("# fitted_order = ").unwrap().parse().unwrap();
    assert!((order - 1.0).abs() <= 0.15);
}

#[test]
fn kraus_report_columns() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), "experiment = kraus-report\ndt = 0.04\n", &["--out", "k.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let csv = fs::read_to_string(dir.path().join("k.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "dt,r0,r1,r2,completeness_defect");
    assert_eq!(lines.len(), 5);
    for l in &lines[1..] {
        let c = columns(l);
        assert!(c[3] < 1e-13 && c[4] < 1e-12);
    }
}

#[test]
fn joint_chain_has_entanglement_columns() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("experiment = joint-chain\nn_max = 1\nn_bins = 12\ndt = {}\n", std::f64::consts::LN_2 / 6.0);
    let out = run(dir.path(), &cfg, &["--out", "chain.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("peak_entropy=0.69305"), "{}", stdout(&out));
    let csv = fs::read_to_string(dir.path().join("chain.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,rho_gg,rho_ee,re_rho_eg,im_rho_eg,trace,purity,entropy,markov_defect");
    assert_eq!(lines.len(), 14);
    assert!(lines[1..].iter().all(|l| columns(l)[8] <= 1e-10));
}

#[test]
fn microscopic_and_ordering_probe_pass() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), "experiment = microscopic\ndt = 0.05\nt_final = 2.5\n", &["--out", "m.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let out = run(dir.path(), "experiment = ordering-probe\nsystem = tls-driven\ndt = 0.1\n", &["--out", "o.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(fs::read_to_string(dir.path().join("o.csv")).unwrap().starts_with("dt,max_error\n"));
}

#[test]
fn dephasing_lindblad_run() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), "experiment = lindblad\nsystem = dephasing\n", &["--out", "d.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("|rho_eg|=0.303265"), "{}", stdout(&out));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(dir.path(), "experiment = warp\n", &[]).status.code(), Some(2));
    assert_eq!(run(dir.path(), "experiment = lindblad\ndt = -1\n", &[]).status.code(), Some(2));
    assert_eq!(run(dir.path(), "experiment = lindblad\ntypo = 1\n", &[]).status.code(), Some(2));

    // Too many bins for a dense joint state.
    let out = run(dir.path(), "experiment = joint-chain\nn_max = 2\nn_bins = 30\n", &[]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    // Running past the grid recurrence time.
    let out = run(dir.path(), "experiment = microscopic\nn_modes = 21\nhalf_width = 1\ndt = 1\nt_final = 70\n", &[]);
    assert_eq!(out.status.code(), Some(3));

    // A band this narrow cannot reproduce the flat-continuum rate.
    let out = run(dir.path(), "experiment = microscopic\nn_modes = 21\nhalf_width = 1\ndt = 0.05\nt_final = 2.5\n", &["--out", "bad.csv"]);
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));

    let missing = Command::new(env!("CARGO_BIN_EXE_timebin"))
        .args(["--config", "/nonexistent/run.cfg"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
}
