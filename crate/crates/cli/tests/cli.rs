use std::fs;
use std::process::{Command, Output};

fn vic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vic")).args(args).output().expect("failed to run vic")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn probe_scan_header_echoes_parameters() {
    let o = vic(&["probe-scan", "--preset", "fig2a", "--points", "11", "--set", "theta_deg=20"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = stdout(&o);
    let first = csv.lines().next().unwrap();
    assert_eq!(
        first,
        "# gamma1=1 gamma2=1 theta_deg=20 eta0=1 big_g=10 small_g=0.01 w12=-10 delta2=0 delta1=0 units=gamma1"
    );
    assert!(csv.lines().any(|l| l == "delta1,alpha_over_alpha0"));
    assert_eq!(data_rows(&csv).len(), 11);
}

#[test]
fn probe_scan_shows_gain_only_with_interference() {
    let o = vic(&["probe-scan", "--preset", "fig2a", "--points", "201", "--compare-no-vic"]);
    assert!(o.status.success());
    let rows = data_rows(&stdout(&o));
    let min_vic = rows.iter().map(|r| r[1]).fold(f64::INFINITY, f64::min);
    let min_off = rows.iter().map(|r| r[2]).fold(f64::INFINITY, f64::min);
    assert!(min_vic < -0.2);
    assert!(min_off > 0.0);
}

#[test]
fn parallel_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("serial.csv");
    let b = dir.path().join("parallel.csv");
    for (path, jobs) in [(&a, "1"), (&b, "3")] {
        let o = vic(&[
            "probe-scan", "--preset", "fig3dashdot", "--points", "120", "--compare-no-vic", "--jobs", jobs,
            "--out", path.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn pump_scan_quasi_trapping() {
    let o = vic(&["pump-scan", "--preset", "fig4b", "--from", "-60", "--to", "60", "--points", "121"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    assert!(csv.lines().next().unwrap().ends_with("units=gamma2"));
    let rows = data_rows(&csv);
    let centre = rows.iter().find(|r| r[0] == 0.0).unwrap();
    assert!(centre[3] > 0.9);
    assert!(rows[0][1] > rows[60][1]);
}

#[test]
fn config_file_overrides_preset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# interference off\neta0 = 0\ngamma1 = 10 # faster decay\n").unwrap();
    let o = vic(&["pump-scan", "--preset", "fig6", "--config", cfg.to_str().unwrap(), "--points", "3"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    assert!(csv.starts_with("# gamma1=10 gamma2=1 theta_deg=15 eta0=0 big_g=20"));
    let rows = data_rows(&csv);
    assert!(rows[1][4].abs() < 1e-8);
}

#[test]
fn evolve_full_and_secular() {
    let full = vic(&["evolve", "--preset", "fig5", "--t-end", "20", "--points", "21"]);
    let sec = vic(&["evolve", "--preset", "fig5", "--t-end", "20", "--points", "21", "--secular"]);
    assert!(full.status.success() && sec.status.success());
    let (full, sec) = (data_rows(&stdout(&full)), data_rows(&stdout(&sec)));
    assert_eq!(full.len(), 21);
    assert_eq!(full[0].len(), 7);
    assert_eq!(sec[0].len(), 4);
    for (f, s) in full.iter().zip(&sec) {
        assert!((f[1] - s[1]).abs() < 0.05);
    }
    assert!(full[20][1] > 0.5);
}

#[test]
fn usage_errors_exit_with_2() {
    for args in [
        vec!["probe-scan", "--from", "5", "--to", "5"],
        vec!["probe-scan", "--from", "5", "--to", "-5"],
        vec!["probe-scan", "--points", "1"],
        vec!["evolve", "--t-end", "0"],
        vec!["evolve", "--t-end", "-3"],
        vec!["probe-scan", "--set", "nonsense=1"],
        vec!["probe-scan", "--set", "gamma1=-1"],
        vec!["probe-scan", "--set", "eta0=0.5"],
        vec!["probe-scan", "--preset", "fig9"],
        vec!["probe-scan", "--config", "/nonexistent/vic.conf"],
        vec!["evolve", "--secular", "--set", "delta2=1"],
        vec!["frobnicate"],
    ] {
        let o = vic(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn bad_config_line_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "gamma1 = 1\ngamma2 = fast\n").unwrap();
    let o = vic(&["pump-scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn solver_failure_exits_with_1() {
    // without a pump the dressed basis is undefined
    let o = vic(&["pump-scan", "--set", "big_g=0", "--set", "w12=0", "--points", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("delta2"));
}

#[test]
fn analytic_check_passes_by_default() {
    let o = vic(&["analytic-check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("all checks passed"));
}

#[test]
fn analytic_check_detects_perturbed_constant() {
    let o = vic(&["analytic-check", "--preset", "fig6", "--perturb-closed-form", "1e-3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL  pump closed form vs steady state"));
}

#[test]
fn analytic_check_without_interference_is_noted() {
    let o = vic(&["analytic-check", "--preset", "fig4a"]);
    assert_eq!(o.status.code(), Some(0));
    let report = stdout(&o);
    assert!(report.contains("note: eta0 = 0"));
    assert!(!report.contains("pump closed form"));
}
