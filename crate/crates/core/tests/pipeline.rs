use std::fs;
use std::path::Path;

use triphase::output::{
    ASYMPTOTIC_COLUMNS, ASYMPTOTIC_FILE, COMPARISON_FILE, PROFILE_COLUMNS, TRAJECTORY_COLUMNS,
    TRAJECTORY_FILE,
};
use triphase::scenario::Cadence;
use triphase::{preset, run, Pipeline, Scenario, StopReason};

fn quick(name: &str) -> Scenario {
    let mut s = preset(name).unwrap();
    s.n = 16;
    s.samples = 40;
    s
}

/// Header row and numeric body of a CSV file, skipping `#` lines.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(rows: &[Vec<String>], k: usize) -> Vec<f64> {
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

#[test]
fn reruns_are_byte_identical() {
    let s = quick("base");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = run(&s, a.path()).unwrap();
    run(&s, b.path()).unwrap();
    assert!(ra.files.len() > 4);
    for f in &ra.files {
        let name = f.file_name().unwrap();
        assert_eq!(
            fs::read(f).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name:?}"
        );
    }
}

#[test]
fn csv_layout_and_audit_trail() {
    let s = quick("base");
    let dir = tempfile::tempdir().unwrap();
    let report = run(&s, dir.path()).unwrap();
    assert_eq!(report.stop, Some(StopReason::Melted));

    let (header, rows) = read_csv(&dir.path().join(TRAJECTORY_FILE));
    assert_eq!(header, TRAJECTORY_COLUMNS);
    assert!(rows.len() >= s.samples);
    let (s_gw, s_wi) = (column(&rows, 1), column(&rows, 2));
    assert!(s_gw.iter().zip(&s_wi).all(|(g, w)| g < w));
    let mass = column(&rows, 5);
    assert!(mass.iter().all(|m| (m - mass[0]).abs() < 1e-12));
    assert_eq!(rows[0][6], "NaN");

    let (header, _) = read_csv(&dir.path().join(ASYMPTOTIC_FILE));
    assert_eq!(header, ASYMPTOTIC_COLUMNS);

    let (header, rows) = read_csv(&dir.path().join("profile_000.csv"));
    assert_eq!(header, PROFILE_COLUMNS);
    assert_eq!(rows.len(), 3 * s.n);
    assert!(rows.iter().all(|r| (r[0] == "water") != r[3].is_empty()));

    // The comment block reproduces the scenario.
    let text = fs::read_to_string(dir.path().join(COMPARISON_FILE)).unwrap();
    let config: String = text
        .lines()
        .filter_map(|l| l.strip_prefix("# "))
        .filter(|l| l.contains(" = ") && !l.starts_with("stop"))
        .map(|l| format!("{l}\n"))
        .collect();
    let back = Scenario::from_config_str(&config).unwrap();
    assert_eq!(back.to_config_string(), s.to_config_string());

    // Every number carries 17 significant digits.
    let (_, rows) = read_csv(&dir.path().join(TRAJECTORY_FILE));
    let mantissa = rows[1][2].split('e').next().unwrap();
    assert_eq!(mantissa.trim_start_matches('-').replace('.', "").len(), 17);
}

#[test]
fn dimensional_output_uses_physical_units() {
    let mut s = quick("base");
    s.pipelines = vec![Pipeline::Numeric];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let report = run(&s, a.path()).unwrap();
    s.dimensional = true;
    run(&s, b.path()).unwrap();
    let (_, plain) = read_csv(&a.path().join(TRAJECTORY_FILE));
    let (_, dim) = read_csv(&b.path().join(TRAJECTORY_FILE));
    let sc = report.scales;
    let k = plain.len() / 2;
    let rel = |x: f64, y: f64| ((x - y) / y).abs();
    assert!(rel(column(&dim, 0)[k], sc.time(column(&plain, 0)[k])) < 1e-14);
    assert!(rel(column(&dim, 2)[k], sc.position(column(&plain, 2)[k])) < 1e-14);
    assert!(rel(column(&dim, 4)[k], sc.concentration(column(&plain, 4)[k])) < 1e-14);
    let (_, prof) = read_csv(&b.path().join("profile_000.csv"));
    // Kelvin, near the melting point.
    assert!(column(&prof, 2).iter().all(|t| (t - sc.t_c).abs() < 0.01));
}

#[test]
fn halted_run_keeps_partial_output() {
    let mut s = quick("base");
    s.max_steps = 400;
    let dir = tempfile::tempdir().unwrap();
    let report = run(&s, dir.path()).unwrap();
    assert!(report.halted());
    assert!(report.halt_reason.as_deref().unwrap().contains("400"));
    assert_eq!(report.melt_time, None);

    let text = fs::read_to_string(dir.path().join(TRAJECTORY_FILE)).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# stop: halted")));
    let (_, rows) = read_csv(&dir.path().join(TRAJECTORY_FILE));
    let t = column(&rows, 0);
    assert!(t.len() > 2);
    assert!(*t.last().unwrap() > 0.0 && *t.last().unwrap() < s.t_end);
    assert!(dir.path().join(COMPARISON_FILE).exists());
}

#[test]
fn supersaturated_concentration_relaxes() {
    let s = quick("supersaturated");
    let dir = tempfile::tempdir().unwrap();
    run(&s, dir.path()).unwrap();
    let (_, rows) = read_csv(&dir.path().join(TRAJECTORY_FILE));
    let c = column(&rows, 4);
    // Starts at the initial 0.055 and falls toward the steady value.
    assert!((c[0] - 0.055).abs() < 1e-12);
    let steady = 0.027325;
    let later: Vec<f64> = c.iter().copied().skip(1).collect();
    // A ripple of a few parts in 1e6 where the plateau meets the slow decay.
    assert!(later.windows(2).all(|w| w[1] <= w[0] + 1e-5 * steady));
    assert!(later.iter().all(|&v| v > 0.0 && v <= 0.055));
    assert!(later.iter().any(|&v| (v - steady).abs() < 0.01 * steady));
}

#[test]
fn linear_cadence_and_asymptotic_only() {
    let mut s = quick("hot");
    s.pipelines = vec![Pipeline::Asymptotic];
    s.cadence = Cadence::Linear;
    s.samples = 10;
    let dir = tempfile::tempdir().unwrap();
    let report = run(&s, dir.path()).unwrap();
    assert_eq!(report.stop, None);
    assert!(!dir.path().join(TRAJECTORY_FILE).exists());
    let (_, rows) = read_csv(&dir.path().join(ASYMPTOTIC_FILE));
    let t = column(&rows, 0);
    assert!(t.windows(2).all(|w| (w[1] - w[0] - 1.0).abs() < 1e-12));
}
