//! Scenario execution and CSV output.
//!
//! Every file starts with `#` lines holding the resolved configuration,
//! followed by a header row. Numbers are written with 17 significant digits
//! so identical scenarios give identical bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::asymptotics::{outer_solution, InnerSolution, InterfaceSeries, OuterOrder, Regime};
use crate::diagnostics::{self, compare, log_space, CompareOptions};
use crate::error::Result;
use crate::model::{simulate, StopReason, Trajectory};
use crate::params::{nondimensionalize, DimParams, Scales};
use crate::scenario::{Pipeline, Scenario};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const ASYMPTOTIC_FILE: &str = "asymptotic.csv";
pub const INNER_FILE: &str = "inner.csv";
pub const COMPARISON_FILE: &str = "comparison.csv";

pub const TRAJECTORY_COLUMNS: [&str; 7] = [
    "t",
    "s_gw",
    "s_wi",
    "rho_g",
    "C_at_x1",
    "air_mass",
    "keller_residual",
];
pub const PROFILE_COLUMNS: [&str; 4] = ["phase", "x", "T", "C"];
pub const ASYMPTOTIC_COLUMNS: [&str; 10] = [
    "t",
    "tau",
    "s0",
    "s_wi_two_term",
    "s_gw_two_term",
    "s0_small",
    "s0_large",
    "G0",
    "G0_eps_G1",
    "gamma_inner",
];
pub const INNER_COLUMNS: [&str; 3] = ["tau", "t", "gamma_inner"];
pub const COMPARISON_COLUMNS: [&str; 4] = ["quantity", "metric", "value", "samples"];

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "NaN".into()
    }
}

pub fn profile_file_name(index: usize) -> String {
    format!("profile_{index:03}.csv")
}

struct Csv {
    text: String,
}

impl Csv {
    fn new(kind: &str, scenario: &Scenario, columns: &[&str], extra: &[String]) -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "# {kind}");
        let units = if scenario.dimensional {
            "dimensional (s, m, K, mol/m^3, kg/m^3)"
        } else {
            "dimensionless"
        };
        let _ = writeln!(text, "# units: {units}");
        for line in extra {
            let _ = writeln!(text, "# {line}");
        }
        for line in scenario.to_config_string().lines() {
            let _ = writeln!(text, "# {line}");
        }
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for c in cells {
            if !first {
                self.text.push(',');
            }
            self.text.push_str(c.as_ref());
            first = false;
        }
        self.text.push('\n');
    }

    fn nums(&mut self, values: &[f64]) {
        self.row(values.iter().map(|&v| fmt_num(v)));
    }

    fn write(self, dir: &Path, name: &str, files: &mut Vec<PathBuf>) -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, self.text)?;
        files.push(path);
        Ok(())
    }
}

/// Unit conversion applied on output.
#[derive(Clone, Copy)]
struct Units {
    scales: Option<Scales>,
}

impl Units {
    fn t(&self, v: f64) -> f64 {
        self.scales.map_or(v, |s| s.time(v))
    }
    fn x(&self, v: f64) -> f64 {
        self.scales.map_or(v, |s| s.position(v))
    }
    fn temp(&self, v: f64) -> f64 {
        self.scales.map_or(v, |s| s.temperature(v))
    }
    fn c(&self, v: f64) -> f64 {
        self.scales.map_or(v, |s| s.concentration(v))
    }
    fn rho(&self, v: f64) -> f64 {
        self.scales.map_or(v, |s| s.density(v))
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub name: String,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    /// `None` when the numeric pipeline did not run.
    pub stop: Option<StopReason>,
    /// Dimensionless melt time of the numeric run.
    pub melt_time: Option<f64>,
    /// Dimensionless melt time of the leading-order front.
    pub melt_time_series: f64,
    pub halt_reason: Option<String>,
    pub scales: Scales,
}

impl RunReport {
    pub fn halted(&self) -> bool {
        self.stop == Some(StopReason::Halted)
    }
}

/// Execute the requested pipelines and write their CSV files into
/// `out_dir`, creating it if needed. A halted integration still writes
/// everything computed up to the halt and is reported through
/// [`RunReport::stop`].
pub fn run(scenario: &Scenario, out_dir: &Path) -> Result<RunReport> {
    scenario.validate()?;
    let params = nondimensionalize(&scenario.physical, &scenario.initial)?;
    std::fs::create_dir_all(out_dir)?;
    let units = Units {
        scales: scenario.dimensional.then_some(params.scales),
    };
    let series = InterfaceSeries::new(&params);
    let mut report = RunReport {
        name: scenario.name.clone(),
        out_dir: out_dir.to_path_buf(),
        files: Vec::new(),
        stop: None,
        melt_time: None,
        melt_time_series: series.melt_time_leading(),
        halt_reason: None,
        scales: params.scales,
    };
    let wants = |p: Pipeline| scenario.pipelines.contains(&p);

    if wants(Pipeline::Asymptotic) {
        write_asymptotic(scenario, &params, units, out_dir, &mut report.files)?;
    }
    if wants(Pipeline::Numeric) || wants(Pipeline::Compare) {
        let mut config = scenario.sim_config();
        config.tstops.extend(scenario.profile_times.iter().copied());
        let traj = simulate(&params, &scenario.initial, &config)?;
        report.stop = Some(traj.stop);
        report.melt_time = traj.melt_time;
        report.halt_reason = traj.halt_reason.clone();
        if wants(Pipeline::Numeric) {
            write_trajectory(scenario, &traj, units, out_dir, &mut report.files)?;
            write_profiles(scenario, &traj, units, out_dir, &mut report.files)?;
        }
        if wants(Pipeline::Compare) {
            write_comparison(scenario, &traj, &series, out_dir, &mut report.files)?;
        }
    }
    Ok(report)
}

fn stop_line(traj: &Trajectory) -> String {
    match &traj.halt_reason {
        Some(why) => format!("stop: halted at t = {} ({why})", fmt_num(traj.t_end())),
        None => format!("stop: {} at t = {}", traj.stop, fmt_num(traj.t_end())),
    }
}

fn write_trajectory(
    scenario: &Scenario,
    traj: &Trajectory,
    u: Units,
    dir: &Path,
    files: &mut Vec<PathBuf>,
) -> Result<()> {
    let extra = [
        stop_line(traj),
        "air_mass and keller_residual are always dimensionless".to_string(),
    ];
    let mut csv = Csv::new("trajectory", scenario, &TRAJECTORY_COLUMNS, &extra);
    let end = traj.t_end();
    let mut times = vec![traj.t_start()];
    times.extend(scenario.sample_times().into_iter().filter(|&t| t <= end));
    if *times.last().unwrap() < end {
        times.push(end);
    }
    for t in times {
        let s = traj.state_at(t)?;
        let rho = traj.gas_density(&s)?;
        let mass = diagnostics::air_mass(&s, &traj.params, rho);
        let keller = diagnostics::keller_residual(traj, t).map_or(f64::NAN, |k| k.residual);
        csv.nums(&[
            u.t(t),
            u.x(s.s_gw()),
            u.x(s.s_wi()),
            u.rho(rho),
            u.c(traj.c_at_ice(&s)),
            mass,
            keller,
        ]);
    }
    csv.write(dir, TRAJECTORY_FILE, files)
}

fn write_profiles(
    scenario: &Scenario,
    traj: &Trajectory,
    u: Units,
    dir: &Path,
    files: &mut Vec<PathBuf>,
) -> Result<()> {
    let (start, end) = (traj.t_start(), traj.t_end());
    for (idx, &t) in scenario.profile_times.iter().enumerate() {
        if !(t >= start && t <= end) {
            log::warn!("profile time {t} outside the run [{start}, {end}], skipped");
            continue;
        }
        let extra = [format!("t = {}", fmt_num(u.t(t)))];
        let mut csv = Csv::new("profile", scenario, &PROFILE_COLUMNS, &extra);
        for row in traj.profile(t)? {
            csv.row([
                row.phase.name().to_string(),
                fmt_num(u.x(row.x)),
                fmt_num(u.temp(row.temperature)),
                row.concentration.map_or(String::new(), |c| fmt_num(u.c(c))),
            ]);
        }
        csv.write(dir, &profile_file_name(idx), files)?;
    }
    Ok(())
}

fn write_asymptotic(
    scenario: &Scenario,
    p: &DimParams,
    u: Units,
    dir: &Path,
    files: &mut Vec<PathBuf>,
) -> Result<()> {
    let series = InterfaceSeries::new(p);
    let c0_mean = scenario.initial.c0.mean();
    let inner = InnerSolution::from_params(
        p,
        &scenario.initial.c0,
        scenario.modes,
        scenario.gram_correction,
    )?;
    let t_melt = series
        .melt_time_two_term()
        .unwrap_or_else(|_| series.melt_time_leading());
    let extra = [format!(
        "melt time of the leading-order front: {}",
        fmt_num(u.t(series.melt_time_leading()))
    )];
    let mut csv = Csv::new("asymptotic", scenario, &ASYMPTOTIC_COLUMNS, &extra);
    for t in scenario.sample_times().into_iter().filter(|&t| t <= t_melt) {
        let pt = series.evaluate(t);
        let m = series.motion(t);
        let y = (m.s_wi - p.s_gw0) / p.delta_s();
        let tau = t / p.eps;
        csv.nums(&[
            u.t(t),
            tau,
            u.x(pt.s0),
            u.x(pt.s_wi),
            u.x(pt.s_gw),
            u.x(series.s0_expansion(t, Regime::Small)),
            u.x(series.s0_expansion(t, Regime::Large)),
            u.c(outer_solution(y, OuterOrder::Leading, p, &m, c0_mean)),
            u.c(outer_solution(y, OuterOrder::First, p, &m, c0_mean)),
            u.c(inner.eval(1.0, tau)),
        ]);
    }
    csv.write(dir, ASYMPTOTIC_FILE, files)?;

    let extra = [format!("gamma_inf = {}", fmt_num(u.c(inner.gamma_inf)))];
    let mut csv = Csv::new("inner", scenario, &INNER_COLUMNS, &extra);
    csv.nums(&[0.0, 0.0, u.c(inner.eval(1.0, 0.0))]);
    for tau in log_space(1e-3, 20.0, 120) {
        csv.nums(&[tau, u.t(tau * p.eps), u.c(inner.eval(1.0, tau))]);
    }
    csv.write(dir, INNER_FILE, files)
}

fn write_comparison(
    scenario: &Scenario,
    traj: &Trajectory,
    series: &InterfaceSeries,
    dir: &Path,
    files: &mut Vec<PathBuf>,
) -> Result<()> {
    let mut opts = CompareOptions::for_run(traj.t_end());
    opts.n_modes = scenario.modes;
    opts.gram_correction = scenario.gram_correction;
    let cmp = compare(traj, &scenario.initial.c0, &opts)?;
    let mut csv = Csv::new(
        "comparison",
        scenario,
        &COMPARISON_COLUMNS,
        &[stop_line(traj)],
    );
    for r in &cmp.rows {
        csv.row([
            r.quantity.clone(),
            r.metric.clone(),
            fmt_num(r.value),
            r.samples.to_string(),
        ]);
    }
    let drift = diagnostics::air_mass_drift(traj)?;
    csv.row([
        "air_mass".into(),
        "max_rel_drift".into(),
        fmt_num(drift),
        traj.solution.states.len().to_string(),
    ]);
    let scales = traj.params.scales;
    let mut value = |name: &str, v: f64| {
        csv.row([
            name.to_string(),
            "dimensionless".into(),
            fmt_num(v),
            "1".into(),
        ]);
        csv.row([
            name.to_string(),
            "seconds".into(),
            fmt_num(scales.time(v)),
            "1".into(),
        ]);
    };
    value("melt_time_numeric", traj.melt_time.unwrap_or(f64::NAN));
    value("melt_time_leading", series.melt_time_leading());
    value(
        "melt_time_two_term",
        series.melt_time_two_term().unwrap_or(f64::NAN),
    );
    csv.write(dir, COMPARISON_FILE, files)
}
