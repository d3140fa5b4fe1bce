//! Conservation checks and numeric-versus-asymptotic comparisons.

use crate::asymptotics::{
    quasi_steady_temps, InnerSolution, InterfaceSeries, OuterOrder, DEFAULT_MODES,
};
use crate::error::{Error, Result};
use crate::grid::{self, one_sided_derivative, Phase, SimState};
use crate::model::Trajectory;
use crate::params::{DimParams, Profile};

/// `s_gw·ρ_g + ∫C`, the trapezoid sum using the closure values at both
/// interfaces.
pub fn air_mass(state: &SimState, params: &DimParams, rho_g: f64) -> f64 {
    let n = state.n();
    state.s_gw() * rho_g
        + grid::trapezoid(
            &state.c,
            state.grid.h_w,
            params.groups.henry * rho_g,
            state.c[n - 1],
        )
}

/// Air mass of the trajectory at time `t`.
pub fn air_mass_at(traj: &Trajectory, t: f64) -> Result<f64> {
    let s = traj.state_at(t)?;
    let rho = traj.gas_density(&s)?;
    Ok(air_mass(&s, &traj.params, rho))
}

/// Largest relative deviation of the air mass from its initial value over
/// all stored steps.
pub fn air_mass_drift(traj: &Trajectory) -> Result<f64> {
    let m0 = traj.air_mass;
    let mut worst: f64 = 0.0;
    for y in &traj.solution.states {
        let s = SimState::from_vector(y, &traj.params, traj.n)?;
        let rho = traj.gas_density(&s)?;
        worst = worst.max(((air_mass(&s, &traj.params, rho) - m0) / m0).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KellerResidual {
    pub residual: f64,
    /// Largest magnitude among the balanced terms, for normalization.
    pub scale: f64,
}

/// Balance of the gas column: the change of `ρ_g s_gw` against the fluxes
/// through the gas-water interface and the swept volumes.
pub fn keller_terms(
    state: &SimState,
    params: &DimParams,
    air_mass: f64,
    d_rho_sgw: f64,
) -> Result<KellerResidual> {
    let rates = grid::assemble_rhs(state, params, air_mass)?;
    let (c_gw, c_wi) = grid::concentration_interface_values(state, params, air_mass)?;
    let dcdx = one_sided_derivative(c_gw, state.c[0], state.c[1], state.grid.h_w, 1.0);
    let terms = [
        rates.s_gw * c_gw,
        -rates.s_wi * c_wi,
        params.kappa_c() * dcdx,
    ];
    let rhs: f64 = terms.iter().sum();
    let scale = terms
        .iter()
        .chain(std::iter::once(&d_rho_sgw))
        .fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(KellerResidual {
        residual: d_rho_sgw - rhs,
        scale,
    })
}

/// Residual at an interior time, with `d(ρ_g s_gw)/dt` by central
/// differencing of the dense output.
pub fn keller_residual(traj: &Trajectory, t: f64) -> Result<KellerResidual> {
    let (start, end) = (traj.t_start(), traj.t_end());
    let dt = 1e-4 * t.abs().max(1e-12);
    if !(t - dt >= start && t + dt <= end) {
        return Err(Error::OutOfRange { t, start, end });
    }
    let column = |tt: f64| -> Result<f64> {
        let s = traj.state_at(tt)?;
        Ok(traj.gas_density(&s)? * s.s_gw())
    };
    let d = (column(t + dt)? - column(t - dt)?) / (2.0 * dt);
    keller_terms(&traj.state_at(t)?, &traj.params, traj.air_mass, d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub quantity: String,
    pub metric: String,
    pub value: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn get(&self, quantity: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.quantity == quantity)
            .map(|r| r.value)
    }

    fn push(&mut self, quantity: &str, metric: &str, value: f64, samples: usize) {
        self.rows.push(ComparisonRow {
            quantity: quantity.into(),
            metric: metric.into(),
            value,
            samples,
        });
    }
}

#[derive(Debug, Clone)]
pub struct CompareOptions {
    /// Times for the front, temperature and outer comparisons.
    pub times: Vec<f64>,
    /// Fast times (τ = t/ε) for the inner comparison.
    pub taus: Vec<f64>,
    /// Temperatures are compared only after this time, once the initial
    /// transient has relaxed.
    pub quasi_steady_from: f64,
    /// The outer solution is compared only after this time.
    pub outer_from: f64,
    pub n_modes: usize,
    pub gram_correction: bool,
}

impl CompareOptions {
    /// Log-spaced defaults covering a run that ends at `t_end`.
    pub fn for_run(t_end: f64) -> Self {
        let first = 1e-3f64.min(1e-3 * t_end);
        Self {
            times: log_space(first, t_end.max(first), 120),
            taus: log_space(1e-2, 20.0, 80),
            quasi_steady_from: 1e-2,
            outer_from: 1e-2,
            n_modes: DEFAULT_MODES,
            gram_correction: false,
        }
    }
}

/// `count` log-spaced points from `a` to `b` inclusive.
pub fn log_space(a: f64, b: f64, count: usize) -> Vec<f64> {
    assert!(a > 0.0 && b >= a && count >= 2);
    let (la, lb) = (a.ln(), b.ln());
    (0..count)
        .map(|k| {
            if k == 0 {
                a
            } else if k + 1 == count {
                b
            } else {
                (la + (lb - la) * k as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// Tabulate error norms of every asymptotic approximation against the
/// trajectory. Sample times outside the trajectory are skipped.
pub fn compare(traj: &Trajectory, c0: &Profile, opts: &CompareOptions) -> Result<ComparisonReport> {
    let p = &traj.params;
    let series = InterfaceSeries::new(p);
    let (start, end) = (traj.t_start(), traj.t_end());
    let inside = |t: f64| t > start && t <= end;
    let mut report = ComparisonReport::default();

    let (mut two, mut one, mut count) = (0.0f64, 0.0f64, 0);
    let (mut temp_err, mut temp_count) = (0.0f64, 0);
    let (mut outer0, mut outer1, mut outer_count) = (0.0f64, 0.0f64, 0);
    let c0_mean = c0.mean();
    for &t in opts.times.iter().filter(|&&t| inside(t)) {
        let state = traj.state_at(t)?;
        let s_num = state.s_wi();
        let pt = series.evaluate(t);
        two = two.max(((pt.s_wi - s_num) / s_num).abs());
        one = one.max(((pt.s0 - s_num) / s_num).abs());
        count += 1;

        if t >= opts.quasi_steady_from {
            let qs = quasi_steady_temps(state.s_gw(), state.s_wi(), p)?;
            for (phase, values) in [
                (Phase::Gas, &state.tg),
                (Phase::Water, &state.tw),
                (Phase::Ice, &state.ti),
            ] {
                for (j, &v) in values.iter().enumerate() {
                    temp_err = temp_err.max((v - qs.eval(state.grid.x(phase, j))).abs());
                }
            }
            temp_count += 1;
        }
        if t >= opts.outer_from {
            let c_num = traj.c_at_ice(&state);
            let m = series.motion(t);
            let y = (m.s_wi - p.s_gw0) / p.delta_s();
            let g0 = crate::asymptotics::outer_solution(y, OuterOrder::Leading, p, &m, c0_mean);
            let g1 = crate::asymptotics::outer_solution(y, OuterOrder::First, p, &m, c0_mean);
            outer0 = outer0.max(((g0 - c_num) / c_num).abs());
            outer1 = outer1.max(((g1 - c_num) / c_num).abs());
            outer_count += 1;
        }
    }
    report.push("interface_two_term", "max_rel", two, count);
    report.push("interface_leading", "max_rel", one, count);
    report.push("temperature_quasi_steady", "max_abs", temp_err, temp_count);
    report.push("outer_leading", "max_rel", outer0, outer_count);
    report.push("outer_first", "max_rel", outer1, outer_count);

    let inner = InnerSolution::from_params(p, c0, opts.n_modes, opts.gram_correction)?;
    let (mut worst, mut samples) = (0.0f64, 0);
    for &tau in &opts.taus {
        let t = tau * p.eps;
        if !inside(t) {
            continue;
        }
        let c_num = traj.c_at_ice(&traj.state_at(t)?);
        worst = worst.max((inner.eval(1.0, tau) - c_num).abs());
        samples += 1;
    }
    report.push(
        "inner_at_ice",
        "max_abs_over_gamma_inf",
        worst / inner.gamma_inf,
        samples,
    );
    Ok(report)
}
