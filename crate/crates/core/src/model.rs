//! The semi-discrete three-phase system wired to the implicit integrator,
//! with melt and gas-collapse detection.

use crate::error::{Error, Result};
use crate::grid::{self, Phase, SimState};
use crate::integrator::{self, Event, OdeSystem, Solution, SolverOptions, SolverStats};
use crate::params::{DimParams, InitialConditions};

#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Cells per compartment.
    pub n: usize,
    /// Final dimensionless time if the ice has not melted by then.
    pub t_end: f64,
    pub rtol: f64,
    pub atol: f64,
    /// The melt event fires when `s_wi` comes within this distance of the
    /// domain end.
    pub melt_margin: f64,
    /// Smallest admissible gas column before the run is halted.
    pub collapse_margin: f64,
    /// Times the integrator must step onto exactly.
    pub tstops: Vec<f64>,
    pub max_steps: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 64,
            t_end: 10.0,
            rtol: 1e-8,
            atol: 1e-10,
            melt_margin: 1e-4,
            collapse_margin: 1e-6,
            tstops: Vec::new(),
            max_steps: 200_000,
        }
    }
}

pub const MELT_EVENT: &str = "melt";
pub const COLLAPSE_EVENT: &str = "gas_collapse";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Melted,
    GasCollapsed,
    EndTime,
    /// The integrator gave up; the steps accepted so far are kept.
    Halted,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::Melted => "melted",
            StopReason::GasCollapsed => "gas_collapse",
            StopReason::EndTime => "end_time",
            StopReason::Halted => "halted",
        })
    }
}

/// The 4N+1 ODE system.
pub struct FreeBoundaryModel {
    pub params: DimParams,
    pub n: usize,
    /// Conserved air budget `s_gw(0) + ∫C₀`.
    pub air_mass: f64,
}

impl FreeBoundaryModel {
    pub fn new(params: DimParams, initial: &SimState) -> Self {
        Self {
            air_mass: grid::initial_air_mass(initial, &params),
            n: initial.n(),
            params,
        }
    }
}

impl OdeSystem for FreeBoundaryModel {
    fn dim(&self) -> usize {
        SimState::dim(self.n)
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        grid::rhs_into(&self.params, self.n, self.air_mass, y, dy)
    }
}

/// A completed (or halted) run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: DimParams,
    pub n: usize,
    pub air_mass: f64,
    pub solution: Solution,
    pub stop: StopReason,
    /// Extrapolated time at which the front reaches the domain end.
    pub melt_time: Option<f64>,
    /// Integrator error message when `stop` is [`StopReason::Halted`].
    pub halt_reason: Option<String>,
}

impl Trajectory {
    pub fn t_start(&self) -> f64 {
        self.solution.t_start()
    }

    pub fn t_end(&self) -> f64 {
        self.solution.t_end()
    }

    pub fn stats(&self) -> SolverStats {
        self.solution.stats
    }

    pub fn state_at(&self, t: f64) -> Result<SimState> {
        SimState::from_vector(&self.solution.sample(t)?, &self.params, self.n)
    }

    pub fn s_wi(&self, t: f64) -> Result<f64> {
        Ok(self.solution.sample(t)?[4 * self.n])
    }

    pub fn gas_density(&self, state: &SimState) -> Result<f64> {
        grid::gas_density(state, &self.params, self.air_mass)
    }

    /// Concentration at the water-ice interface, `C(s_wi)`.
    pub fn c_at_ice(&self, state: &SimState) -> f64 {
        state.c[self.n - 1]
    }

    /// Snapshot of positions and fields for profile output.
    pub fn profile(&self, t: f64) -> Result<Vec<ProfileRow>> {
        let s = self.state_at(t)?;
        let g = &s.grid;
        let mut rows = Vec::with_capacity(3 * self.n);
        for (phase, values) in [
            (Phase::Gas, &s.tg),
            (Phase::Water, &s.tw),
            (Phase::Ice, &s.ti),
        ] {
            for (j, &temp) in values.iter().enumerate() {
                rows.push(ProfileRow {
                    phase,
                    x: g.x(phase, j),
                    temperature: temp,
                    concentration: (phase == Phase::Water).then(|| s.c[j]),
                });
            }
        }
        Ok(rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub phase: Phase,
    pub x: f64,
    pub temperature: f64,
    pub concentration: Option<f64>,
}

/// Run the full model from the given initial conditions until the ice has
/// melted, the gas column collapses, or `t_end` is reached.
pub fn simulate(
    params: &DimParams,
    ic: &InitialConditions,
    config: &SimConfig,
) -> Result<Trajectory> {
    if !(config.t_end > 0.0) {
        return Err(Error::InvalidParameter {
            name: "t_end",
            reason: format!("must be positive, got {}", config.t_end),
        });
    }
    if !(config.rtol > 0.0 && config.atol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tolerance",
            reason: "tolerances must be positive".into(),
        });
    }
    if !(config.melt_margin > 0.0 && config.melt_margin < 1.0 - ic.s_wi0) {
        return Err(Error::InvalidParameter {
            name: "melt_margin",
            reason: format!("{} outside (0, 1 - s_wi0)", config.melt_margin),
        });
    }
    let initial = SimState::initial(params, ic, config.n)?;
    let model = FreeBoundaryModel::new(*params, &initial);
    let n = config.n;
    let melt_at = 1.0 - config.melt_margin;
    let collapse = config.collapse_margin;
    let events = [
        Event::new(MELT_EVENT, true, move |_t, y: &[f64]| y[4 * n] - melt_at),
        Event::new(COLLAPSE_EVENT, true, move |_t, y: &[f64]| {
            collapse - params.s_gw_of(y[4 * n])
        }),
    ];
    let opts = SolverOptions {
        rtol: config.rtol,
        atol: config.atol,
        max_steps: config.max_steps,
        tstops: config.tstops.clone(),
        ..SolverOptions::default()
    };
    let (solution, failure) = integrator::integrate_partial(
        &model,
        0.0,
        &initial.to_vector(),
        config.t_end,
        &opts,
        &events,
    )?;
    let halt_reason = failure.map(|e| e.to_string());
    let (stop, melt_time) = match solution.events.last() {
        _ if halt_reason.is_some() => {
            log::error!(
                "integration halted at t = {:.6e}: {}",
                solution.t_end(),
                halt_reason.as_deref().unwrap_or_default()
            );
            (StopReason::Halted, None)
        }
        Some(hit) if hit.name == MELT_EVENT => {
            let speed = *solution.derivs.last().expect("event state").last().unwrap();
            let remaining = 1.0 - hit.y[4 * n];
            let extra = if speed > 0.0 { remaining / speed } else { 0.0 };
            (StopReason::Melted, Some(hit.t + extra))
        }
        Some(hit) if hit.name == COLLAPSE_EVENT => {
            log::warn!("gas column collapsed at t = {:.6e}", hit.t);
            (StopReason::GasCollapsed, None)
        }
        _ => (StopReason::EndTime, None),
    };
    log::info!(
        "run finished ({stop}) at t = {:.6e}: {} steps, {} rejected, {} jacobians",
        solution.t_end(),
        solution.stats.accepted,
        solution.stats.rejected,
        solution.stats.jacobians
    );
    Ok(Trajectory {
        params: *params,
        n,
        air_mass: model.air_mass,
        solution,
        stop,
        melt_time,
        halt_reason,
    })
}
