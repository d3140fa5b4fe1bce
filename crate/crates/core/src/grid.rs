//! Moving cell-centered grids and the semi-discrete right-hand side.
//!
//! Each compartment carries `n` equally spaced cells whose end points track
//! the interfaces. The unknown vector is laid out as
//! `[T_g (n), T_w (n), T_i (n), C (n), s_wi]`; the gas-water interface is
//! never integrated but reconstructed from `s_wi` through the kinematic
//! relation, so the two interfaces cannot drift apart.

use crate::error::{Error, Result};
use crate::params::{DimParams, InitialConditions};

/// Smallest number of cells per compartment supported by the interface
/// stencils.
pub const MIN_CELLS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Gas,
    Water,
    Ice,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Gas => "gas",
            Phase::Water => "water",
            Phase::Ice => "ice",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovingGrid {
    pub n: usize,
    pub s_gw: f64,
    pub s_wi: f64,
    pub h_g: f64,
    pub h_w: f64,
    pub h_i: f64,
}

impl MovingGrid {
    pub fn new(n: usize, s_gw: f64, s_wi: f64) -> Result<Self> {
        if n < MIN_CELLS {
            return Err(Error::InvalidParameter {
                name: "N",
                reason: format!("need at least {MIN_CELLS} cells per compartment, got {n}"),
            });
        }
        if !(s_gw > 0.0) {
            return Err(Error::GasCollapse { s_gw });
        }
        if !(s_gw < s_wi && s_wi < 1.0) {
            return Err(Error::InterfaceOrder { s_gw, s_wi });
        }
        let nf = n as f64;
        Ok(Self {
            n,
            s_gw,
            s_wi,
            h_g: s_gw / nf,
            h_w: (s_wi - s_gw) / nf,
            h_i: (1.0 - s_wi) / nf,
        })
    }

    /// Fraction `(j + 1/2)/n` locating cell `j` (zero based) inside its
    /// compartment.
    #[inline]
    fn frac(&self, j: usize) -> f64 {
        (j as f64 + 0.5) / self.n as f64
    }

    pub fn x(&self, phase: Phase, j: usize) -> f64 {
        let f = self.frac(j);
        match phase {
            Phase::Gas => f * self.s_gw,
            Phase::Water => self.s_gw + f * (self.s_wi - self.s_gw),
            Phase::Ice => self.s_wi + f * (1.0 - self.s_wi),
        }
    }

    pub fn centers(&self, phase: Phase) -> Vec<f64> {
        (0..self.n).map(|j| self.x(phase, j)).collect()
    }

    pub fn spacing(&self, phase: Phase) -> f64 {
        match phase {
            Phase::Gas => self.h_g,
            Phase::Water => self.h_w,
            Phase::Ice => self.h_i,
        }
    }

    /// Velocity of cell center `j` obtained by differentiating the grid map
    /// in time; linear in the interface velocities.
    pub fn mesh_velocity(&self, phase: Phase, j: usize, ds_gw: f64, ds_wi: f64) -> f64 {
        let f = self.frac(j);
        match phase {
            Phase::Gas => f * ds_gw,
            Phase::Water => ds_gw + f * (ds_wi - ds_gw),
            Phase::Ice => ds_wi * (1.0 - f),
        }
    }
}

/// Cell values of one snapshot of the semi-discrete system.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub grid: MovingGrid,
    pub tg: Vec<f64>,
    pub tw: Vec<f64>,
    pub ti: Vec<f64>,
    pub c: Vec<f64>,
}

impl SimState {
    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn s_wi(&self) -> f64 {
        self.grid.s_wi
    }

    pub fn s_gw(&self) -> f64 {
        self.grid.s_gw
    }

    pub fn dim(n: usize) -> usize {
        4 * n + 1
    }

    pub fn from_vector(y: &[f64], params: &DimParams, n: usize) -> Result<Self> {
        assert_eq!(y.len(), Self::dim(n), "state vector length");
        let s_wi = y[4 * n];
        let grid = MovingGrid::new(n, params.s_gw_of(s_wi), s_wi)?;
        Ok(Self {
            grid,
            tg: y[..n].to_vec(),
            tw: y[n..2 * n].to_vec(),
            ti: y[2 * n..3 * n].to_vec(),
            c: y[3 * n..4 * n].to_vec(),
        })
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(Self::dim(self.n()));
        y.extend_from_slice(&self.tg);
        y.extend_from_slice(&self.tw);
        y.extend_from_slice(&self.ti);
        y.extend_from_slice(&self.c);
        y.push(self.grid.s_wi);
        y
    }

    /// Sample the initial profiles at the cell centers of the initial grid.
    pub fn initial(params: &DimParams, ic: &InitialConditions, n: usize) -> Result<Self> {
        ic.validate()?;
        let grid = MovingGrid::new(n, ic.s_gw0, ic.s_wi0)?;
        let y = |j: usize| (j as f64 + 0.5) / n as f64;
        let t2 = params.groups.t2_tilde;
        Ok(Self {
            grid,
            tg: (0..n).map(|j| ic.tg0.eval(y(j))).collect(),
            tw: (0..n).map(|j| ic.tw0.eval(y(j))).collect(),
            ti: (0..n)
                .map(|j| ic.ti0.as_ref().map_or(t2, |p| p.eval(y(j))))
                .collect(),
            c: (0..n).map(|j| ic.c0.eval(y(j))).collect(),
        })
    }
}

/// Fictitious value imposing a Dirichlet value through the average of the
/// ghost and the first interior cell.
#[inline]
pub fn ghost_dirichlet(boundary_value: f64, first_cell_value: f64) -> f64 {
    2.0 * boundary_value - first_cell_value
}

/// Fictitious value beyond the ice end for the convective (Robin) condition
/// `−∂T/∂x = Bi (T − T̃₂)`.
#[inline]
pub fn ghost_robin(last_cell_value: f64, h_i: f64, bi: f64, t2_tilde: f64) -> f64 {
    let hb = h_i * bi;
    ((2.0 - hb) * last_cell_value + 2.0 * hb * t2_tilde) / (2.0 + hb)
}

/// Ghost pair at the gas-water interface: continuity of the averaged value
/// and of the flux `∂T_g/∂x = η ∂T_w/∂x`, solved together.
///
/// Returns `(gas ghost beyond s_gw, water ghost before s_gw)`.
pub fn gas_water_ghosts(tg_last: f64, tw_first: f64, h_g: f64, h_w: f64, eta: f64) -> (f64, f64) {
    // [ 1      -1     ] [g]   [ tw - tg              ]
    // [ 1/h_g  eta/h_w] [w] = [ tg/h_g + eta*tw/h_w  ]
    let (a11, a12, a21, a22) = (1.0, -1.0, 1.0 / h_g, eta / h_w);
    let r1 = tw_first - tg_last;
    let r2 = tg_last / h_g + eta * tw_first / h_w;
    let det = a11 * a22 - a12 * a21;
    assert!(det.abs() > 0.0, "singular gas-water closure");
    ((r1 * a22 - a12 * r2) / det, (a11 * r2 - a21 * r1) / det)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceGhosts {
    /// Gas temperature ghost just beyond s_gw.
    pub gas_at_gw: f64,
    /// Water temperature ghost just before s_gw.
    pub water_at_gw: f64,
    /// Water temperature ghost just beyond s_wi.
    pub water_at_wi: f64,
    /// Ice temperature ghost just before s_wi.
    pub ice_at_wi: f64,
}

pub fn interface_ghosts(state: &SimState, params: &DimParams) -> InterfaceGhosts {
    let n = state.n();
    let g = &state.grid;
    let (gas_at_gw, water_at_gw) = gas_water_ghosts(
        state.tg[n - 1],
        state.tw[0],
        g.h_g,
        g.h_w,
        params.groups.eta,
    );
    InterfaceGhosts {
        gas_at_gw,
        water_at_gw,
        water_at_wi: ghost_dirichlet(0.0, state.tw[n - 1]),
        ice_at_wi: ghost_dirichlet(0.0, state.ti[0]),
    }
}

/// Trapezoid rule over `[s_gw, s_wi]` using the cell values plus the two
/// interface values, with half cells at either end.
pub fn trapezoid(c: &[f64], h: f64, left_value: f64, right_value: f64) -> f64 {
    let n = c.len();
    let mut sum = 0.25 * h * (left_value + c[0]) + 0.25 * h * (c[n - 1] + right_value);
    for j in 0..n - 1 {
        sum += 0.5 * h * (c[j] + c[j + 1]);
    }
    sum
}

/// Gas density from the air budget. The Henry value `H·ρ_g` is also the
/// left end point of the trapezoid sum, so the density is found from a
/// scalar linear equation rather than by lagging.
fn density_from_cells(c: &[f64], grid: &MovingGrid, henry: f64, air_mass: f64) -> f64 {
    let h = grid.h_w;
    let rest = trapezoid(c, h, 0.0, c[c.len() - 1]);
    (air_mass - rest) / (grid.s_gw + 0.25 * h * henry)
}

/// Dimensionless gas density. `air_mass` is the conserved total
/// `s_gw(0) + ∫C₀` (see [`initial_air_mass`]).
pub fn gas_density(state: &SimState, params: &DimParams, air_mass: f64) -> Result<f64> {
    if !(state.s_gw() > 0.0) {
        return Err(Error::GasCollapse { s_gw: state.s_gw() });
    }
    Ok(density_from_cells(
        &state.c,
        &state.grid,
        params.groups.henry,
        air_mass,
    ))
}

/// Total air `s_gw(0)·1 + ∫C₀` at the initial grid, with the Henry value at
/// unit density as the left end point so that ρ_g(0) = 1 exactly.
pub fn initial_air_mass(initial: &SimState, params: &DimParams) -> f64 {
    let n = initial.n();
    let h = initial.grid.h_w;
    initial.s_gw() + trapezoid(&initial.c, h, params.groups.henry, initial.c[n - 1])
}

/// Interface values of the concentration implied by the ghost closures.
pub fn concentration_interface_values(
    state: &SimState,
    params: &DimParams,
    air_mass: f64,
) -> Result<(f64, f64)> {
    let rho = gas_density(state, params, air_mass)?;
    Ok((params.groups.henry * rho, state.c[state.n() - 1]))
}

/// Second-order one-sided derivative at a boundary point `x_b` from the
/// boundary value and the first two cell values at distances h/2 and 3h/2.
/// `direction` is +1 when the cells lie to the right of the boundary.
#[inline]
pub fn one_sided_derivative(boundary: f64, first: f64, second: f64, h: f64, direction: f64) -> f64 {
    direction * (-8.0 * boundary + 9.0 * first - second) / (3.0 * h)
}

/// Interface velocities from the Stefan condition and the kinematic relation.
pub fn interface_velocities(state: &SimState, params: &DimParams) -> (f64, f64) {
    stefan(&state.tw, &state.ti, &state.grid, params)
}

fn stefan(tw: &[f64], ti: &[f64], grid: &MovingGrid, params: &DimParams) -> (f64, f64) {
    let n = grid.n;
    let dtw = one_sided_derivative(0.0, tw[n - 1], tw[n - 2], grid.h_w, -1.0);
    let dti = one_sided_derivative(0.0, ti[0], ti[1], grid.h_i, 1.0);
    let ds_wi = params.groups.psi * dti - dtw;
    (params.a2 * ds_wi, ds_wi)
}

/// The per-field part of the discretization, `κ D₂f + u D₁f` on one
/// compartment with given ghost values and mesh velocities.
fn advance_field(
    f: &[f64],
    left_ghost: f64,
    right_ghost: f64,
    h: f64,
    kappa: f64,
    velocity: impl Fn(usize) -> f64,
    out: &mut [f64],
) {
    let n = f.len();
    let inv_h2 = kappa / (h * h);
    let inv_2h = 0.5 / h;
    for j in 0..n {
        let left = if j == 0 { left_ghost } else { f[j - 1] };
        let right = if j + 1 == n { right_ghost } else { f[j + 1] };
        out[j] = inv_h2 * (right - 2.0 * f[j] + left) + velocity(j) * (right - left) * inv_2h;
    }
}

/// Right-hand side of the full 4N+1 system on raw slices.
pub fn rhs_into(
    params: &DimParams,
    n: usize,
    air_mass: f64,
    y: &[f64],
    dy: &mut [f64],
) -> Result<()> {
    let s_wi = y[4 * n];
    if !s_wi.is_finite() {
        return Err(Error::NonFinite {
            field: "s_wi",
            index: 0,
        });
    }
    let grid = MovingGrid::new(n, params.s_gw_of(s_wi), s_wi)?;
    let (ds_gw, ds_wi) = stefan(&y[n..2 * n], &y[2 * n..3 * n], &grid, params);
    field_rhs(params, &grid, air_mass, y, ds_gw, ds_wi, dy);
    dy[4 * n] = ds_wi;
    check_finite(dy, n)
}

/// Field equations with prescribed interface velocities. Passing zeros gives
/// the operator on frozen interfaces.
pub fn field_rhs(
    params: &DimParams,
    grid: &MovingGrid,
    air_mass: f64,
    y: &[f64],
    ds_gw: f64,
    ds_wi: f64,
    dy: &mut [f64],
) {
    let n = grid.n;
    let g = &params.groups;
    let (tg, rest) = y.split_at(n);
    let (tw, rest) = rest.split_at(n);
    let (ti, rest) = rest.split_at(n);
    let c = &rest[..n];
    let (dtg, rest) = dy.split_at_mut(n);
    let (dtw, rest) = rest.split_at_mut(n);
    let (dti, rest) = rest.split_at_mut(n);
    let dc = &mut rest[..n];

    let (gas_ghost, water_ghost) = gas_water_ghosts(tg[n - 1], tw[0], grid.h_g, grid.h_w, g.eta);
    let rho = density_from_cells(c, grid, g.henry, air_mass);

    advance_field(
        tg,
        ghost_dirichlet(1.0, tg[0]),
        gas_ghost,
        grid.h_g,
        g.beta_g,
        |j| grid.mesh_velocity(Phase::Gas, j, ds_gw, ds_wi),
        dtg,
    );
    // Water moves with the gas-water interface, hence the extra −ṡ_gw.
    advance_field(
        tw,
        water_ghost,
        ghost_dirichlet(0.0, tw[n - 1]),
        grid.h_w,
        g.beta_w,
        |j| grid.mesh_velocity(Phase::Water, j, ds_gw, ds_wi) - ds_gw,
        dtw,
    );
    advance_field(
        ti,
        ghost_dirichlet(0.0, ti[0]),
        ghost_robin(ti[n - 1], grid.h_i, g.bi, g.t2_tilde),
        grid.h_i,
        g.beta_i,
        |j| grid.mesh_velocity(Phase::Ice, j, ds_gw, ds_wi),
        dti,
    );
    advance_field(
        c,
        ghost_dirichlet(g.henry * rho, c[0]),
        c[n - 1],
        grid.h_w,
        params.kappa_c(),
        |j| grid.mesh_velocity(Phase::Water, j, ds_gw, ds_wi),
        dc,
    );
}

fn check_finite(dy: &[f64], n: usize) -> Result<()> {
    const FIELDS: [&str; 5] = ["T_g", "T_w", "T_i", "C", "s_wi"];
    match dy.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(k) => Err(Error::NonFinite {
            field: FIELDS[(k / n).min(4)],
            index: k % n,
        }),
    }
}

/// Time derivatives of every unknown, shaped like the state.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    pub tg: Vec<f64>,
    pub tw: Vec<f64>,
    pub ti: Vec<f64>,
    pub c: Vec<f64>,
    pub s_wi: f64,
    pub s_gw: f64,
}

pub fn assemble_rhs(state: &SimState, params: &DimParams, air_mass: f64) -> Result<Rates> {
    let n = state.n();
    let y = state.to_vector();
    let mut dy = vec![0.0; y.len()];
    rhs_into(params, n, air_mass, &y, &mut dy)?;
    Ok(Rates {
        tg: dy[..n].to_vec(),
        tw: dy[n..2 * n].to_vec(),
        ti: dy[2 * n..3 * n].to_vec(),
        c: dy[3 * n..4 * n].to_vec(),
        s_wi: dy[4 * n],
        s_gw: params.a2 * dy[4 * n],
    })
}
