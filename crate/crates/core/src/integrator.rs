//! Adaptive L-stable singly diagonally implicit Runge-Kutta integrator
//! (five stages, order 4 with an embedded order-3 estimate, γ = 1/4).
//!
//! Stage equations are solved by simplified Newton iteration with a
//! finite-difference Jacobian that is kept across steps until convergence
//! degrades. Accepted steps are stored with their derivatives so the
//! trajectory can be sampled anywhere by cubic Hermite interpolation.

use nalgebra::{DMatrix, DVector, LU};

use crate::error::{Error, Result};

pub const GAMMA: f64 = 0.25;
pub const STAGES: usize = 5;
pub const C: [f64; STAGES] = [0.25, 0.75, 11.0 / 20.0, 0.5, 1.0];
pub const A: [[f64; STAGES]; STAGES] = [
    [0.25, 0.0, 0.0, 0.0, 0.0],
    [0.5, 0.25, 0.0, 0.0, 0.0],
    [17.0 / 50.0, -1.0 / 25.0, 0.25, 0.0, 0.0],
    [371.0 / 1360.0, -137.0 / 2720.0, 15.0 / 544.0, 0.25, 0.0],
    [25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 0.25],
];
/// Weights of the propagated solution; equal to the last row of `A`.
pub const B: [f64; STAGES] = A[4];
/// Weights of the embedded order-3 solution.
pub const B_HAT: [f64; STAGES] = [59.0 / 48.0, -17.0 / 96.0, 225.0 / 32.0, -85.0 / 12.0, 0.0];

pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

/// Scalar event function; an event fires when it crosses from negative to
/// non-negative.
pub struct Event<'a> {
    pub name: String,
    pub terminal: bool,
    pub g: Box<dyn Fn(f64, &[f64]) -> f64 + 'a>,
}

impl<'a> Event<'a> {
    pub fn new(name: &str, terminal: bool, g: impl Fn(f64, &[f64]) -> f64 + 'a) -> Self {
        Self {
            name: name.to_string(),
            terminal,
            g: Box::new(g),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventHit {
    pub name: String,
    pub t: f64,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_initial: f64,
    pub h_max: f64,
    pub max_steps: usize,
    /// Times the integrator must land on exactly.
    pub tstops: Vec<f64>,
    /// Scaled-norm target for the Newton corrections.
    pub newton_tol: f64,
    pub max_newton_iter: usize,
    /// Event localization tolerance in time.
    pub event_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            h_initial: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 200_000,
            tstops: Vec::new(),
            newton_tol: 1e-2,
            max_newton_iter: 8,
            event_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub jacobians: usize,
    pub factorizations: usize,
    pub newton_failures: usize,
}

/// Accepted steps of an integration, with derivatives for interpolation.
#[derive(Debug, Clone)]
pub struct Solution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub derivs: Vec<Vec<f64>>,
    pub events: Vec<EventHit>,
    pub stats: SolverStats,
}

impl Solution {
    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("non-empty solution")
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("non-empty solution")
    }

    /// State at `t` by cubic Hermite interpolation between stored steps.
    pub fn sample(&self, t: f64) -> Result<Vec<f64>> {
        let (start, end) = (self.t_start(), self.t_end());
        if !(t >= start && t <= end) {
            return Err(Error::OutOfRange { t, start, end });
        }
        let k = match self.times.partition_point(|&s| s <= t) {
            0 => 0,
            p if p >= self.times.len() => self.times.len() - 1,
            p => p - 1,
        };
        if k + 1 == self.times.len() || self.times[k] == t {
            return Ok(self.states[k].clone());
        }
        Ok(hermite(
            self.times[k],
            self.times[k + 1],
            &self.states[k],
            &self.states[k + 1],
            &self.derivs[k],
            &self.derivs[k + 1],
            t,
        ))
    }

    /// Time derivative of the interpolant at `t`.
    pub fn sample_derivative(&self, t: f64) -> Result<Vec<f64>> {
        let (start, end) = (self.t_start(), self.t_end());
        if !(t >= start && t <= end) {
            return Err(Error::OutOfRange { t, start, end });
        }
        let p = self.times.partition_point(|&s| s <= t);
        let k = p.saturating_sub(1).min(self.times.len().saturating_sub(2));
        if self.times.len() < 2 {
            return Ok(self.derivs[0].clone());
        }
        Ok(hermite_derivative(
            self.times[k],
            self.times[k + 1],
            &self.states[k],
            &self.states[k + 1],
            &self.derivs[k],
            &self.derivs[k + 1],
            t,
        ))
    }
}

fn hermite(t0: f64, t1: f64, y0: &[f64], y1: &[f64], f0: &[f64], f1: &[f64], t: f64) -> Vec<f64> {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    (0..y0.len())
        .map(|i| h00 * y0[i] + h * h10 * f0[i] + h01 * y1[i] + h * h11 * f1[i])
        .collect()
}

fn hermite_derivative(
    t0: f64,
    t1: f64,
    y0: &[f64],
    y1: &[f64],
    f0: &[f64],
    f1: &[f64],
    t: f64,
) -> Vec<f64> {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let d00 = 6.0 * s * (s - 1.0) / h;
    let d10 = (1.0 - s) * (1.0 - 3.0 * s);
    let d01 = -d00;
    let d11 = s * (3.0 * s - 2.0);
    (0..y0.len())
        .map(|i| d00 * y0[i] + d10 * f0[i] + d01 * y1[i] + d11 * f1[i])
        .collect()
}

struct Workspace<'s, S: OdeSystem + ?Sized> {
    sys: &'s S,
    opts: &'s SolverOptions,
    stats: SolverStats,
    jac: Option<DMatrix<f64>>,
    lu: Option<(f64, LU<f64, nalgebra::Dyn, nalgebra::Dyn>)>,
}

impl<'s, S: OdeSystem + ?Sized> Workspace<'s, S> {
    fn f(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        self.stats.rhs_evals += 1;
        self.sys.rhs(t, y, dy)
    }

    fn scale(&self, y: &[f64], other: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(other)
            .map(|(a, b)| self.opts.atol + self.opts.rtol * a.abs().max(b.abs()))
            .collect()
    }

    fn jacobian(&mut self, t: f64, y: &[f64], fy: &[f64]) -> Result<()> {
        let n = y.len();
        let mut jac = DMatrix::zeros(n, n);
        let mut yp = y.to_vec();
        let mut fp = vec![0.0; n];
        let sqrt_eps = f64::EPSILON.sqrt();
        for k in 0..n {
            let delta = sqrt_eps * y[k].abs().max(1e-8);
            yp[k] = y[k] + delta;
            let step = yp[k] - y[k];
            let r = self.f(t, &yp, &mut fp);
            yp[k] = y[k];
            // A perturbation that leaves the admissible set (for example a
            // front pushed past the domain end) is retried backwards.
            if r.is_err() {
                yp[k] = y[k] - delta;
                let step = yp[k] - y[k];
                self.f(t, &yp, &mut fp)?;
                yp[k] = y[k];
                for i in 0..n {
                    jac[(i, k)] = (fp[i] - fy[i]) / step;
                }
                continue;
            }
            for i in 0..n {
                jac[(i, k)] = (fp[i] - fy[i]) / step;
            }
        }
        self.stats.jacobians += 1;
        self.jac = Some(jac);
        self.lu = None;
        Ok(())
    }

    fn factor(&mut self, h: f64) {
        if matches!(self.lu, Some((hh, _)) if hh == h) {
            return;
        }
        let jac = self.jac.as_ref().expect("jacobian available");
        let n = jac.nrows();
        let m = DMatrix::identity(n, n) - jac * (h * GAMMA);
        self.lu = Some((h, m.lu()));
        self.stats.factorizations += 1;
    }

    fn solve(&self, rhs: &mut DVector<f64>) -> bool {
        self.lu.as_ref().expect("factorization").1.solve_mut(rhs)
    }
}

enum StepOutcome {
    Done {
        y_new: Vec<f64>,
        f_new: Vec<f64>,
        err: f64,
        theta_max: f64,
    },
    NewtonFailed,
}

fn rms(v: &[f64], scale: &[f64]) -> f64 {
    let s: f64 = v.iter().zip(scale).map(|(a, b)| (a / b).powi(2)).sum();
    (s / v.len().max(1) as f64).sqrt()
}

fn attempt<S: OdeSystem + ?Sized>(
    ws: &mut Workspace<'_, S>,
    t: f64,
    y: &[f64],
    fy: &[f64],
    h: f64,
) -> Result<StepOutcome> {
    let n = y.len();
    ws.factor(h);
    let scale = ws.scale(y, y);
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(STAGES);
    let mut theta_max: f64 = 0.0;
    let hg = h * GAMMA;
    let mut fz = vec![0.0; n];
    for i in 0..STAGES {
        let mut base = y.to_vec();
        for (j, kj) in k.iter().enumerate() {
            let a = h * A[i][j];
            if a != 0.0 {
                for (b, kv) in base.iter_mut().zip(kj) {
                    *b += a * kv;
                }
            }
        }
        let guess_slope = if i == 0 { fy } else { &k[i - 1][..] };
        let mut z: Vec<f64> = base
            .iter()
            .zip(guess_slope)
            .map(|(b, s)| b + hg * s)
            .collect();
        let mut converged = false;
        let mut prev_norm = f64::INFINITY;
        for iter in 0..ws.opts.max_newton_iter {
            if ws.f(t + C[i] * h, &z, &mut fz).is_err() {
                return Ok(StepOutcome::NewtonFailed);
            }
            let mut r = DVector::from_iterator(n, (0..n).map(|m| -(z[m] - hg * fz[m] - base[m])));
            if !ws.solve(&mut r) {
                return Ok(StepOutcome::NewtonFailed);
            }
            for m in 0..n {
                z[m] += r[m];
            }
            let norm = rms(r.as_slice(), &scale);
            if !norm.is_finite() {
                return Ok(StepOutcome::NewtonFailed);
            }
            if iter > 0 {
                let theta = norm / prev_norm;
                theta_max = theta_max.max(theta);
                if theta >= 0.99 {
                    return Ok(StepOutcome::NewtonFailed);
                }
                if theta / (1.0 - theta) * norm <= ws.opts.newton_tol {
                    converged = true;
                    break;
                }
            } else if norm <= 1e-3 * ws.opts.newton_tol {
                converged = true;
                break;
            }
            prev_norm = norm;
        }
        if !converged {
            return Ok(StepOutcome::NewtonFailed);
        }
        let ki: Vec<f64> = z.iter().zip(&base).map(|(zz, b)| (zz - b) / hg).collect();
        k.push(ki);
    }
    // Stiffly accurate: the last stage value is the new solution.
    let y_new: Vec<f64> = (0..n)
        .map(|m| y[m] + h * (0..STAGES).map(|i| B[i] * k[i][m]).sum::<f64>())
        .collect();
    let mut f_new = vec![0.0; n];
    if ws.f(t + h, &y_new, &mut f_new).is_err() {
        return Ok(StepOutcome::NewtonFailed);
    }
    let mut e = DVector::from_iterator(
        n,
        (0..n).map(|m| {
            h * (0..STAGES)
                .map(|i| (B[i] - B_HAT[i]) * k[i][m])
                .sum::<f64>()
        }),
    );
    // Filtering by (I − hγJ)⁻¹ keeps the estimate bounded on stiff modes.
    if !ws.solve(&mut e) {
        return Ok(StepOutcome::NewtonFailed);
    }
    let scale = ws.scale(y, &y_new);
    let err = rms(e.as_slice(), &scale);
    Ok(StepOutcome::Done {
        y_new,
        f_new,
        err,
        theta_max,
    })
}

/// Integrate from `t0` to `t_end`, stopping early at the first terminal
/// event.
pub fn integrate<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &SolverOptions,
    events: &[Event<'_>],
) -> Result<Solution> {
    match integrate_partial(sys, t0, y0, t_end, opts, events)? {
        (sol, None) => Ok(sol),
        (_, Some(e)) => Err(e),
    }
}

/// Like [`integrate`], but a failure after the first step returns the steps
/// accepted so far together with the error.
pub fn integrate_partial<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &SolverOptions,
    events: &[Event<'_>],
) -> Result<(Solution, Option<Error>)> {
    assert_eq!(y0.len(), sys.dim(), "initial state length");
    assert!(t_end > t0, "integration interval must be forward in time");
    let mut ws = Workspace {
        sys,
        opts,
        stats: SolverStats::default(),
        jac: None,
        lu: None,
    };
    let mut fy = vec![0.0; y0.len()];
    ws.f(t0, y0, &mut fy)?;
    let mut sol = Solution {
        times: vec![t0],
        states: vec![y0.to_vec()],
        derivs: vec![fy],
        events: Vec::new(),
        stats: SolverStats::default(),
    };
    let outcome = step_loop(&mut ws, &mut sol, t_end, events);
    sol.stats = ws.stats;
    Ok((sol, outcome.err()))
}

fn step_loop<S: OdeSystem + ?Sized>(
    ws: &mut Workspace<'_, S>,
    sol: &mut Solution,
    t_end: f64,
    events: &[Event<'_>],
) -> Result<()> {
    let opts = ws.opts;
    let t0 = sol.times[0];
    let n = sol.states[0].len();
    let mut t = t0;
    let mut y = sol.states[0].clone();
    let mut fy = sol.derivs[0].clone();
    let mut stops: Vec<f64> = opts
        .tstops
        .iter()
        .copied()
        .filter(|&s| s > t0 && s < t_end)
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.push(t_end);
    let mut next_stop = 0;
    let mut g_prev: Vec<f64> = events.iter().map(|e| (e.g)(t, &y)).collect();

    let mut h = opts.h_initial.min(opts.h_max).min(t_end - t0);
    let mut jac_stale = true;
    let mut last_rejected = false;

    loop {
        if sol.times.len() > opts.max_steps {
            return Err(Error::TooManySteps(opts.max_steps));
        }
        let target = stops[next_stop];
        let mut h_try = h.min(opts.h_max);
        let mut hits_stop = false;
        if t + h_try >= target || t + 1.01 * h_try >= target {
            h_try = target - t;
            hits_stop = true;
        }
        if h_try < 1e-15 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t, h: h_try });
        }
        if jac_stale {
            ws.jacobian(t, &y, &fy)?;
            jac_stale = false;
        }
        match attempt(ws, t, &y, &fy, h_try)? {
            StepOutcome::NewtonFailed => {
                ws.stats.newton_failures += 1;
                // A failure with a fresh Jacobian means the step is too long.
                h = 0.5 * h_try;
                jac_stale = true;
                last_rejected = true;
                continue;
            }
            StepOutcome::Done {
                y_new,
                f_new,
                err,
                theta_max,
            } => {
                let raw = if err > 0.0 {
                    0.9 * err.powf(-0.25)
                } else {
                    5.0
                };
                if err > 1.0 {
                    ws.stats.rejected += 1;
                    h = h_try * raw.clamp(0.1, 0.9);
                    last_rejected = true;
                    continue;
                }
                ws.stats.accepted += 1;
                let t_new = if hits_stop { target } else { t + h_try };
                // Event detection on the freshly accepted step.
                let mut fired: Option<(usize, f64)> = None;
                for (ei, ev) in events.iter().enumerate() {
                    let g_new = (ev.g)(t_new, &y_new);
                    if g_prev[ei] < 0.0 && g_new >= 0.0 {
                        let te = locate(ev, t, t_new, &y, &y_new, &fy, &f_new, opts.event_tol);
                        let ye = hermite(t, t_new, &y, &y_new, &fy, &f_new, te);
                        sol.events.push(EventHit {
                            name: ev.name.clone(),
                            t: te,
                            y: ye,
                        });
                        if ev.terminal && fired.is_none_or(|(_, tf)| te < tf) {
                            fired = Some((ei, te));
                        }
                    }
                    g_prev[ei] = g_new;
                }
                if let Some((_, te)) = fired {
                    // Terminal: end the record at the event time.
                    sol.events.retain(|e| e.t <= te);
                    if te > t {
                        let ye = hermite(t, t_new, &y, &y_new, &fy, &f_new, te);
                        let mut fe = vec![0.0; n];
                        if ws.f(te, &ye, &mut fe).is_err() {
                            fe = hermite_derivative(t, t_new, &y, &y_new, &fy, &f_new, te);
                        }
                        sol.times.push(te);
                        sol.states.push(ye);
                        sol.derivs.push(fe);
                    }
                    break;
                }
                t = t_new;
                y = y_new;
                fy = f_new;
                sol.times.push(t);
                sol.states.push(y.clone());
                sol.derivs.push(fy.clone());
                if hits_stop {
                    next_stop += 1;
                    if next_stop == stops.len() {
                        break;
                    }
                }
                let mut factor = raw.clamp(0.2, 5.0);
                if last_rejected {
                    factor = factor.min(1.0);
                }
                last_rejected = false;
                // Keep the factorization when the change would be small.
                if (1.0..1.2).contains(&factor) && !hits_stop {
                    factor = 1.0;
                }
                h = if hits_stop {
                    h.max(h_try) * factor
                } else {
                    h_try * factor
                };
                jac_stale = theta_max > 0.3;
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn locate(
    ev: &Event<'_>,
    t0: f64,
    t1: f64,
    y0: &[f64],
    y1: &[f64],
    f0: &[f64],
    f1: &[f64],
    tol: f64,
) -> f64 {
    let (mut a, mut b) = (t0, t1);
    while b - a > tol * t1.abs().max(1.0) {
        let m = 0.5 * (a + b);
        let ym = hermite(t0, t1, y0, y1, f0, f1, m);
        if (ev.g)(m, &ym) >= 0.0 {
            b = m;
        } else {
            a = m;
        }
        if m == a && m == b {
            break;
        }
    }
    b
}
