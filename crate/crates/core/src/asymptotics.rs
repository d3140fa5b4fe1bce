//! Closed-form approximations: quasi-steady temperatures, the Biot-number
//! series for the melting front, and the two-scale (inner/outer) solution
//! for the dissolved gas.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::params::{DimParams, Profile};
use crate::quad;

/// Default number of eigenmodes in the inner series.
pub const DEFAULT_MODES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearProfile {
    pub slope: f64,
    pub intercept: f64,
}

impl LinearProfile {
    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Piecewise-linear temperatures for frozen interface positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TempProfiles {
    pub s_gw: f64,
    pub s_wi: f64,
    pub gas: LinearProfile,
    pub water: LinearProfile,
    pub ice: LinearProfile,
}

impl TempProfiles {
    /// Temperature at any point of the domain, picking the compartment.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.s_gw {
            self.gas.eval(x)
        } else if x <= self.s_wi {
            self.water.eval(x)
        } else {
            self.ice.eval(x)
        }
    }
}

pub fn quasi_steady_temps(s_gw: f64, s_wi: f64, params: &DimParams) -> Result<TempProfiles> {
    if !(s_gw > 0.0 && s_gw < s_wi && s_wi < 1.0) {
        return Err(Error::InterfaceOrder { s_gw, s_wi });
    }
    let g = &params.groups;
    let eta = g.eta;
    let d = s_wi + (eta - 1.0) * s_gw;
    assert!(d > 0.0, "quasi-steady denominator must be positive");
    let a_i = g.bi * g.t2_tilde / (1.0 + g.bi * (1.0 - s_wi));
    Ok(TempProfiles {
        s_gw,
        s_wi,
        gas: LinearProfile {
            slope: -eta / d,
            intercept: (eta * s_gw - s_gw + s_wi) / d,
        },
        water: LinearProfile {
            slope: -1.0 / d,
            intercept: s_wi / d,
        },
        ice: LinearProfile {
            slope: a_i,
            intercept: -a_i * s_wi,
        },
    })
}

/// Interface positions and velocities at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceMotion {
    pub s_gw: f64,
    pub s_wi: f64,
    pub ds_gw: f64,
    pub ds_wi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub s0: f64,
    pub s1: f64,
    /// s0 + Bi·s1
    pub s_wi: f64,
    pub s_gw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Small,
    Large,
}

/// Front position as a series in the Biot number, `s_wi ≈ s0 + Bi·s1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceSeries {
    pub b: [f64; 6],
    pub bi: f64,
    pub a1: f64,
    pub a2: f64,
}

impl InterfaceSeries {
    pub fn new(p: &DimParams) -> Self {
        Self {
            b: [p.b1, p.b2, p.b3, p.b4, p.b5, p.b6],
            bi: p.groups.bi,
            a1: p.a1,
            a2: p.a2,
        }
    }

    /// Same constants with a different Biot number multiplying the
    /// correction.
    pub fn with_biot(mut self, bi: f64) -> Self {
        self.bi = bi;
        self
    }

    fn radical(&self, t: f64) -> f64 {
        let [b1, b2, b3, ..] = self.b;
        let r2 = b1 * b1 + 2.0 * b2 * (b3 + t);
        assert!(r2 >= 0.0, "negative radicand in the leading-order front");
        r2.sqrt()
    }

    pub fn s0(&self, t: f64) -> f64 {
        let [b1, b2, ..] = self.b;
        (self.radical(t) - b1) / b2
    }

    pub fn s0_dot(&self, t: f64) -> f64 {
        1.0 / self.radical(t)
    }

    /// `∫₀ᵗ s0` from the antiderivative of the radical.
    pub fn s0_integral(&self, t: f64) -> f64 {
        let [b1, b2, ..] = self.b;
        let (r, r0) = (self.radical(t), self.radical(0.0));
        ((r * r * r - r0 * r0 * r0) / (3.0 * b2) - b1 * t) / b2
    }

    fn s1_numerator(&self, t: f64, s0: f64) -> f64 {
        let [b1, b2, _, b4, b5, b6] = self.b;
        b2 / 3.0 * s0.powi(3) + 0.5 * (b1 - b2) * s0 * s0 - b1 * s0
            + b4
            + b5 * t
            + b6 * self.s0_integral(t)
    }

    pub fn s1(&self, t: f64) -> f64 {
        let [b1, b2, ..] = self.b;
        let s0 = self.s0(t);
        self.s1_numerator(t, s0) / (b1 + b2 * s0)
    }

    pub fn s1_dot(&self, t: f64) -> f64 {
        let [b1, b2, _, _, b5, b6] = self.b;
        let s0 = self.s0(t);
        let v0 = self.s0_dot(t);
        let den = b1 + b2 * s0;
        let num_dot = (b2 * s0 * s0 + (b1 - b2) * s0 - b1) * v0 + b5 + b6 * s0;
        (num_dot - self.s1(t) * b2 * v0) / den
    }

    pub fn evaluate(&self, t: f64) -> SeriesPoint {
        let s0 = self.s0(t);
        let s1 = self.s1(t);
        let s_wi = s0 + self.bi * s1;
        SeriesPoint {
            s0,
            s1,
            s_wi,
            s_gw: self.a1 + self.a2 * s_wi,
        }
    }

    /// Two-term positions and velocities.
    pub fn motion(&self, t: f64) -> InterfaceMotion {
        let p = self.evaluate(t);
        let ds_wi = self.s0_dot(t) + self.bi * self.s1_dot(t);
        InterfaceMotion {
            s_gw: p.s_gw,
            s_wi: p.s_wi,
            ds_gw: self.a2 * ds_wi,
            ds_wi,
        }
    }

    /// Leading-order positions and velocities.
    pub fn motion_leading(&self, t: f64) -> InterfaceMotion {
        let s = self.s0(t);
        let v = self.s0_dot(t);
        InterfaceMotion {
            s_gw: self.a1 + self.a2 * s,
            s_wi: s,
            ds_gw: self.a2 * v,
            ds_wi: v,
        }
    }

    pub fn s0_expansion(&self, t: f64, regime: Regime) -> f64 {
        let [b1, b2, b3, ..] = self.b;
        let k = b1 * b1 + 2.0 * b2 * b3;
        match regime {
            Regime::Small => (k.sqrt() - b1) / b2 + t / k.sqrt(),
            Regime::Large => {
                let w = (2.0 * t / b2).sqrt();
                -b1 / b2 + w + k / (2.0 * b2 * b2) / w
            }
        }
    }

    /// Time at which s0 reaches the domain end.
    pub fn melt_time_leading(&self) -> f64 {
        let [b1, b2, b3, ..] = self.b;
        b1 + 0.5 * b2 - b3
    }

    /// Time at which the two-term front reaches the domain end.
    pub fn melt_time_two_term(&self) -> Result<f64> {
        let f = |t: f64| self.evaluate(t).s_wi - 1.0;
        let mut hi = self.melt_time_leading().max(1e-3);
        let mut tries = 0;
        while f(hi) < 0.0 {
            hi *= 2.0;
            tries += 1;
            if tries > 60 {
                return Err(Error::NotBracketed { a: 0.0, b: hi });
            }
        }
        bisect(f, 0.0, hi, 1e-13)
    }

    /// Residual of the time-integrated front equation for a candidate front
    /// `s`, with its running integral by quadrature.
    pub fn stefan_int_residual(&self, t: f64, s: impl Fn(f64) -> f64) -> f64 {
        let [b1, b2, b3, b4, b5, b6] = self.b;
        let bi = self.bi;
        let st = s(t);
        let lhs = b1 * st
            + 0.5 * b2 * st * st
            + bi * (b1 * st + 0.5 * (b2 - b1) * st * st - b2 / 3.0 * st.powi(3));
        let integral = quad::integrate(&s, 0.0, t, 1e-13);
        let rhs = b3 + t + bi * b4 + bi * (b5 * t + b6 * integral);
        lhs - rhs
    }
}

pub fn interface_series(t: f64, params: &DimParams) -> SeriesPoint {
    InterfaceSeries::new(params).evaluate(t)
}

pub fn s0_expansions(t: f64, params: &DimParams, regime: Regime) -> f64 {
    InterfaceSeries::new(params).s0_expansion(t, regime)
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let (mut fa, fb) = (f(a), f(b));
    if fa.signum() == fb.signum() && fa != 0.0 && fb != 0.0 {
        return Err(Error::NotBracketed { a, b });
    }
    while b - a > tol * b.abs().max(1.0) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Eigenvalue equation `μζ + H tan μ`, evaluated directly.
#[inline]
pub fn eigen_residual(mu: f64, henry: f64, zeta: f64) -> f64 {
    mu * zeta + henry * mu.tan()
}

/// The same residual at `μ = (2n−1)π/2 + δ`, using `tan μ = −cot δ`.
///
/// Near the pole `tan` amplifies the rounding of `μ` by `H/cos²μ`, so the
/// direct form cannot resolve roots of the higher branches to better than
/// about 1e-8; the offset form is well conditioned.
#[inline]
pub fn eigen_residual_offset(n: usize, delta: f64, henry: f64, zeta: f64) -> f64 {
    (pole(n) + delta) * zeta - henry / delta.tan()
}

#[inline]
fn pole(n: usize) -> f64 {
    (2 * n - 1) as f64 * PI / 2.0
}

/// Small-H approximation of the n-th root (n ≥ 1).
pub fn eigenvalue_approx(n: usize, henry: f64, zeta: f64) -> f64 {
    pole(n) + eigen_offset_approx(n, henry, zeta)
}

fn eigen_offset_approx(n: usize, henry: f64, zeta: f64) -> f64 {
    2.0 * henry / (zeta * (2 * n - 1) as f64 * PI)
}

fn check_eigen_inputs(henry: f64, zeta: f64) -> Result<()> {
    if !(henry >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "H",
            reason: format!("must be non-negative, got {henry}"),
        });
    }
    if !(zeta > 0.0) {
        return Err(Error::InvalidParameter {
            name: "zeta",
            reason: format!("must be positive, got {zeta}"),
        });
    }
    Ok(())
}

/// Offsets `δ_n = μ_n − (2n−1)π/2` of the first `n_max` roots of
/// `μζ + H tan μ = 0`, one per branch `((2n−1)π/2, nπ)`.
pub fn eigen_offsets(henry: f64, zeta: f64, n_max: usize) -> Result<Vec<f64>> {
    check_eigen_inputs(henry, zeta)?;
    (1..=n_max)
        .map(|n| {
            if henry == 0.0 {
                Ok(0.0)
            } else {
                polish(n, henry, zeta)
            }
        })
        .collect()
}

/// First `n_max` roots of `μζ + H tan μ = 0`.
pub fn eigenvalues(henry: f64, zeta: f64, n_max: usize) -> Result<Vec<f64>> {
    Ok(eigen_offsets(henry, zeta, n_max)?
        .into_iter()
        .enumerate()
        .map(|(k, d)| pole(k + 1) + d)
        .collect())
}

/// Newton iteration on the offset, safeguarded by bisection on (0, π/2).
fn polish(n: usize, henry: f64, zeta: f64) -> Result<f64> {
    let f = |d: f64| eigen_residual_offset(n, d, henry, zeta);
    // −∞ just right of the pole, positive at nπ.
    let (mut a, mut b) = (0.0f64, PI / 2.0);
    if f(b) <= 0.0 {
        return Err(Error::NotBracketed {
            a: pole(n),
            b: pole(n) + b,
        });
    }
    let guess = eigen_offset_approx(n, henry, zeta);
    let mut x = if guess > a && guess < b {
        guess
    } else {
        0.5 * b
    };
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let sin = x.sin();
        let newton = x - fx / (zeta + henry / (sin * sin));
        let next = if newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (next - x).abs() <= 2.0 * f64::EPSILON * x {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// `∫₀¹ cos(μ_n(y−1)) cos(μ_ℓ(y−1)) dy` simplified with the eigenvalue
/// equation.
pub fn gram_entry(mu_n: f64, mu_l: f64, henry: f64, zeta: f64) -> f64 {
    if mu_n == mu_l {
        0.5 - zeta / (2.0 * henry) * mu_n.cos().powi(2)
    } else {
        -zeta / henry * mu_n.cos() * mu_l.cos()
    }
}

/// The same integral evaluated directly from the trigonometric antiderivative,
/// valid for arbitrary (not necessarily eigen) arguments.
pub fn overlap_integral(a: f64, b: f64) -> f64 {
    if a == b {
        0.5 + (2.0 * a).sin() / (4.0 * a)
    } else {
        (a * a.sin() * b.cos() - b * a.cos() * b.sin()) / (a * a - b * b)
    }
}

pub fn gram_matrix(mu: &[f64], henry: f64, zeta: f64) -> DMatrix<f64> {
    let n = mu.len();
    DMatrix::from_fn(n, n, |i, j| gram_entry(mu[i], mu[j], henry, zeta))
}

/// Short-time series for the dissolved gas on the fixed layer `y ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    pub gamma_inf: f64,
    pub mu: Vec<f64>,
    pub a: Vec<f64>,
}

impl InnerSolution {
    /// Coefficients by the near-orthogonal projection; with
    /// `gram_correction` the full Gram system is solved instead.
    pub fn new(
        henry: f64,
        zeta: f64,
        c0: &Profile,
        n_max: usize,
        gram_correction: bool,
    ) -> Result<Self> {
        let gamma_inf = steady_concentration(henry, zeta, c0.mean());
        let mu = eigenvalues(henry, zeta, n_max)?;
        let proj: Vec<f64> = mu
            .iter()
            .map(|&m| {
                quad::integrate(
                    |y| (c0.eval(y) - gamma_inf) * (m * (y - 1.0)).cos(),
                    0.0,
                    1.0,
                    1e-14,
                )
            })
            .collect();
        let a = if gram_correction && henry > 0.0 {
            let g = gram_matrix(&mu, henry, zeta);
            let rhs = DVector::from_vec(proj);
            g.lu()
                .solve(&rhs)
                .ok_or_else(|| Error::InvalidParameter {
                    name: "H",
                    reason: "singular Gram matrix".into(),
                })?
                .iter()
                .copied()
                .collect()
        } else {
            proj.iter().map(|p| 2.0 * p).collect()
        };
        Ok(Self { gamma_inf, mu, a })
    }

    pub fn from_params(
        params: &DimParams,
        c0: &Profile,
        n_max: usize,
        gram_correction: bool,
    ) -> Result<Self> {
        Self::new(params.groups.henry, params.zeta, c0, n_max, gram_correction)
    }

    pub fn eval(&self, y: f64, tau: f64) -> f64 {
        self.gamma_inf
            + self
                .mu
                .iter()
                .zip(&self.a)
                .map(|(&m, &a)| a * (m * (y - 1.0)).cos() * (-m * m * tau).exp())
                .sum::<f64>()
    }

    /// Magnitude of the last retained coefficient, a rough truncation
    /// indicator.
    pub fn tail_bound(&self) -> f64 {
        self.a.last().map_or(0.0, |a| a.abs())
    }
}

/// Long-time limit of the inner problem, `H(ζ + ∫C₀)/(ζ + H)`.
pub fn steady_concentration(henry: f64, zeta: f64, c0_mean: f64) -> f64 {
    henry * (zeta + c0_mean) / (zeta + henry)
}

pub fn inner_solution(y: f64, tau: f64, inner: &InnerSolution) -> f64 {
    inner.eval(y, tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterOrder {
    Leading,
    First,
}

/// Interface positions rescaled to the initial liquid layer.
fn sigma(s: f64, p: &DimParams) -> f64 {
    (s - p.s_gw0) / p.delta_s()
}

/// Slow-time concentration at rescaled position `y`.
pub fn outer_solution(
    y: f64,
    order: OuterOrder,
    params: &DimParams,
    motion: &InterfaceMotion,
    c0_mean: f64,
) -> f64 {
    let h = params.groups.henry;
    let zeta = params.zeta;
    let (sg, sw) = (sigma(motion.s_gw, params), sigma(motion.s_wi, params));
    let g0 = h * (zeta + c0_mean) / (zeta + sg + h * (sw - sg));
    match order {
        OuterOrder::Leading => g0,
        OuterOrder::First => g0 + params.eps * outer_correction(y, params, motion, c0_mean),
    }
}

/// First-order outer term `G₁(y, t)`.
pub fn outer_correction(y: f64, params: &DimParams, motion: &InterfaceMotion, c0_mean: f64) -> f64 {
    let h = params.groups.henry;
    let zeta = params.zeta;
    let ds = params.delta_s();
    let (sg, sw) = (sigma(motion.s_gw, params), sigma(motion.s_wi, params));
    let (dsg, dsw) = (motion.ds_gw / ds, motion.ds_wi / ds);
    let q = h * (zeta + c0_mean);
    let den = zeta + sg + h * (sw - sg);
    let g0_dot = -q * (dsg * (1.0 - h) + h * dsw) / (den * den);
    let xi = 1.0 / (zeta + sg);
    let cubic = (sw.powi(3) - sg.powi(3)) / 6.0 - sw * (sw * sw - sg * sg) / 2.0;
    let k = -(sg * sg / 2.0 - sw * sg + h * xi * cubic) / (1.0 + h * xi * (sw - sg));
    g0_dot * (y * y / 2.0 - sw * y + k)
}
