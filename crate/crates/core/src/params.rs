//! Physical inputs, dimensionless groups and the constants derived from them.
//!
//! The solver and the asymptotic formulas only ever consume [`DimParams`];
//! [`PhysicalParams`] is kept around for unit conversion and reporting.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Above this value of the inner-layer parameter the two-scale
/// concentration approximation is no longer trustworthy.
pub const EPS_WARN_THRESHOLD: f64 = 1e-2;

/// Dimensional model constants in SI units. Defaults are the fiber-scale
/// values used throughout the crate's presets.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    /// Domain length (m).
    pub l: f64,
    /// Domain radius (m). Cancels from the dimensionless system.
    pub r: f64,
    pub rho_g_bar: f64,
    pub rho_w: f64,
    pub rho_i: f64,
    pub c_g: f64,
    pub c_w: f64,
    pub c_i: f64,
    pub k_g: f64,
    pub k_w: f64,
    pub k_i: f64,
    /// Diffusivity of dissolved air in water (m²/s).
    pub d_w: f64,
    /// Molar mass of air (kg/mol).
    pub m_g: f64,
    /// Dimensionless Henry constant.
    pub henry: f64,
    /// Convective heat-transfer coefficient at the ice end (W/m²K).
    pub theta: f64,
    /// Latent heat of melting (J/kg).
    pub lambda: f64,
    pub t_c: f64,
    pub t_1: f64,
    pub t_2: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        let t_c = 273.15;
        Self {
            l: 1.0e-3,
            r: 3.5e-6,
            rho_g_bar: 1.29,
            rho_w: 1000.0,
            rho_i: 916.0,
            c_g: 1005.0,
            c_w: 4180.0,
            c_i: 2050.0,
            k_g: 0.0243,
            k_w: 0.58,
            k_i: 2.22,
            d_w: 2.22e-9,
            m_g: 0.0290,
            henry: 0.0274,
            theta: 10.0,
            lambda: 3.34e5,
            t_c,
            t_1: t_c + 0.005,
            t_2: t_c - 0.005,
        }
    }
}

impl PhysicalParams {
    pub fn alpha_g(&self) -> f64 {
        self.k_g / (self.rho_g_bar * self.c_g)
    }

    pub fn alpha_w(&self) -> f64 {
        self.k_w / (self.rho_w * self.c_w)
    }

    pub fn alpha_i(&self) -> f64 {
        self.k_i / (self.rho_i * self.c_i)
    }

    /// Cross-sectional area πr².
    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.r * self.r
    }

    /// Names and values in a stable order, keyed exactly as in config files.
    pub fn entries(&self) -> [(&'static str, f64); 19] {
        [
            ("L", self.l),
            ("r", self.r),
            ("rho_g_bar", self.rho_g_bar),
            ("rho_w", self.rho_w),
            ("rho_i", self.rho_i),
            ("c_g", self.c_g),
            ("c_w", self.c_w),
            ("c_i", self.c_i),
            ("k_g", self.k_g),
            ("k_w", self.k_w),
            ("k_i", self.k_i),
            ("D_w", self.d_w),
            ("M_g", self.m_g),
            ("H", self.henry),
            ("theta", self.theta),
            ("lambda", self.lambda),
            ("T_c", self.t_c),
            ("T_1", self.t_1),
            ("T_2", self.t_2),
        ]
    }

    /// Mutable access by config key. Returns `None` for unknown keys.
    pub fn field_mut(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "L" => &mut self.l,
            "r" => &mut self.r,
            "rho_g_bar" => &mut self.rho_g_bar,
            "rho_w" => &mut self.rho_w,
            "rho_i" => &mut self.rho_i,
            "c_g" => &mut self.c_g,
            "c_w" => &mut self.c_w,
            "c_i" => &mut self.c_i,
            "k_g" => &mut self.k_g,
            "k_w" => &mut self.k_w,
            "k_i" => &mut self.k_i,
            "D_w" => &mut self.d_w,
            "M_g" => &mut self.m_g,
            "H" => &mut self.henry,
            "theta" => &mut self.theta,
            "lambda" => &mut self.lambda,
            "T_c" => &mut self.t_c,
            "T_1" => &mut self.t_1,
            "T_2" => &mut self.t_2,
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.entries() {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{value} is not finite"),
                });
            }
            if name != "T_2" && value <= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{value} must be strictly positive"),
                });
            }
        }
        if self.t_1 <= self.t_c {
            return Err(Error::InvalidParameter {
                name: "T_1",
                reason: format!("T_1 = {} must exceed T_c = {}", self.t_1, self.t_c),
            });
        }
        if self.t_2 >= self.t_c {
            return Err(Error::InvalidParameter {
                name: "T_2",
                reason: format!("T_2 = {} must be below T_c = {}", self.t_2, self.t_c),
            });
        }
        if self.rho_i >= self.rho_w {
            return Err(Error::InvalidParameter {
                name: "rho_i",
                reason: "ice must be less dense than water".into(),
            });
        }
        Ok(())
    }
}

/// A one-dimensional initial profile on the rescaled compartment
/// coordinate `y ∈ [0, 1]`.
#[derive(Clone)]
pub enum Profile {
    Constant(f64),
    /// Linear ramp from `left` at y = 0 to `right` at y = 1.
    Linear {
        left: f64,
        right: f64,
    },
    /// Values at equally spaced nodes covering [0, 1], linearly interpolated.
    Tabulated(Vec<f64>),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Profile {
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Linear { left, right } => left + (right - left) * y,
            Profile::Tabulated(values) => match values.len() {
                0 => 0.0,
                1 => values[0],
                n => {
                    let pos = y.clamp(0.0, 1.0) * (n - 1) as f64;
                    let k = (pos.floor() as usize).min(n - 2);
                    let frac = pos - k as f64;
                    values[k] * (1.0 - frac) + values[k + 1] * frac
                }
            },
            Profile::Custom(f) => f(y),
        }
    }

    /// Exact mean over [0, 1] where available, otherwise adaptive quadrature.
    pub fn mean(&self) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Linear { left, right } => 0.5 * (left + right),
            Profile::Tabulated(values) => match values.len() {
                0 => 0.0,
                1 => values[0],
                n => {
                    let inner: f64 = values[1..n - 1].iter().sum();
                    (0.5 * (values[0] + values[n - 1]) + inner) / (n - 1) as f64
                }
            },
            Profile::Custom(f) => crate::quad::integrate(|y| f(y), 0.0, 1.0, 1e-13),
        }
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant(c) => write!(f, "Constant({c})"),
            Profile::Linear { left, right } => write!(f, "Linear({left} -> {right})"),
            Profile::Tabulated(v) => write!(f, "Tabulated({} nodes)", v.len()),
            Profile::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant(c) => write!(f, "{c}"),
            Profile::Linear { left, right } => write!(f, "linear({left},{right})"),
            Profile::Tabulated(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "table({})", parts.join(" "))
            }
            Profile::Custom(_) => write!(f, "custom"),
        }
    }
}

/// Interface positions and initial fields, all dimensionless. Each profile is
/// a function of the rescaled coordinate of its own compartment.
#[derive(Debug, Clone)]
pub struct InitialConditions {
    pub s_gw0: f64,
    pub s_wi0: f64,
    pub c0: Profile,
    pub tg0: Profile,
    pub tw0: Profile,
    /// `None` means equilibrated with the ambient temperature T̃₂.
    pub ti0: Option<Profile>,
}

impl Default for InitialConditions {
    fn default() -> Self {
        Self {
            s_gw0: 0.1,
            s_wi0: 0.11,
            c0: Profile::Constant(0.0),
            tg0: Profile::Constant(1.0),
            tw0: Profile::Constant(1.0),
            ti0: None,
        }
    }
}

impl InitialConditions {
    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.s_gw0, self.s_wi0);
        if !(a > 0.0 && a < b && b < 1.0) {
            return Err(Error::InvalidInitialCondition(format!(
                "need 0 < s_gw0 < s_wi0 < 1, got s_gw0 = {a}, s_wi0 = {b}"
            )));
        }
        Ok(())
    }

    /// Width of the initial liquid layer.
    pub fn layer_width(&self) -> f64 {
        self.s_wi0 - self.s_gw0
    }
}

/// Dimensionless groups of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Groups {
    /// ρ_i / ρ_w
    pub delta: f64,
    /// k_w / k_g
    pub eta: f64,
    /// k_i / k_w
    pub psi: f64,
    pub bi: f64,
    pub le: f64,
    pub st: f64,
    /// (T₂ − T_c)/(T₁ − T_c)
    pub t2_tilde: f64,
    pub henry: f64,
    pub beta_g: f64,
    pub beta_w: f64,
    pub beta_i: f64,
}

/// Characteristic scales used to undo the nondimensionalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    pub length: f64,
    pub t_bar: f64,
    pub c_bar: f64,
    pub rho_bar: f64,
    pub t_c: f64,
    /// T₁ − T_c
    pub delta_t: f64,
}

impl Scales {
    pub fn time(&self, t: f64) -> f64 {
        t * self.t_bar
    }

    pub fn position(&self, x: f64) -> f64 {
        x * self.length
    }

    pub fn temperature(&self, t: f64) -> f64 {
        self.t_c + self.delta_t * t
    }

    pub fn concentration(&self, c: f64) -> f64 {
        c * self.c_bar
    }

    pub fn density(&self, rho: f64) -> f64 {
        rho * self.rho_bar
    }
}

/// Everything the solver and the asymptotic formulas need, frozen at
/// construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimParams {
    pub groups: Groups,
    pub scales: Scales,
    pub s_gw0: f64,
    pub s_wi0: f64,
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub b5: f64,
    pub b6: f64,
    /// s_gw0 / (s_wi0 − s_gw0)
    pub zeta: f64,
    /// Le·St·(Δs)²/δ
    pub eps: f64,
}

impl DimParams {
    /// Derive the kinematic and Stefan-series constants from a set of groups.
    pub fn new(groups: Groups, scales: Scales, s_gw0: f64, s_wi0: f64) -> Result<Self> {
        if !(s_gw0 > 0.0 && s_wi0 > s_gw0) {
            return Err(Error::InvalidInitialCondition(format!(
                "need 0 < s_gw0 < s_wi0, got s_gw0 = {s_gw0}, s_wi0 = {s_wi0}"
            )));
        }
        if !(groups.delta > 0.0 && groups.delta < 1.0) {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: format!("{} outside (0, 1)", groups.delta),
            });
        }
        let Groups {
            delta,
            eta,
            psi,
            bi: _,
            le,
            st,
            t2_tilde,
            ..
        } = groups;
        let a2 = 1.0 - delta;
        let a1 = s_gw0 - a2 * s_wi0;
        let b1 = (eta - 1.0) * a1;
        let b2 = 1.0 + (eta - 1.0) * a2;
        let s = s_wi0;
        let b3 = b1 * s + 0.5 * b2 * s * s;
        let b4 = b1 * s + 0.5 * (b2 - b1) * s * s - b2 / 3.0 * s * s * s;
        let b5 = 1.0 + psi * t2_tilde * b1;
        let b6 = psi * t2_tilde * b2 - 1.0;
        let ds = s_wi0 - s_gw0;
        let zeta = s_gw0 / ds;
        let eps = le * st * ds * ds / delta;
        if eps >= EPS_WARN_THRESHOLD {
            log::warn!("inner-layer parameter eps = {eps:.3e} is not small; concentration asymptotics will degrade");
        }
        Ok(Self {
            groups,
            scales,
            s_gw0,
            s_wi0,
            a1,
            a2,
            b1,
            b2,
            b3,
            b4,
            b5,
            b6,
            zeta,
            eps,
        })
    }

    /// Gas-water interface slaved to the water-ice interface.
    #[inline]
    pub fn s_gw_of(&self, s_wi: f64) -> f64 {
        self.a1 + self.a2 * s_wi
    }

    /// Diffusivity of the dimensionless concentration equation, δ/(St·Le).
    #[inline]
    pub fn kappa_c(&self) -> f64 {
        self.groups.delta / (self.groups.st * self.groups.le)
    }

    pub fn delta_s(&self) -> f64 {
        self.s_wi0 - self.s_gw0
    }

    /// Dimensionless time at which the leading-order front reaches the end
    /// of the domain, B₁ + B₂/2 − B₃.
    pub fn leading_order_melt_time(&self) -> f64 {
        self.b1 + 0.5 * self.b2 - self.b3
    }
}

/// Nondimensionalize a physical parameter set for the given initial layout.
pub fn nondimensionalize(phys: &PhysicalParams, ic: &InitialConditions) -> Result<DimParams> {
    phys.validate()?;
    ic.validate()?;
    let (groups, scales) = groups_and_scales(phys);
    DimParams::new(groups, scales, ic.s_gw0, ic.s_wi0)
}

fn groups_and_scales(p: &PhysicalParams) -> (Groups, Scales) {
    let dt1 = p.t_1 - p.t_c;
    let t_bar = p.l * p.l * p.lambda * p.rho_i / (p.k_w * dt1);
    let (ag, aw, ai) = (p.alpha_g(), p.alpha_w(), p.alpha_i());
    let l2 = p.l * p.l;
    let groups = Groups {
        delta: p.rho_i / p.rho_w,
        eta: p.k_w / p.k_g,
        psi: p.k_i / p.k_w,
        bi: p.l * p.theta / p.k_i,
        le: aw / p.d_w,
        st: dt1 * p.c_w / p.lambda,
        t2_tilde: (p.t_2 - p.t_c) / dt1,
        henry: p.henry,
        beta_g: ag * t_bar / l2,
        beta_w: aw * t_bar / l2,
        beta_i: ai * t_bar / l2,
    };
    let scales = Scales {
        length: p.l,
        t_bar,
        c_bar: p.rho_g_bar / p.m_g,
        rho_bar: p.rho_g_bar,
        t_c: p.t_c,
        delta_t: dt1,
    };
    (groups, scales)
}

/// Heat and gas diffusion times in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionTimescales {
    pub t_g: f64,
    pub t_w: f64,
    pub t_i: f64,
    /// Time for dissolved gas to cross half the initial liquid layer.
    pub t_d: f64,
}

pub fn diffusion_timescales(
    phys: &PhysicalParams,
    ic: &InitialConditions,
) -> Result<DiffusionTimescales> {
    phys.validate()?;
    ic.validate()?;
    let l2 = phys.l * phys.l;
    let d = 0.5 * phys.l * ic.layer_width();
    Ok(DiffusionTimescales {
        t_g: l2 / phys.alpha_g(),
        t_w: l2 / phys.alpha_w(),
        t_i: l2 / phys.alpha_i(),
        t_d: d * d / phys.d_w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn base() -> DimParams {
        nondimensionalize(&PhysicalParams::default(), &InitialConditions::default()).unwrap()
    }

    /// Groups with the rounded values printed in the parameter table, so the
    /// hand-computed constants below can be checked exactly.
    fn rounded_groups() -> Groups {
        Groups {
            delta: 0.916,
            eta: 23.9,
            psi: 3.83,
            bi: 4.50e-3,
            le: 62.5,
            st: 6.26e-5,
            t2_tilde: -1.0,
            henry: 0.0274,
            beta_g: 1.97e6,
            beta_w: 1.46e4,
            beta_i: 1.25e5,
        }
    }

    #[test]
    fn table_groups() {
        let p = base();
        let g = p.groups;
        assert_relative_eq!(g.delta, 0.916, max_relative = 1e-12);
        assert_relative_eq!(g.eta, 23.9, max_relative = 5e-3);
        assert_relative_eq!(g.psi, 3.83, max_relative = 5e-3);
        assert_relative_eq!(g.bi, 4.50e-3, max_relative = 5e-3);
        assert_relative_eq!(g.le, 62.5, max_relative = 5e-3);
        assert_relative_eq!(g.st, 6.26e-5, max_relative = 5e-3);
        assert_relative_eq!(g.beta_g, 1.97e6, max_relative = 5e-3);
        assert_relative_eq!(g.beta_w, 1.46e4, max_relative = 5e-3);
        assert_relative_eq!(g.beta_i, 1.25e5, max_relative = 5e-3);
        assert_relative_eq!(p.scales.t_bar, 1.06e5, max_relative = 5e-3);
        assert_relative_eq!(p.scales.c_bar, 44.6, max_relative = 5e-3);
        assert_eq!(g.t2_tilde, -1.0);
    }

    #[test]
    fn hand_computed_constants() {
        let scales = base().scales;
        let p = DimParams::new(rounded_groups(), scales, 0.1, 0.11).unwrap();
        assert_relative_eq!(p.a2, 0.084, max_relative = 1e-12);
        assert_relative_eq!(p.a1, 0.09076, max_relative = 1e-12);
        assert_relative_eq!(p.b1, 2.078404, max_relative = 1e-12);
        assert_relative_eq!(p.b2, 2.9236, max_relative = 1e-12);
        assert_relative_eq!(p.zeta, 10.0, max_relative = 1e-12);
    }

    #[test]
    fn inner_layer_parameter() {
        assert_relative_eq!(base().eps, 4.27e-7, max_relative = 2e-3);
    }

    #[test]
    fn table_timescales() {
        let ts = diffusion_timescales(&PhysicalParams::default(), &InitialConditions::default())
            .unwrap();
        assert_relative_eq!(ts.t_w, 7.21, max_relative = 2e-3);
        assert_relative_eq!(ts.t_g, 5.3352e-2, max_relative = 2e-4);
        assert_relative_eq!(ts.t_i, 8.46e-1, max_relative = 2e-3);
        assert_relative_eq!(ts.t_d, 1.13e-2, max_relative = 1e-2);
    }

    #[test]
    fn fast_gas_diffusion_limit() {
        let ic = InitialConditions::default();
        let mut phys = PhysicalParams::default();
        let mut last = f64::INFINITY;
        for k in 0..6 {
            phys.d_w = 2.22e-9 * 10f64.powi(3 * k);
            let t_d = diffusion_timescales(&phys, &ic).unwrap().t_d;
            assert!(t_d < last);
            last = t_d;
        }
        assert!(last < 1e-15);
    }

    #[test]
    fn identities() {
        let p = base();
        assert_relative_eq!(
            p.groups.beta_w * p.groups.st / p.groups.delta,
            1.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(p.a1 + p.a2 * p.s_wi0, p.s_gw0, max_relative = 1e-15);
        let lhs = p.b1 * p.b1 + 2.0 * p.b2 * p.b3;
        let rhs = (p.b1 + p.b2 * p.s_wi0).powi(2);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-14);
    }

    #[test]
    fn rejects_bad_inputs() {
        let ic = InitialConditions::default();
        let mut phys = PhysicalParams::default();
        phys.t_1 = phys.t_c;
        assert!(matches!(
            nondimensionalize(&phys, &ic),
            Err(Error::InvalidParameter { name: "T_1", .. })
        ));

        let phys = PhysicalParams::default();
        let ic = InitialConditions {
            s_gw0: 0.2,
            s_wi0: 0.2,
            ..Default::default()
        };
        assert!(matches!(
            nondimensionalize(&phys, &ic),
            Err(Error::InvalidInitialCondition(_))
        ));

        let mut phys = PhysicalParams::default();
        phys.rho_i = 1200.0;
        assert!(nondimensionalize(&phys, &InitialConditions::default()).is_err());
    }

    #[test]
    fn profiles() {
        let tab = Profile::Tabulated(vec![0.0, 1.0, 4.0]);
        assert_eq!(tab.eval(0.25), 0.5);
        assert_eq!(tab.eval(0.75), 2.5);
        assert_relative_eq!(tab.mean(), 1.5);
        let lin = Profile::Linear {
            left: 1.0,
            right: 3.0,
        };
        assert_eq!(lin.mean(), 2.0);
        let custom = Profile::Custom(Arc::new(|y: f64| y * y));
        assert_relative_eq!(custom.mean(), 1.0 / 3.0, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn groups_follow_their_formulas(scale in 0.1f64..100.0) {
            let mut phys = PhysicalParams::default();
            phys.l *= scale;
            let p = nondimensionalize(&phys, &InitialConditions::default()).unwrap();
            let g = p.groups;
            let (aw, ag, ai) = (phys.alpha_w(), phys.alpha_g(), phys.alpha_i());
            let dt1 = phys.t_1 - phys.t_c;
            let t_bar = phys.l * phys.l * phys.lambda * phys.rho_i / (phys.k_w * dt1);
            prop_assert!((p.scales.t_bar / t_bar - 1.0).abs() < 1e-14);
            prop_assert!((g.bi / (phys.l * phys.theta / phys.k_i) - 1.0).abs() < 1e-14);
            prop_assert!((g.le / (aw / phys.d_w) - 1.0).abs() < 1e-14);
            prop_assert!((g.st / (dt1 * phys.c_w / phys.lambda) - 1.0).abs() < 1e-14);
            prop_assert!((g.beta_w / (g.delta / g.st) - 1.0).abs() < 1e-12);
            prop_assert!((g.beta_g / (ag * g.beta_w / aw) - 1.0).abs() < 1e-12);
            prop_assert!((g.beta_i / (ai * g.beta_w / aw) - 1.0).abs() < 1e-12);
            // Everything but Bi is independent of the domain length.
            let b = base().groups;
            prop_assert!((g.eta / b.eta - 1.0).abs() < 1e-14);
            prop_assert!((g.beta_g / b.beta_g - 1.0).abs() < 1e-12);
            prop_assert!((p.eps / base().eps - 1.0).abs() < 1e-12);
        }
    }
}
