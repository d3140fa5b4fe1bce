//! Browser bindings: front-position series, the concentration eigenvalue
//! problem, and a coarse full simulation.

use triphase::asymptotics::{eigenvalue_approx, eigenvalues, InterfaceSeries};
use triphase::diagnostics::log_space;
use triphase::{nondimensionalize, preset, simulate, Scenario};
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn scenario(name: &str, t1_offset: f64, t2_offset: f64, length: f64) -> Result<Scenario, JsValue> {
    let mut s = preset(name).map_err(js_err)?;
    let tc = s.physical.t_c;
    s.physical.t_1 = tc + t1_offset;
    s.physical.t_2 = tc + t2_offset;
    s.physical.l = length;
    s.validate().map_err(js_err)?;
    Ok(s)
}

/// Names of the built-in scenarios, comma separated.
#[wasm_bindgen]
pub fn preset_names() -> String {
    triphase::scenario::PRESET_NAMES.join(",")
}

/// Series approximations of the melting front on `count` times up to the
/// leading-order melt time.
///
/// Returns rows `[t, t_seconds, s0, s0 + Bi·s1, s_gw]` flattened.
#[wasm_bindgen]
pub fn front_series(
    name: &str,
    t1_offset: f64,
    t2_offset: f64,
    length: f64,
    count: usize,
) -> Result<Vec<f64>, JsValue> {
    let s = scenario(name, t1_offset, t2_offset, length)?;
    let p = nondimensionalize(&s.physical, &s.initial).map_err(js_err)?;
    let series = InterfaceSeries::new(&p);
    let end = series.melt_time_leading();
    let mut out = Vec::with_capacity(5 * count);
    for k in 0..count.max(2) {
        let t = end * k as f64 / (count.max(2) - 1) as f64;
        let pt = series.evaluate(t);
        out.extend([t, p.scales.time(t), pt.s0, pt.s_wi, pt.s_gw]);
    }
    Ok(out)
}

/// Dimensionless groups driving the front, as `[Bi, H, zeta, eps, t_bar]`.
#[wasm_bindgen]
pub fn groups(
    name: &str,
    t1_offset: f64,
    t2_offset: f64,
    length: f64,
) -> Result<Vec<f64>, JsValue> {
    let s = scenario(name, t1_offset, t2_offset, length)?;
    let p = nondimensionalize(&s.physical, &s.initial).map_err(js_err)?;
    Ok(vec![
        p.groups.bi,
        p.groups.henry,
        p.zeta,
        p.eps,
        p.scales.t_bar,
    ])
}

/// First `count` roots of `μζ + H tan μ = 0` with their small-H
/// approximations, as rows `[μ, approximation]`.
#[wasm_bindgen]
pub fn eigen_table(henry: f64, zeta: f64, count: usize) -> Result<Vec<f64>, JsValue> {
    let mu = eigenvalues(henry, zeta, count).map_err(js_err)?;
    Ok(mu
        .iter()
        .enumerate()
        .flat_map(|(k, &m)| [m, eigenvalue_approx(k + 1, henry, zeta)])
        .collect())
}

/// Coarse full simulation of a preset, sampled on a log time grid.
///
/// Returns rows `[t, s_gw, s_wi, C(x=1)]` flattened; the last row is the
/// final state.
#[wasm_bindgen]
pub fn quick_run(
    name: &str,
    cells: usize,
    t_end: f64,
    samples: usize,
) -> Result<Vec<f64>, JsValue> {
    let mut s = preset(name).map_err(js_err)?;
    s.n = cells;
    s.t_end = t_end;
    s.rel_tol = 1e-6;
    s.abs_tol = 1e-9;
    s.samples = samples.max(2);
    s.validate().map_err(js_err)?;
    let p = nondimensionalize(&s.physical, &s.initial).map_err(js_err)?;
    let traj = simulate(&p, &s.initial, &s.sim_config()).map_err(js_err)?;
    let end = traj.t_end();
    let mut times: Vec<f64> = log_space(1e-8f64.min(end), end, s.samples);
    times.insert(0, 0.0);
    let mut out = Vec::with_capacity(4 * times.len());
    for t in times {
        let st = traj.state_at(t).map_err(js_err)?;
        out.extend([t, st.s_gw(), st.s_wi(), traj.c_at_ice(&st)]);
    }
    Ok(out)
}
