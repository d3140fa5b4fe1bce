//! Named scenarios and the flat `key = value` configuration format.
//!
//! A config file is a list of `key = value` lines; `#` starts a comment.
//! A `preset` line selects the starting point (default `base`) no matter
//! where it appears, and every other line overrides one field of it.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SimConfig;
use crate::params::{InitialConditions, PhysicalParams, Profile};

pub const PRESET_NAMES: [&str; 5] = ["base", "cold", "hot", "supersaturated", "bigdomain"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    Numeric,
    Asymptotic,
    Compare,
}

impl Pipeline {
    pub const ALL: [Pipeline; 3] = [Pipeline::Numeric, Pipeline::Asymptotic, Pipeline::Compare];

    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Numeric => "numeric",
            Pipeline::Asymptotic => "asymptotic",
            Pipeline::Compare => "compare",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s.trim())
    }
}

/// Parse a comma-separated pipeline list such as `numeric,compare`.
pub fn parse_pipelines(s: &str) -> std::result::Result<Vec<Pipeline>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let p = Pipeline::parse(part).ok_or_else(|| format!("unknown pipeline `{part}`"))?;
        if !out.contains(&p) {
            out.push(p);
        }
    }
    if out.is_empty() {
        return Err("empty pipeline list".into());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cadence {
    Log,
    Linear,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub physical: PhysicalParams,
    pub initial: InitialConditions,
    pub n: usize,
    pub t_end: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub melt_margin: f64,
    /// Step budget of the integrator.
    pub max_steps: usize,
    /// Number of output samples on the trajectory time grid.
    pub samples: usize,
    pub cadence: Cadence,
    /// First sample time of a log-spaced grid.
    pub t_first: f64,
    pub profile_times: Vec<f64>,
    pub pipelines: Vec<Pipeline>,
    pub dimensional: bool,
    pub modes: usize,
    pub gram_correction: bool,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "base".into(),
            physical: PhysicalParams::default(),
            initial: InitialConditions::default(),
            n: 64,
            t_end: 10.0,
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            melt_margin: 1e-4,
            max_steps: 200_000,
            samples: 200,
            cadence: Cadence::Log,
            t_first: 1e-9,
            profile_times: vec![1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.1, 1.0, 2.0, 3.0],
            pipelines: Pipeline::ALL.to_vec(),
            dimensional: false,
            modes: crate::asymptotics::DEFAULT_MODES,
            gram_correction: false,
        }
    }
}

pub fn preset(name: &str) -> Result<Scenario> {
    let mut s = Scenario {
        name: name.to_string(),
        ..Scenario::default()
    };
    let tc = s.physical.t_c;
    match name {
        "base" => {}
        "cold" => s.physical.t_2 = tc - 0.02,
        "hot" => {
            s.physical.t_1 = tc + 1.0;
            s.physical.t_2 = tc - 1.0;
        }
        "supersaturated" => s.initial.c0 = Profile::Constant(0.055),
        "bigdomain" => {
            s.physical.l = 1e-2;
            s.t_end = 40.0;
            s.profile_times = vec![1e-6, 1e-3, 1.0, 5.0, 10.0];
        }
        other => return Err(Error::UnknownPreset(other.to_string())),
    }
    Ok(s)
}

fn preset_description(name: &str) -> &'static str {
    match name {
        "base" => "boundary temperatures T_c + 0.005 and T_c - 0.005, dissolved gas starts at zero",
        "cold" => "colder ambient, T_2 = T_c - 0.02",
        "hot" => "large temperature contrast, T_1 = T_c + 1 and T_2 = T_c - 1",
        "supersaturated" => "water initially holds twice the steady dissolved gas, C0 = 0.055",
        "bigdomain" => "channel length 1 cm, where the front series loses accuracy",
        _ => "",
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PresetSummary {
    pub name: String,
    pub description: String,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "T1_minus_Tc")]
    pub t1_minus_tc: f64,
    #[serde(rename = "T2_minus_Tc")]
    pub t2_minus_tc: f64,
    #[serde(rename = "C0")]
    pub c0: String,
    pub s_gw0: f64,
    pub s_wi0: f64,
    pub t_end: f64,
}

fn tidy(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

/// Presets in a stable order with their distinguishing parameters.
pub fn list_presets() -> Vec<PresetSummary> {
    PRESET_NAMES
        .iter()
        .map(|&name| {
            let s = preset(name).expect("built-in preset");
            PresetSummary {
                name: name.to_string(),
                description: preset_description(name).to_string(),
                l: s.physical.l,
                t1_minus_tc: tidy(s.physical.t_1 - s.physical.t_c),
                t2_minus_tc: tidy(s.physical.t_2 - s.physical.t_c),
                c0: s.initial.c0.to_string(),
                s_gw0: s.initial.s_gw0,
                s_wi0: s.initial.s_wi0,
                t_end: s.t_end,
            }
        })
        .collect()
}

/// Parse `0.05`, `linear(a, b)` or `table(v0 v1 ...)`.
pub fn parse_profile(text: &str) -> std::result::Result<Profile, String> {
    let t = text.trim();
    let inner = |prefix: &str| -> Option<&str> {
        t.strip_prefix(prefix)
            .map(str::trim_start)
            .and_then(|r| r.strip_prefix('('))
            .and_then(|r| r.strip_suffix(')'))
    };
    let num = |s: &str| -> std::result::Result<f64, String> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{}` is not a number", s.trim()))
    };
    if let Some(body) = inner("linear") {
        let parts: Vec<&str> = body.split(',').collect();
        if parts.len() != 2 {
            return Err("linear(...) takes two values".into());
        }
        return Ok(Profile::Linear {
            left: num(parts[0])?,
            right: num(parts[1])?,
        });
    }
    if let Some(body) = inner("table") {
        let values = body
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(num)
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if values.is_empty() {
            return Err("table(...) needs at least one value".into());
        }
        return Ok(Profile::Tabulated(values));
    }
    Ok(Profile::Constant(num(t)?))
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("`{other}` is not a boolean")),
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| format!("`{p}` is not a number"))
        })
        .collect()
}

impl Scenario {
    /// Apply one `key = value` override.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = value.trim();
        let number = || -> std::result::Result<f64, String> {
            v.parse::<f64>()
                .map_err(|_| format!("`{v}` is not a number"))
        };
        let count = || -> std::result::Result<usize, String> {
            v.parse::<usize>()
                .map_err(|_| format!("`{v}` is not a non-negative integer"))
        };
        match key {
            "name" => self.name = v.to_string(),
            "preset" => return Err("preset may only be given once".into()),
            "s_gw0" => self.initial.s_gw0 = number()?,
            "s_wi0" => self.initial.s_wi0 = number()?,
            "C0" => self.initial.c0 = parse_profile(v)?,
            "Tg0" => self.initial.tg0 = parse_profile(v)?,
            "Tw0" => self.initial.tw0 = parse_profile(v)?,
            "Ti0" => {
                self.initial.ti0 = if v == "ambient" {
                    None
                } else {
                    Some(parse_profile(v)?)
                }
            }
            "N" => self.n = count()?,
            "t_end" => self.t_end = number()?,
            "abs_tol" => self.abs_tol = number()?,
            "rel_tol" => self.rel_tol = number()?,
            "melt_margin" => self.melt_margin = number()?,
            "max_steps" => self.max_steps = count()?,
            "samples" => self.samples = count()?,
            "cadence" => {
                self.cadence = match v {
                    "log" => Cadence::Log,
                    "linear" => Cadence::Linear,
                    _ => return Err(format!("cadence must be `log` or `linear`, got `{v}`")),
                }
            }
            "t_first" => self.t_first = number()?,
            "profile_times" => self.profile_times = parse_list(v)?,
            "pipelines" => self.pipelines = parse_pipelines(v)?,
            "dimensional" => self.dimensional = parse_bool(v)?,
            "modes" => self.modes = count()?,
            "gram_correction" => self.gram_correction = parse_bool(v)?,
            _ => {
                let slot = self
                    .physical
                    .field_mut(key)
                    .ok_or_else(|| format!("unknown key `{key}`"))?;
                *slot = number()?;
            }
        }
        Ok(())
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut preset_name: Option<(usize, String)> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(Error::Config {
                    line: line_no,
                    message: "missing key".into(),
                });
            }
            if key == "preset" {
                if preset_name.is_some() {
                    return Err(Error::Config {
                        line: line_no,
                        message: "preset may only be given once".into(),
                    });
                }
                preset_name = Some((line_no, value.to_string()));
            } else {
                entries.push((line_no, key.to_string(), value.to_string()));
            }
        }
        let mut scenario = match preset_name {
            Some((line, name)) => preset(&name).map_err(|e| Error::Config {
                line,
                message: e.to_string(),
            })?,
            None => Scenario::default(),
        };
        for (line, key, value) in entries {
            scenario
                .set(&key, &value)
                .map_err(|message| Error::Config { line, message })?;
        }
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut s = Self::from_config_str(&text)?;
        if !text
            .lines()
            .any(|l| l.split('#').next().unwrap_or("").trim().starts_with("name"))
        {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                s.name = stem.to_string();
            }
        }
        Ok(s)
    }

    /// A preset name or a path to a config file.
    pub fn resolve(spec: &str) -> Result<Self> {
        if PRESET_NAMES.contains(&spec) {
            return preset(spec);
        }
        let path = Path::new(spec);
        if path.exists() {
            return Self::from_file(path);
        }
        Err(Error::UnknownPreset(spec.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.physical.validate()?;
        self.initial.validate()?;
        let bad =
            |name: &'static str, reason: String| Err(Error::InvalidParameter { name, reason });
        if self.n < crate::grid::MIN_CELLS {
            return bad(
                "N",
                format!(
                    "need at least {} cells, got {}",
                    crate::grid::MIN_CELLS,
                    self.n
                ),
            );
        }
        if !(self.t_end > 0.0) {
            return bad("t_end", format!("must be positive, got {}", self.t_end));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return bad("abs_tol", "tolerances must be positive".into());
        }
        if self.samples < 2 {
            return bad("samples", "need at least two samples".into());
        }
        if !(self.t_first > 0.0 && self.t_first < self.t_end) {
            return bad(
                "t_first",
                format!("must lie in (0, t_end), got {}", self.t_first),
            );
        }
        if self.modes == 0 {
            return bad("modes", "need at least one mode".into());
        }
        if self.pipelines.is_empty() {
            return bad("pipelines", "nothing to run".into());
        }
        Ok(())
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            n: self.n,
            t_end: self.t_end,
            rtol: self.rel_tol,
            atol: self.abs_tol,
            melt_margin: self.melt_margin,
            max_steps: self.max_steps,
            tstops: self.sample_times(),
            ..SimConfig::default()
        }
    }

    /// Output times covering `(0, t_end]`.
    pub fn sample_times(&self) -> Vec<f64> {
        match self.cadence {
            Cadence::Log => crate::diagnostics::log_space(self.t_first, self.t_end, self.samples),
            Cadence::Linear => (1..=self.samples)
                .map(|k| self.t_end * k as f64 / self.samples as f64)
                .collect(),
        }
    }

    /// The fully resolved configuration, parseable by
    /// [`Scenario::from_config_str`].
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line("name", self.name.clone());
        for (k, v) in self.physical.entries() {
            line(k, v.to_string());
        }
        let ic = &self.initial;
        line("s_gw0", ic.s_gw0.to_string());
        line("s_wi0", ic.s_wi0.to_string());
        line("C0", ic.c0.to_string());
        line("Tg0", ic.tg0.to_string());
        line("Tw0", ic.tw0.to_string());
        line(
            "Ti0",
            ic.ti0.as_ref().map_or("ambient".into(), |p| p.to_string()),
        );
        line("N", self.n.to_string());
        line("t_end", self.t_end.to_string());
        line("abs_tol", self.abs_tol.to_string());
        line("rel_tol", self.rel_tol.to_string());
        line("melt_margin", self.melt_margin.to_string());
        line("max_steps", self.max_steps.to_string());
        line("samples", self.samples.to_string());
        line(
            "cadence",
            match self.cadence {
                Cadence::Log => "log",
                Cadence::Linear => "linear",
            }
            .into(),
        );
        line("t_first", self.t_first.to_string());
        line(
            "profile_times",
            self.profile_times
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(", "),
        );
        line(
            "pipelines",
            self.pipelines
                .iter()
                .map(|p| p.name())
                .collect::<Vec<_>>()
                .join(","),
        );
        line("dimensional", self.dimensional.to_string());
        line("modes", self.modes.to_string());
        line("gram_correction", self.gram_correction.to_string());
        out
    }
}
