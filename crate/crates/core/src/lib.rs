//! Melting of an ice plug above a water layer and a trapped gas column in a
//! one-dimensional channel: a moving-mesh solver for the three-phase
//! free-boundary problem, its closed-form approximations, and diagnostics.

pub mod asymptotics;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod integrator;
pub mod model;
pub mod output;
pub mod params;
pub mod quad;
pub mod scenario;

pub use error::{Error, Result};
pub use model::{simulate, SimConfig, StopReason, Trajectory};
pub use output::{run, RunReport};
pub use params::{nondimensionalize, DimParams, InitialConditions, PhysicalParams, Profile};
pub use scenario::{list_presets, preset, Pipeline, Scenario};
