use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid initial condition: {0}")]
    InvalidInitialCondition(String),

    #[error("gas compartment collapsed (s_gw = {s_gw:e})")]
    GasCollapse { s_gw: f64 },

    #[error("interfaces out of order: s_gw = {s_gw}, s_wi = {s_wi}")]
    InterfaceOrder { s_gw: f64, s_wi: f64 },

    #[error("non-finite value in field `{field}` at index {index}")]
    NonFinite { field: &'static str, index: usize },

    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("maximum number of steps ({0}) exceeded")]
    TooManySteps(usize),

    #[error("time {t} outside trajectory range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("root not bracketed on [{a}, {b}]")]
    NotBracketed { a: f64, b: f64 },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
