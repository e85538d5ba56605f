use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("resolution mismatch: {0}")]
    ResolutionMismatch(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("mobility overflow at C = {value}: F(C) is not finite")]
    MobilityOverflow { value: f64 },

    #[error("non-finite {what} at t = {t}")]
    NonFinite { what: &'static str, t: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("velocity Gram matrix is not positive definite")]
    GramFactorization,

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("sample outside amplitude box |C| <= {bound}: max |C| = {found}")]
    OutsideAmplitudeBox { bound: f64, found: f64 },

    #[error("{0}")]
    Inconclusive(String),

    #[error("configuration error(s):\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("tabulated forcing {path}: {reason}")]
    Tabulated { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
