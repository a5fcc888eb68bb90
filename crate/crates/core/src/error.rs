use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, LandauError>;

#[derive(Debug, Error)]
pub enum LandauError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("index {index:?} outside the {size}-point lattice")]
    IndexOutOfRange { index: [i64; 3], size: usize },

    #[error("array of length {found} does not match a {size}³ lattice")]
    Shape { size: usize, found: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("derivative order {0} exceeds the supported maximum of 3")]
    DerivativeOrder(u32),

    #[error("synthesized field is not real: imaginary residue {residue:.3e} exceeds tolerance {tolerance:.3e}")]
    Realness { residue: f64, tolerance: f64 },

    #[error("kernel quadrature is not real: max |Im|/max |Re| = {ratio:.3e}")]
    KernelQuadrature { ratio: f64 },

    #[error("kernel table fine resolution {fine} must be even and at least {min}")]
    KernelResolution { fine: usize, min: usize },

    #[error("{path}: header mismatch, expected {expected}, found {found}")]
    HeaderMismatch { path: PathBuf, expected: String, found: String },

    #[error("{path}: {reason}")]
    Integrity { path: PathBuf, reason: String },

    #[error("degenerate state: mass {0} is not positive")]
    DegenerateState(f64),

    #[error("invalid reference distribution: value {value} at node {index:?} is not positive")]
    InvalidReference { index: [i64; 3], value: f64 },

    #[error("non-finite values at t = {t}, Runge-Kutta stage {stage}")]
    BlowUp { t: f64, stage: usize },

    #[error("lattice size {n} too large for the dense reference path (max {max})")]
    TooLarge { n: usize, max: usize },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
