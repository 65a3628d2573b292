//! Scalar wave-optics simulation of the unfolded Kim-Shih ghost-imaging
//! geometry, plus a finite-dimensional toolkit for conditional-measurement
//! uncertainty checks.
//!
//! The crate is organised around the planes of the unfolded experiment:
//! `field` provides 1-D complex fields and free-space propagators, `elements`
//! the thin lens and apertures, `experiment` the full optical train and
//! coincidence simulations, `analysis` width metrics and uncertainty
//! products, `conditional` the quantum linear-algebra checks, and `cli` the
//! scenario runner behind the `popper` binary.

pub mod analysis;
pub mod cli;
pub mod conditional;
pub mod elements;
pub mod experiment;
pub mod field;

/// Planck constant, J s (SI exact).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant h/2π, J s. Derived rather than quoted so that
/// identities like Δy·Δk·ħ = Δy·Δp hold to machine precision.
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite amplitude at sample index {index}")]
    NonFiniteAmplitude { index: usize },
    #[error("invalid wavelength: {0} m (must be > 0)")]
    InvalidWavelength(f64),
    #[error("propagation distance must be {requirement}, got {value} m")]
    InvalidDistance { requirement: &'static str, value: f64 },
    #[error("field has zero power")]
    ZeroPower,
    #[error("invalid optical element: {0}")]
    InvalidElement(String),
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error("plane order violation: {from:?} does not precede {to:?}")]
    PlaneOrder { from: &'static str, to: &'static str },
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("width not measurable: {0}")]
    WidthNotMeasurable(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid quantum state: {0}")]
    InvalidState(String),
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("conditioning on impossible event (outcome probability {probability:.3e})")]
    ImpossibleCondition { probability: f64 },
    #[error("config error at {location}: {message}")]
    Config { location: String, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
