use thiserror::Error;

use crate::weyl::Site;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qudit dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: u8, right: u8 },

    #[error("operator modes differ: {left} vs {right}")]
    ModeMismatch { left: String, right: String },

    #[error("site {0} is in the string support but not in the window")]
    WindowMissesSite(Site),

    #[error("invalid string: {0}")]
    InvalidString(String),

    #[error("the identity string has no anchor")]
    IdentityAnchor,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("Hamiltonian is not Hermitian: {0}")]
    NotHermitian(String),

    #[error("operator is zero")]
    ZeroOperator,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("need at least {needed} Lanczos coefficients, got {available}")]
    NotEnoughCoefficients { needed: usize, available: usize },

    #[error("fit needs at least {needed} points at n >= {n_min}, got {available}")]
    TooFewPoints {
        needed: usize,
        available: usize,
        n_min: usize,
    },

    #[error("fit did not converge from any starting point")]
    FitNotConverged,

    #[error("extrapolation gives non-positive b_{n} = {value}")]
    UnphysicalExtrapolation { n: usize, value: f64 },

    #[error("chain boundary reached (|phi_last| = {amplitude:e} at t = {time}); use a longer chain")]
    BoundaryReflection { time: f64, amplitude: f64 },

    #[error("time grid must be increasing and start at or after 0")]
    BadTimeGrid,

    #[error("equivalence-class exploration requires a finite lattice")]
    UnsupportedMode,

    #[error("class inventory is incomplete (cap of {cap} strings hit)")]
    CapHit { cap: usize },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("system too large for the dense oracle: {dim} > {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },

    #[error("snapshot error: {0}")]
    Snapshot(#[from] bincode::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
