//! Error type shared by the whole crate.

use thiserror::Error;

/// Errors produced by grid construction, field conversions, operators and
/// the verification harness.
#[derive(Debug, Error)]
pub enum KgError {
    #[error("grid dimension must be 1, 2 or 3 (got {0})")]
    InvalidDim(usize),

    #[error("lattice size along axis {axis} must be even and >= 4 (got {points})")]
    InvalidPoints { axis: usize, points: usize },

    #[error("box length along axis {axis} must be positive and finite (got {length})")]
    InvalidLength { axis: usize, length: f64 },

    #[error("mass must be strictly positive and finite (got {0})")]
    InvalidMass(f64),

    #[error("array length {got} does not match grid site count {expected}")]
    LengthMismatch { got: usize, expected: usize },

    #[error("mode {index} has wavevector {k:?} that is not admissible on the grid")]
    NonAdmissibleMode { index: usize, k: Vec<f64> },

    #[error("mode {index} duplicates the wavevector {k:?} of an earlier mode")]
    DuplicateMode { index: usize, k: Vec<f64> },

    #[error("mode {index} has non-positive weight {weight}")]
    InvalidWeight { index: usize, weight: f64 },

    #[error("mode wavevector has {got} components, expected {expected}")]
    ModeDimMismatch { got: usize, expected: usize },

    #[error("fields do not match: {0}")]
    FieldMismatch(String),

    #[error("mode sets cannot be aligned: {0}")]
    UnalignableModeSets(String),

    #[error("boost axis {axis} out of range for dimension {dim}")]
    InvalidAxis { axis: usize, dim: usize },

    #[error("band limit {band_limit} is not in [0, {nyquist}] (per-axis Nyquist)")]
    InvalidBandLimit { band_limit: f64, nyquist: f64 },

    #[error("scale b must be strictly positive (got {0})")]
    InvalidScale(f64),

    #[error(
        "leapfrog unstable: dt*omega_max = {product:.6} >= 2 \
         (omega_max = {omega_max:.6}, largest stable dt = {max_dt:.6e})"
    )]
    LeapfrogUnstable {
        omega_max: f64,
        max_dt: f64,
        product: f64,
    },

    #[error(
        "inverse transform left imaginary residue {residue:.3e}, \
         above the consistency limit {limit:.3e}"
    )]
    ImaginaryResidue { residue: f64, limit: f64 },

    #[error("unknown suite name '{0}'")]
    UnknownSuite(String),

    #[error("snapshot format error: {0}")]
    SnapshotFormat(String),

    #[error("mode set JSON error: {0}")]
    ModeSetJson(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, KgError>;
