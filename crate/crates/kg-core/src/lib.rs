//! Spectral toolkit for real Klein-Gordon fields on periodic lattices.
//!
//! The crate builds the positive inner product of the neutral scalar field in
//! its three equivalent forms (energy-split current, spatial quadratic form,
//! Fourier mode sum), together with the operator algebra behind it: exact
//! spectral `D = -laplace + m^2` and its roots, energy projectors and the
//! grading operator, exact and leapfrog time evolution, Lorentz boosts of
//! exact mode sets, and a verification harness that turns every identity
//! into a named, tolerance-pinned check.
//!
//! All values are immutable after construction and all operations are pure
//! functions; reductions use pairwise summation, so results do not depend on
//! any parallel schedule.

// kernels walk several parallel arrays by site index
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod evolve;
pub mod export;
pub mod field;
mod fft;
pub mod grid;
pub mod modes;
pub mod ops;
pub mod products;
pub mod snapshot;
pub mod sum;
pub mod verify;

pub use error::{KgError, Result};
pub use evolve::{evolve_exact, evolve_leapfrog, leapfrog_max_dt};
pub use field::{omega_max, omegas, random_field, LatticeField, Mass, Spectrum};
pub use grid::SpatialGrid;
pub use modes::{modeset_from_json, modeset_to_json, Mode, ModeSet};
pub use ops::{
    apply_operator, apply_operator_complex, grading, gradient, project, project_data,
    ComplexLatticeField, EnergySign, OperatorKind,
};
pub use products::{
    continuity_residual, continuity_residual_fd, current_charge, current_density,
    inner_product_modes, inner_product_modeset, inner_product_quadform, inner_product_spatial,
    matrix_m_eigenvalues, naive_symplectic, norm, norm_contributions, norm_modeset, norm_spectrum,
    total_energy, Current4, MEigenvalues, ProductParams,
};
pub use verify::{
    convergence_study, run_suite, CheckResult, ConvergenceTable, GridSpec, Report, Suite,
    SuiteConfig,
};
