//! Shared fixtures for the benchmark targets.

use kg_core::{random_field, LatticeField, Mass, SpatialGrid, Spectrum};
use std::f64::consts::PI;

pub fn grid_1d(n: usize) -> SpatialGrid {
    SpatialGrid::new(&[n], &[2.0 * PI]).expect("valid grid")
}

pub fn grid_3d(n: usize) -> SpatialGrid {
    SpatialGrid::cubic(3, n, 2.0 * PI).expect("valid grid")
}

pub fn spectrum_on(grid: &SpatialGrid) -> Spectrum {
    random_field(grid, Mass::new(1.0).unwrap(), 7, grid.nyquist()).expect("spectrum")
}

pub fn field_on(grid: &SpatialGrid) -> LatticeField {
    spectrum_on(grid).to_lattice().expect("lattice field")
}
