//! Periodic box geometry and the discrete wavevector lattice.
//!
//! A [`SpatialGrid`] is a `dim`-dimensional periodic box with `N` points and
//! length `L` per axis. Grid sites sit at `x_i = i * L / N` and the admissible
//! wavevectors are exactly `k = 2*pi*m/L` per axis with integer
//! `m in [-N/2, N/2)`, stored in standard DFT frequency order
//! (`0, 1, ..., N/2-1, -N/2, ..., -1`), row-major across axes.

use crate::error::{KgError, Result};
use std::f64::consts::PI;

/// Sites within this relative distance of an exact lattice wavevector are
/// treated as admissible; beyond it a mode is rejected.
const ADMISSIBLE_REL_TOL: f64 = 1e-9;

/// Periodic box geometry and lattice resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    points: Vec<usize>,
    lengths: Vec<f64>,
}

impl SpatialGrid {
    /// Build a grid from per-axis point counts and box lengths.
    ///
    /// Each axis needs an even point count of at least 4 and a positive
    /// length; 1, 2 and 3 dimensions are supported.
    pub fn new(points: &[usize], lengths: &[f64]) -> Result<Self> {
        let dim = points.len();
        if dim == 0 || dim > 3 || lengths.len() != dim {
            return Err(KgError::InvalidDim(if lengths.len() != dim {
                lengths.len().max(dim)
            } else {
                dim
            }));
        }
        for (axis, &n) in points.iter().enumerate() {
            if n < 4 || n % 2 != 0 {
                return Err(KgError::InvalidPoints { axis, points: n });
            }
        }
        for (axis, &l) in lengths.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(KgError::InvalidLength { axis, length: l });
            }
        }
        Ok(Self {
            points: points.to_vec(),
            lengths: lengths.to_vec(),
        })
    }

    /// Convenience constructor for a cubic grid: `n` points and length `l`
    /// along each of `dim` axes.
    pub fn cubic(dim: usize, n: usize, l: f64) -> Result<Self> {
        SpatialGrid::new(&vec![n; dim], &vec![l; dim])
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Total number of lattice sites (= number of wavevector bins).
    pub fn site_count(&self) -> usize {
        self.points.iter().product()
    }

    /// Box volume `V = prod(L_axis)`.
    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Uniform quadrature cell `V / N^d` (trapezoidal weight on a periodic
    /// grid, exact for band-limited integrands).
    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.site_count() as f64
    }

    /// Momentum-space cell `(2*pi)^d / V`, the natural `Mode` weight for a
    /// mode set that mirrors this box.
    pub fn mode_weight(&self) -> f64 {
        (2.0 * PI).powi(self.dim() as i32) / self.volume()
    }

    /// Largest admissible |k| along any single axis: `min_axis pi*N/L`.
    pub fn nyquist(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.lengths)
            .map(|(&n, &l)| PI * n as f64 / l)
            .fold(f64::INFINITY, f64::min)
    }

    /// Integer DFT frequency of bin index `i` on an axis with `n` points:
    /// `i` for `i < n/2`, `i - n` otherwise.
    pub fn axis_freq(i: usize, n: usize) -> i64 {
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Physical wavevector components `2*pi*m/L` along one axis, in DFT order.
    pub fn axis_wavenumbers(&self, axis: usize) -> Vec<f64> {
        let n = self.points[axis];
        let dk = 2.0 * PI / self.lengths[axis];
        (0..n).map(|i| Self::axis_freq(i, n) as f64 * dk).collect()
    }

    /// All wavevectors in canonical order: row-major over per-axis bin
    /// indices, each axis in DFT frequency order.
    pub fn wavevectors(&self) -> Vec<Vec<f64>> {
        let per_axis: Vec<Vec<f64>> = (0..self.dim()).map(|a| self.axis_wavenumbers(a)).collect();
        let mut out = Vec::with_capacity(self.site_count());
        let mut idx = vec![0usize; self.dim()];
        loop {
            out.push((0..self.dim()).map(|a| per_axis[a][idx[a]]).collect());
            if !self.advance(&mut idx) {
                break;
            }
        }
        out
    }

    /// Squared wavevector norm `k.k` per bin, canonical order.
    pub fn wavevector_norms_squared(&self) -> Vec<f64> {
        let per_axis: Vec<Vec<f64>> = (0..self.dim()).map(|a| self.axis_wavenumbers(a)).collect();
        let mut out = Vec::with_capacity(self.site_count());
        let mut idx = vec![0usize; self.dim()];
        loop {
            let k2: f64 = (0..self.dim()).map(|a| per_axis[a][idx[a]].powi(2)).sum();
            out.push(k2);
            if !self.advance(&mut idx) {
                break;
            }
        }
        out
    }

    /// Grid site positions `x_i = i * L / N`, canonical row-major order.
    pub fn positions(&self) -> Vec<Vec<f64>> {
        let steps: Vec<f64> = self
            .lengths
            .iter()
            .zip(&self.points)
            .map(|(&l, &n)| l / n as f64)
            .collect();
        let mut out = Vec::with_capacity(self.site_count());
        let mut idx = vec![0usize; self.dim()];
        loop {
            out.push((0..self.dim()).map(|a| idx[a] as f64 * steps[a]).collect());
            if !self.advance(&mut idx) {
                break;
            }
        }
        out
    }

    /// Flat index of the bin whose wavevector equals `k`, or `None` when any
    /// component is off the reciprocal lattice or out of range.
    pub fn wavevector_index(&self, k: &[f64]) -> Option<usize> {
        if k.len() != self.dim() {
            return None;
        }
        let mut flat = 0usize;
        for axis in 0..self.dim() {
            let n = self.points[axis] as i64;
            let dk = 2.0 * PI / self.lengths[axis];
            let m_real = k[axis] / dk;
            let m = m_real.round() as i64;
            let tol = ADMISSIBLE_REL_TOL * (1.0 + m_real.abs());
            if (m_real - m as f64).abs() > tol || m < -n / 2 || m >= n / 2 {
                return None;
            }
            let bin = if m >= 0 { m } else { m + n } as usize;
            flat = flat * self.points[axis] + bin;
        }
        Some(flat)
    }

    /// Row-major increment of a multi-index; returns false after the last.
    fn advance(&self, idx: &mut [usize]) -> bool {
        for axis in (0..idx.len()).rev() {
            idx[axis] += 1;
            if idx[axis] < self.points[axis] {
                return true;
            }
            idx[axis] = 0;
        }
        false
    }
}
