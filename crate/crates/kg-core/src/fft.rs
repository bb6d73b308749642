//! DFT engine with the crate-wide transform convention.
//!
//! Forward: `fhat_k = (V/N^d) * sum_x f(x) exp(-i k.x)`.
//! Inverse: `f(x) = (1/V) * sum_k fhat_k exp(+i k.x)`.
//!
//! The scaling is chosen so lattice sums converge to continuum integrals as
//! the grid is refined; every formula in the crate assumes it. Transforms are
//! exact Fourier-multiplier arithmetic on top of rustfft, applied axis by
//! axis over the row-major layout.

use crate::error::{KgError, Result};
use crate::grid::SpatialGrid;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

type PlanKey = (usize, bool);

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
    static PLAN_CACHE: RefCell<HashMap<PlanKey, Arc<dyn Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLAN_CACHE.with(|cache| {
        cache
            .borrow_mut()
            .entry((len, forward))
            .or_insert_with(|| {
                PLANNER.with(|p| {
                    let mut p = p.borrow_mut();
                    if forward {
                        p.plan_fft_forward(len)
                    } else {
                        p.plan_fft_inverse(len)
                    }
                })
            })
            .clone()
    })
}

/// Unnormalized per-axis FFT pass over the flattened row-major array.
fn transform_axes(grid: &SpatialGrid, data: &mut [Complex64], forward: bool) {
    debug_assert_eq!(data.len(), grid.site_count());
    let dims = grid.points();
    let total = grid.site_count();
    for axis in 0..dims.len() {
        let n = dims[axis];
        let fft = plan(n, forward);
        // stride between consecutive elements along `axis`
        let stride: usize = dims[axis + 1..].iter().product();
        let lines = total / n;
        let mut buf = vec![Complex64::default(); n];
        for line in 0..lines {
            // first flat index of this line: split the line counter into the
            // part indexing the slower axes and the part inside the stride
            let outer = line / stride;
            let inner = line % stride;
            let base = outer * n * stride + inner;
            for (j, b) in buf.iter_mut().enumerate() {
                *b = data[base + j * stride];
            }
            fft.process(&mut buf);
            for (j, b) in buf.iter().enumerate() {
                data[base + j * stride] = *b;
            }
        }
    }
}

/// Forward transform of complex data, in place.
pub fn forward(grid: &SpatialGrid, data: &mut [Complex64]) {
    transform_axes(grid, data, true);
    let scale = grid.volume() / grid.site_count() as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Inverse transform of complex data, in place.
pub fn inverse(grid: &SpatialGrid, data: &mut [Complex64]) {
    transform_axes(grid, data, false);
    let scale = 1.0 / grid.volume();
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Forward transform of a real array.
pub fn forward_real(grid: &SpatialGrid, data: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    forward(grid, &mut buf);
    buf
}

/// Drop imaginary parts after checking they are consistency noise.
///
/// The limit scales with the field amplitude; anything above it indicates an
/// internal error (a multiplier that should have produced a real field did
/// not) and is reported instead of silently discarded.
pub fn into_real(data: Vec<Complex64>, rel_limit: f64) -> Result<Vec<f64>> {
    let scale = data
        .iter()
        .map(|v| v.re.abs())
        .fold(0.0_f64, f64::max)
        .max(1.0);
    let residue = data.iter().map(|v| v.im.abs()).fold(0.0_f64, f64::max);
    let limit = rel_limit * scale;
    if residue > limit {
        return Err(KgError::ImaginaryResidue { residue, limit });
    }
    Ok(data.into_iter().map(|v| v.re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn forward_of_cosine_hits_two_bins() {
        // f(x) = cos(x) on [0, 2pi): fhat_{k=1} = fhat_{k=-1} = V/2 = pi
        let g = SpatialGrid::new(&[8], &[2.0 * PI]).unwrap();
        let f: Vec<f64> = g.positions().iter().map(|x| x[0].cos()).collect();
        let fhat = forward_real(&g, &f);
        assert_abs_diff_eq!(fhat[1].re, PI, epsilon = 1e-12);
        assert_abs_diff_eq!(fhat[7].re, PI, epsilon = 1e-12);
        let rest: f64 = fhat
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 1 && *i != 7)
            .map(|(_, v)| v.norm())
            .sum();
        assert!(rest < 1e-12);
    }

    #[test]
    fn roundtrip_is_identity() {
        let g = SpatialGrid::new(&[8, 6], &[2.0, 3.0]).unwrap();
        let orig: Vec<Complex64> = (0..g.site_count())
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut data = orig.clone();
        forward(&g, &mut data);
        inverse(&g, &mut data);
        for (a, b) in orig.iter().zip(&data) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn constant_field_transforms_to_zero_bin() {
        let g = SpatialGrid::cubic(2, 4, 1.5).unwrap();
        let f = vec![2.5; g.site_count()];
        let fhat = forward_real(&g, &f);
        assert_abs_diff_eq!(fhat[0].re, 2.5 * g.volume(), epsilon = 1e-12);
        for v in &fhat[1..] {
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn into_real_rejects_large_residue() {
        let data = vec![Complex64::new(1.0, 0.5)];
        assert!(matches!(
            into_real(data, 1e-10),
            Err(KgError::ImaginaryResidue { .. })
        ));
    }

    #[test]
    fn transform_matches_direct_dft_3d() {
        let g = SpatialGrid::cubic(3, 4, 2.0 * PI).unwrap();
        let f: Vec<f64> = (0..g.site_count()).map(|i| ((i * 7 % 13) as f64) - 6.0).collect();
        let fhat = forward_real(&g, &f);
        // direct O(N^2) DFT at a few bins
        let xs = g.positions();
        let ks = g.wavevectors();
        let cell = g.cell_volume();
        for &bin in &[0usize, 1, 5, 17, 63] {
            let mut acc = Complex64::default();
            for (x, &fx) in xs.iter().zip(&f) {
                let phase: f64 = ks[bin].iter().zip(x).map(|(k, x)| k * x).sum();
                acc += Complex64::from_polar(fx, -phase);
            }
            acc *= cell;
            assert!((acc - fhat[bin]).norm() < 1e-10, "bin {bin}");
        }
    }
}
