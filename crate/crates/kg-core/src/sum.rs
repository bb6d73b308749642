//! Deterministic reductions.
//!
//! All quadrature sums in this crate go through pairwise summation so that
//! results do not depend on any parallel schedule and carry an O(log n)
//! rounding profile instead of O(n).

use num_complex::Complex64;

const PAIRWISE_BASE: usize = 32;

/// Pairwise sum of a real slice.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BASE {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise sum of a complex slice.
pub fn pairwise_sum_complex(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= PAIRWISE_BASE {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum_complex(&xs[..mid]) + pairwise_sum_complex(&xs[mid..])
}
