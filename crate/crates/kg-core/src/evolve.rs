//! Time evolution: exact spectral phase rotation and a symplectic leapfrog
//! cross-check.
//!
//! Positive-frequency coefficients obey `i d/dt alpha = w alpha`, so exact
//! evolution is `alpha_k -> alpha_k e^{-i w_k dt}` — every `|alpha_k|`, and
//! with it every conserved product, is preserved to rounding. The leapfrog
//! integrator advances the same dynamics (`phi-ddot = -D phi`) with the
//! standard kick-drift-kick step; it is second order and symplectic, so its
//! norm error stays bounded and oscillatory instead of drifting.

use crate::error::{KgError, Result};
use crate::field::{omega_max, LatticeField, Spectrum};
use crate::ops::{apply_operator, OperatorKind};
use num_complex::Complex64;

/// Exact evolution by `dt`: per-bin phase rotation, time stamp advanced.
pub fn evolve_exact(s: &Spectrum, dt: f64) -> Spectrum {
    let omegas = crate::field::omegas(s.grid(), s.mass());
    let mut out = s.clone();
    for (a, w) in out.alpha_mut().iter_mut().zip(&omegas) {
        *a *= Complex64::from_polar(1.0, -w * dt);
    }
    out.set_time(s.time() + dt);
    out
}

/// Largest stable leapfrog step on this field's grid, `2 / omega_max`.
pub fn leapfrog_max_dt(f: &LatticeField) -> f64 {
    2.0 / omega_max(f.grid(), f.mass())
}

/// Leapfrog (kick-drift-kick) evolution over `steps` steps of size `dt`.
///
/// The stability bound `|dt| * omega_max < 2` is enforced, not warned:
/// an unstable run would silently corrupt any conservation study built on
/// top of it.
pub fn evolve_leapfrog(f: &LatticeField, dt: f64, steps: usize) -> Result<LatticeField> {
    let wmax = omega_max(f.grid(), f.mass());
    let product = dt.abs() * wmax;
    if steps > 0 && product >= 2.0 {
        return Err(KgError::LeapfrogUnstable {
            omega_max: wmax,
            max_dt: 2.0 / wmax,
            product,
        });
    }
    if steps == 0 {
        return Ok(f.clone());
    }
    let grid = f.grid().clone();
    let mass = f.mass();
    let mut phi = f.phi().to_vec();
    let mut pi = f.pi().to_vec();
    for _ in 0..steps {
        let dphi = apply_operator(OperatorKind::D, &phi, &grid, mass)?;
        for (p, d) in pi.iter_mut().zip(&dphi) {
            *p -= 0.5 * dt * d;
        }
        for (x, p) in phi.iter_mut().zip(&pi) {
            *x += dt * p;
        }
        let dphi = apply_operator(OperatorKind::D, &phi, &grid, mass)?;
        for (p, d) in pi.iter_mut().zip(&dphi) {
            *p -= 0.5 * dt * d;
        }
    }
    let time = f.time() + steps as f64 * dt;
    LatticeField::new(grid, mass, time, phi, pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{random_field, Mass, Spectrum};
    use crate::grid::SpatialGrid;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn grid_1d(n: usize) -> SpatialGrid {
        SpatialGrid::new(&[n], &[2.0 * PI]).unwrap()
    }

    fn mass1() -> Mass {
        Mass::new(1.0).unwrap()
    }

    #[test]
    fn zero_dt_is_identity() {
        let g = grid_1d(16);
        let s = random_field(&g, mass1(), 1, 4.0).unwrap();
        let s2 = evolve_exact(&s, 0.0);
        assert_eq!(s.alpha(), s2.alpha());
        assert_eq!(s.time(), s2.time());
    }

    #[test]
    fn full_period_returns_to_start() {
        let g = grid_1d(16);
        let m = mass1();
        let mut s = Spectrum::zero(g, m, 0.0);
        s.alpha_mut()[2] = Complex64::new(0.8, -0.1);
        let w = (4.0 + 1.0_f64).sqrt();
        let evolved = evolve_exact(&s, 2.0 * PI / w);
        assert!((evolved.alpha()[2] - s.alpha()[2]).norm() < 1e-13);
    }

    #[test]
    fn flow_composes() {
        let g = grid_1d(32);
        let s = random_field(&g, mass1(), 5, 8.0).unwrap();
        let a = evolve_exact(&evolve_exact(&s, 0.3), 0.45);
        let b = evolve_exact(&s, 0.75);
        let scale = s.alpha().iter().map(|a| a.norm()).fold(0.0, f64::max);
        for (x, y) in a.alpha().iter().zip(b.alpha()) {
            assert!((x - y).norm() < 1e-13 * scale.max(1.0));
        }
        assert_abs_diff_eq!(a.time(), b.time(), epsilon = 1e-15);
    }

    #[test]
    fn moduli_are_preserved_exactly_enough() {
        let g = grid_1d(64);
        let s = random_field(&g, mass1(), 6, 16.0).unwrap();
        let evolved = evolve_exact(&s, 17.3);
        for (a, b) in s.alpha().iter().zip(evolved.alpha()) {
            assert_abs_diff_eq!(a.norm(), b.norm(), epsilon = 1e-14 * a.norm().max(1e-30));
        }
    }

    #[test]
    fn leapfrog_zero_steps_is_bitwise_identity() {
        let g = grid_1d(16);
        let f = random_field(&g, mass1(), 2, 4.0)
            .unwrap()
            .to_lattice()
            .unwrap();
        let f2 = evolve_leapfrog(&f, 0.1, 0).unwrap();
        assert_eq!(f, f2);
    }

    #[test]
    fn leapfrog_stability_bound_enforced() {
        let g = grid_1d(64);
        let f = LatticeField::zero(g, mass1(), 0.0);
        let max_dt = leapfrog_max_dt(&f);
        match evolve_leapfrog(&f, max_dt * 1.01, 1) {
            Err(KgError::LeapfrogUnstable {
                omega_max, max_dt, ..
            }) => {
                assert!(omega_max > 32.0);
                assert!(max_dt < 2.0 / 32.0);
            }
            other => panic!("expected instability error, got {other:?}"),
        }
        assert!(evolve_leapfrog(&f, max_dt * 0.99, 1).is_ok());
    }

    #[test]
    fn leapfrog_k0_mode_converges_at_second_order() {
        // k = 0, m = 1: exact trajectory is cos(t); halving dt divides the
        // final error by ~4
        let g = grid_1d(8);
        let m = mass1();
        let f0 = LatticeField::new(g.clone(), m, 0.0, vec![1.0; 8], vec![0.0; 8]).unwrap();
        let t_final = 2.0;
        let mut errors = Vec::new();
        for steps in [40usize, 80, 160] {
            let dt = t_final / steps as f64;
            let f = evolve_leapfrog(&f0, dt, steps).unwrap();
            let exact = t_final.cos();
            errors.push((f.phi()[0] - exact).abs());
        }
        for pair in errors.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!(
                (3.5..=4.5).contains(&ratio),
                "convergence ratio {ratio} out of range, errors {errors:?}"
            );
        }
    }

    #[test]
    fn leapfrog_matches_exact_evolution_on_a_random_field() {
        let g = grid_1d(64);
        let m = mass1();
        let s = random_field(&g, m, 11, 8.0).unwrap();
        let f0 = s.to_lattice().unwrap();
        let t_final = 1.0;
        let steps = 2000;
        let lf = evolve_leapfrog(&f0, t_final / steps as f64, steps).unwrap();
        let ex = evolve_exact(&s, t_final).to_lattice().unwrap();
        let scale = ex.phi().iter().map(|x| x.abs()).fold(0.0, f64::max);
        let max_err = lf
            .phi()
            .iter()
            .zip(ex.phi())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        // (w dt)^2-sized phase error accumulated over t_final
        assert!(max_err < 1e-4 * scale, "error {max_err}, scale {scale}");
    }
}
