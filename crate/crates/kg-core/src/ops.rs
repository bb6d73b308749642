//! Pseudo-differential operators and the energy projectors built from them.
//!
//! Every operator here is an exact Fourier multiplier: transform, multiply
//! each bin by a function of the on-shell frequency `w_k = sqrt(k.k + m^2)`,
//! transform back. `D = -laplace + m^2` acts as `w^2`, its roots as `w`,
//! `1/w`, `sqrt(w)`, `1/sqrt(w)`; all are strictly positive for `m > 0`, so
//! the operator algebra closes to rounding accuracy — no finite-difference
//! approximation appears anywhere.
//!
//! The energy projectors act on Cauchy data `(phi, pi)`:
//!
//! ```text
//! P(+-) phi = (phi +- i D^{-1/2} pi) / 2
//! ```
//!
//! and split a real field into complex positive/negative-frequency halves
//! with `P+ + P- = 1` exactly and `conj(phi+) = phi-` by construction. The
//! grading operator `N = D^{-1/2} i d/dt` is `P+ - P-` on solutions: it has
//! eigenvalue +1 on positive-frequency data, -1 on negative-frequency data,
//! and squares to the identity on shell.

use crate::error::{KgError, Result};
use crate::fft;
use crate::field::{omegas, LatticeField, Mass};
use crate::grid::SpatialGrid;
use num_complex::Complex64;

/// Fourier-multiplier selection for [`apply_operator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// `D = -laplace + m^2`, multiplier `w^2`.
    D,
    /// `D^{1/2}`, multiplier `w`.
    SqrtD,
    /// `D^{-1/2}`, multiplier `1/w`.
    InvSqrtD,
    /// `D^{1/4}`, multiplier `sqrt(w)`.
    QuarterD,
    /// `D^{-1/4}`, multiplier `1/sqrt(w)`.
    InvQuarterD,
}

impl OperatorKind {
    pub fn multiplier(self, omega: f64) -> f64 {
        match self {
            OperatorKind::D => omega * omega,
            OperatorKind::SqrtD => omega,
            OperatorKind::InvSqrtD => 1.0 / omega,
            OperatorKind::QuarterD => omega.sqrt(),
            OperatorKind::InvQuarterD => 1.0 / omega.sqrt(),
        }
    }
}

fn check_len(len: usize, grid: &SpatialGrid) -> Result<()> {
    if len != grid.site_count() {
        return Err(KgError::LengthMismatch {
            got: len,
            expected: grid.site_count(),
        });
    }
    Ok(())
}

/// Apply a diagonal-in-k multiplier to complex data.
fn apply_multiplier(grid: &SpatialGrid, data: &mut [Complex64], mult: &[f64]) {
    fft::forward(grid, data);
    for (v, m) in data.iter_mut().zip(mult) {
        *v *= m;
    }
    fft::inverse(grid, data);
}

/// Apply an operator to a complex lattice array.
pub fn apply_operator_complex(
    kind: OperatorKind,
    data: &[Complex64],
    grid: &SpatialGrid,
    mass: Mass,
) -> Result<Vec<Complex64>> {
    check_len(data.len(), grid)?;
    let mult: Vec<f64> = omegas(grid, mass)
        .into_iter()
        .map(|w| kind.multiplier(w))
        .collect();
    let mut out = data.to_vec();
    apply_multiplier(grid, &mut out, &mult);
    Ok(out)
}

/// Apply an operator to a real lattice array. The even multiplier keeps the
/// result real; residual imaginary parts are checked and discarded.
pub fn apply_operator(
    kind: OperatorKind,
    data: &[f64],
    grid: &SpatialGrid,
    mass: Mass,
) -> Result<Vec<f64>> {
    check_len(data.len(), grid)?;
    let mult: Vec<f64> = omegas(grid, mass)
        .into_iter()
        .map(|w| kind.multiplier(w))
        .collect();
    let mut buf: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    apply_multiplier(grid, &mut buf, &mult);
    fft::into_real(buf, 1e-10)
}

/// Spectral gradient components of a real array.
///
/// The first-derivative multiplier `i k` is odd, so the sign of the Nyquist
/// bin is ambiguous; that bin is zeroed (the standard convention), which also
/// keeps real input real. Fields banded below Nyquist are differentiated
/// exactly.
pub fn gradient(data: &[f64], grid: &SpatialGrid) -> Result<Vec<Vec<f64>>> {
    check_len(data.len(), grid)?;
    let buf: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    gradient_complex(&buf, grid)?
        .into_iter()
        .map(|c| fft::into_real(c, 1e-10))
        .collect()
}

/// Spectral gradient components of a complex array (Nyquist bins zeroed).
pub fn gradient_complex(data: &[Complex64], grid: &SpatialGrid) -> Result<Vec<Vec<Complex64>>> {
    check_len(data.len(), grid)?;
    let mut hat = data.to_vec();
    fft::forward(grid, &mut hat);
    let dims = grid.points();
    let mut out = Vec::with_capacity(grid.dim());
    for axis in 0..grid.dim() {
        let ks = grid.axis_wavenumbers(axis);
        let stride: usize = dims[axis + 1..].iter().product();
        let n = dims[axis];
        let mut comp = hat.clone();
        for (flat, v) in comp.iter_mut().enumerate() {
            let bin = (flat / stride) % n;
            if bin == n / 2 {
                *v = Complex64::default();
            } else {
                *v *= Complex64::new(0.0, ks[bin]);
            }
        }
        fft::inverse(grid, &mut comp);
        out.push(comp);
    }
    Ok(out)
}

/// Spectral divergence of a complex vector field (Nyquist bins zeroed).
pub fn divergence_complex(components: &[Vec<Complex64>], grid: &SpatialGrid) -> Result<Vec<Complex64>> {
    if components.len() != grid.dim() {
        return Err(KgError::FieldMismatch(format!(
            "divergence expects {} components, got {}",
            grid.dim(),
            components.len()
        )));
    }
    let dims = grid.points();
    let mut acc = vec![Complex64::default(); grid.site_count()];
    for (axis, comp) in components.iter().enumerate() {
        check_len(comp.len(), grid)?;
        let mut hat = comp.clone();
        fft::forward(grid, &mut hat);
        let ks = grid.axis_wavenumbers(axis);
        let stride: usize = dims[axis + 1..].iter().product();
        let n = dims[axis];
        for (flat, v) in hat.iter_mut().enumerate() {
            let bin = (flat / stride) % n;
            if bin == n / 2 {
                *v = Complex64::default();
            } else {
                *v *= Complex64::new(0.0, ks[bin]);
            }
        }
        fft::inverse(grid, &mut hat);
        for (a, v) in acc.iter_mut().zip(&hat) {
            *a += v;
        }
    }
    Ok(acc)
}

/// Complex-valued field over grid sites; the natural home of `phi(+-)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexLatticeField {
    grid: SpatialGrid,
    mass: Mass,
    time: f64,
    values: Vec<Complex64>,
}

impl ComplexLatticeField {
    pub fn new(grid: SpatialGrid, mass: Mass, time: f64, values: Vec<Complex64>) -> Result<Self> {
        check_len(values.len(), &grid)?;
        Ok(Self {
            grid,
            mass,
            time,
            values,
        })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn mass(&self) -> Mass {
        self.mass
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Largest pointwise distance to another complex field.
    pub fn max_abs_diff(&self, other: &ComplexLatticeField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Which energy half-space a projector selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergySign {
    Positive,
    Negative,
}

impl EnergySign {
    fn factor(self) -> f64 {
        match self {
            EnergySign::Positive => 1.0,
            EnergySign::Negative => -1.0,
        }
    }
}

/// Projector core on complex Cauchy data: `(phi +- i D^{-1/2} pi) / 2`.
pub fn project_data(
    sign: EnergySign,
    phi: &[Complex64],
    pi: &[Complex64],
    grid: &SpatialGrid,
    mass: Mass,
) -> Result<Vec<Complex64>> {
    check_len(phi.len(), grid)?;
    check_len(pi.len(), grid)?;
    let u = apply_operator_complex(OperatorKind::InvSqrtD, pi, grid, mass)?;
    let s = sign.factor();
    Ok(phi
        .iter()
        .zip(&u)
        .map(|(p, u)| 0.5 * (p + s * Complex64::i() * u))
        .collect())
}

/// Energy projection `phi(+-)` of a real field.
///
/// `project(Positive, f) + project(Negative, f)` rebuilds `phi` exactly and
/// the two halves are complex conjugates of each other by construction.
pub fn project(sign: EnergySign, f: &LatticeField) -> ComplexLatticeField {
    let u = apply_operator(OperatorKind::InvSqrtD, f.pi(), f.grid(), f.mass())
        .expect("InvSqrtD of valid real data is real");
    let s = sign.factor();
    let values = f
        .phi()
        .iter()
        .zip(&u)
        .map(|(&p, &u)| 0.5 * Complex64::new(p, s * u))
        .collect();
    ComplexLatticeField {
        grid: f.grid().clone(),
        mass: f.mass(),
        time: f.time(),
        values,
    }
}

/// Grading operator `N phi = D^{-1/2} i d/dt phi = i D^{-1/2} pi`,
/// equal to `phi(+) - phi(-)`.
pub fn grading(f: &LatticeField) -> ComplexLatticeField {
    let u = apply_operator(OperatorKind::InvSqrtD, f.pi(), f.grid(), f.mass())
        .expect("InvSqrtD of valid real data is real");
    let values = u.into_iter().map(|u| Complex64::new(0.0, u)).collect();
    ComplexLatticeField {
        grid: f.grid().clone(),
        mass: f.mass(),
        time: f.time(),
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{random_field, Spectrum};
    use crate::modes::{Mode, ModeSet};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn grid_1d(n: usize) -> SpatialGrid {
        SpatialGrid::new(&[n], &[2.0 * PI]).unwrap()
    }

    fn mass1() -> Mass {
        Mass::new(1.0).unwrap()
    }

    #[test]
    fn d_on_cosine_doubles_it() {
        // D cos(x) = (k^2 + m^2) cos(x) = 2 cos(x) for k = m = 1
        let g = grid_1d(16);
        let f: Vec<f64> = g.positions().iter().map(|x| x[0].cos()).collect();
        let df = apply_operator(OperatorKind::D, &f, &g, mass1()).unwrap();
        for (a, b) in df.iter().zip(&f) {
            assert_abs_diff_eq!(*a, 2.0 * b, epsilon = 1e-12);
        }
    }

    #[test]
    fn sqrt_d_on_constant_gives_mass() {
        let g = grid_1d(8);
        let m = Mass::new(1.7).unwrap();
        let f = vec![3.0; 8];
        let sf = apply_operator(OperatorKind::SqrtD, &f, &g, m).unwrap();
        for v in &sf {
            assert_abs_diff_eq!(*v, 1.7 * 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn inverse_pairs_compose_to_identity() {
        let g = grid_1d(32);
        let m = Mass::new(0.5).unwrap();
        let f = random_field(&g, m, 3, g.nyquist())
            .unwrap()
            .to_lattice()
            .unwrap();
        let scale = f.phi().iter().map(|x| x.abs()).fold(0.0, f64::max);
        for (a, b) in [
            (OperatorKind::SqrtD, OperatorKind::InvSqrtD),
            (OperatorKind::QuarterD, OperatorKind::InvQuarterD),
        ] {
            let fwd = apply_operator(a, f.phi(), &g, m).unwrap();
            let back = apply_operator(b, &fwd, &g, m).unwrap();
            for (x, y) in back.iter().zip(f.phi()) {
                assert!((x - y).abs() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn sqrt_d_twice_equals_d() {
        let g = grid_1d(32);
        let m = mass1();
        let f = random_field(&g, m, 5, 8.0).unwrap().to_lattice().unwrap();
        let twice = apply_operator(
            OperatorKind::SqrtD,
            &apply_operator(OperatorKind::SqrtD, f.phi(), &g, m).unwrap(),
            &g,
            m,
        )
        .unwrap();
        let once = apply_operator(OperatorKind::D, f.phi(), &g, m).unwrap();
        let scale = once.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for (a, b) in twice.iter().zip(&once) {
            assert!((a - b).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn projection_of_static_constant_splits_evenly() {
        let g = grid_1d(8);
        let f = LatticeField::new(g.clone(), mass1(), 0.0, vec![2.0; 8], vec![0.0; 8]).unwrap();
        for sign in [EnergySign::Positive, EnergySign::Negative] {
            let half = project(sign, &f);
            for v in half.values() {
                assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-13);
                assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn projectors_are_complete_and_conjugate() {
        let g = grid_1d(64);
        let f = random_field(&g, mass1(), 9, 20.0)
            .unwrap()
            .to_lattice()
            .unwrap();
        let plus = project(EnergySign::Positive, &f);
        let minus = project(EnergySign::Negative, &f);
        for ((p, m), &phi) in plus.values().iter().zip(minus.values()).zip(f.phi()) {
            assert_eq!((p + m).re, phi); // exact by construction
            assert_eq!((p + m).im, 0.0);
            assert_eq!(p.conj(), *m);
        }
    }

    #[test]
    fn single_positive_mode_projects_onto_itself() {
        // project(+) of a one-mode field is alpha e^{i k x} / V pointwise
        let g = grid_1d(16);
        let m = mass1();
        let alpha = Complex64::new(0.7, -0.4);
        let mut s = Spectrum::zero(g.clone(), m, 0.0);
        s.alpha_mut()[2] = alpha;
        let f = s.to_lattice().unwrap();
        let plus = project(EnergySign::Positive, &f);
        let v = g.volume();
        for (x, got) in g.positions().iter().zip(plus.values()) {
            let want = alpha * Complex64::from_polar(1.0, 2.0 * x[0]) / v;
            assert!((got - want).norm() < 1e-13);
        }
        // and project(-) is its conjugate
        let minus = project(EnergySign::Negative, &f);
        for (p, m) in plus.values().iter().zip(minus.values()) {
            assert_eq!(p.conj(), *m);
        }
    }

    #[test]
    fn grading_vanishes_for_static_data_and_matches_projector_difference() {
        let g = grid_1d(16);
        let f0 = LatticeField::new(g.clone(), mass1(), 0.0, vec![1.0; 16], vec![0.0; 16]).unwrap();
        let n0 = grading(&f0);
        assert!(n0.values().iter().all(|v| v.norm() == 0.0));

        let f = random_field(&g, mass1(), 21, 6.0)
            .unwrap()
            .to_lattice()
            .unwrap();
        let n = grading(&f);
        let plus = project(EnergySign::Positive, &f);
        let minus = project(EnergySign::Negative, &f);
        for ((nv, p), m) in n.values().iter().zip(plus.values()).zip(minus.values()) {
            assert!((nv - (p - m)).norm() < 1e-13);
        }
    }

    #[test]
    fn grading_eigenvalues_on_frequency_eigenstates() {
        let g = grid_1d(16);
        let m = mass1();
        let mut s = Spectrum::zero(g.clone(), m, 0.0);
        s.alpha_mut()[3] = Complex64::new(1.0, 0.5);
        let f = s.to_lattice().unwrap();
        let psi = project(EnergySign::Positive, &f);
        // positive-frequency data: pi = -i sqrt(D) psi, N psi = +psi
        let spsi = apply_operator_complex(OperatorKind::SqrtD, psi.values(), &g, m).unwrap();
        let pi_pos: Vec<Complex64> = spsi.iter().map(|v| -Complex64::i() * v).collect();
        let u = apply_operator_complex(OperatorKind::InvSqrtD, &pi_pos, &g, m).unwrap();
        let scale = psi.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (nv, p) in u.iter().map(|u| Complex64::i() * u).zip(psi.values()) {
            assert!((nv - p).norm() < 1e-12 * scale);
        }
        // negative-frequency data: pi = +i sqrt(D) psi-bar, N psi-bar = -psi-bar
        let psib: Vec<Complex64> = psi.values().iter().map(|v| v.conj()).collect();
        let spsib = apply_operator_complex(OperatorKind::SqrtD, &psib, &g, m).unwrap();
        let pi_neg: Vec<Complex64> = spsib.iter().map(|v| Complex64::i() * v).collect();
        let u2 = apply_operator_complex(OperatorKind::InvSqrtD, &pi_neg, &g, m).unwrap();
        for (nv, p) in u2.iter().map(|u| Complex64::i() * u).zip(&psib) {
            assert!((nv + p).norm() < 1e-12 * scale);
        }
    }

    #[test]
    fn grading_squares_to_identity_on_shell() {
        // N^2 phi = i D^{-1/2} d/dt (i D^{-1/2} pi) = D^{-1/2} D^{1/2} phi
        let g = grid_1d(64);
        let m = mass1();
        let f = random_field(&g, m, 33, 10.0).unwrap().to_lattice().unwrap();
        // data of N f: phi_N = i u, pi_N = i d/dt u = -i sqrt(D) phi
        let sphi = apply_operator(OperatorKind::SqrtD, f.phi(), &g, m).unwrap();
        let pi_n: Vec<Complex64> = sphi.iter().map(|&x| Complex64::new(0.0, -x)).collect();
        let twice = apply_operator_complex(OperatorKind::InvSqrtD, &pi_n, &g, m).unwrap();
        let scale = f.phi().iter().map(|x| x.abs()).fold(0.0, f64::max);
        for (v, &phi) in twice.iter().map(|v| Complex64::i() * v).zip(f.phi()) {
            assert!((v - phi).norm() < 1e-12 * scale, "{v} vs {phi}");
        }
    }

    #[test]
    fn factorized_operator_matches_analytic_second_time_derivative() {
        // single-frequency field: D phi must equal -d^2/dt^2 phi evaluated
        // analytically from the mode content
        let g = grid_1d(16);
        let m = mass1();
        let ms = ModeSet::new(
            m,
            0.2,
            vec![Mode::new(vec![3.0], Complex64::new(0.4, 0.9), 1.0)],
        )
        .unwrap();
        let f = ms.to_lattice(&g).unwrap();
        let df = apply_operator(OperatorKind::D, f.phi(), &g, m).unwrap();
        let mode = &ms.modes()[0];
        let w = mode.omega(m);
        let pref = ms.mode_prefactor(mode);
        let rot = mode.amplitude * Complex64::from_polar(1.0, -w * ms.time());
        let scale = df.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for (x, got) in g.positions().iter().zip(&df) {
            let e = Complex64::from_polar(1.0, mode.k[0] * x[0]);
            let want = w * w * pref * 2.0 * (rot * e).re;
            assert!((got - want).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn gradient_of_sine_is_cosine_times_k() {
        let g = grid_1d(32);
        let f: Vec<f64> = g.positions().iter().map(|x| (3.0 * x[0]).sin()).collect();
        let grads = gradient(&f, &g).unwrap();
        for (x, v) in g.positions().iter().zip(&grads[0]) {
            assert_abs_diff_eq!(*v, 3.0 * (3.0 * x[0]).cos(), epsilon = 1e-11);
        }
    }

    #[test]
    fn length_mismatch_is_reported() {
        let g = grid_1d(8);
        assert!(matches!(
            apply_operator(OperatorKind::D, &[1.0; 7], &g, mass1()),
            Err(KgError::LengthMismatch { .. })
        ));
    }
}
