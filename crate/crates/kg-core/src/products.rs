//! Conserved currents and the positive inner product, in all three forms.
//!
//! For two real on-shell fields the two-parameter current family (overall
//! scale `b > 0`, mixing parameter `a`) is, with `u = D^{-1/2} pi` and
//! `f <-> g` denoting `f dg - (df) g`,
//!
//! ```text
//! j^mu = (b/2) { u1 <->d^mu phi2  -  phi1 <->d^mu u2
//!                + i a [ phi1 <->d^mu phi2 + u1 <->d^mu u2 ] }
//! ```
//!
//! Its charge is the bilinear form, computed here three equivalent ways:
//!
//! * spatial: `b int phi1 sqrt(D) phi2 + pi1 D^{-1/2} pi2 + i a phi1 <->dt phi2`
//! * quadratic form: `b int (D^{1/4} phi1, D^{-1/4} pi1) M (...2)^T` with
//!   `M = [[1, ia], [-ia, 1]]`, eigenvalues `1 +- a`
//! * mode sum: `(4b/V) sum_k w_k [Re + i a Im](conj(alpha1_k) alpha2_k)`,
//!   the discrete counterpart of the invariant-measure momentum integral
//!
//! All three agree to rounding on the periodic lattice (the partial
//! integrations relating them are exact there). At `a = 0` the form is real
//! and symmetric; for one field paired with itself the `a` terms cancel
//! pointwise, so the norm is `a`-independent, non-negative, and counts mode
//! occupancy `(4b/V) sum_k w_k |alpha_k|^2` — in sharp contrast to the naive
//! symplectic product `int phi1 i <->dt phi2`, which vanishes identically on
//! any single real field.
//!
//! Time derivatives inside the current are always evaluated through the
//! equation of motion (`d/dt pi = -D phi`), never by numerical
//! differentiation; this keeps conservation exact.

use crate::error::{KgError, Result};
use crate::field::{omegas, LatticeField, Spectrum};
use crate::grid::SpatialGrid;
use crate::modes::ModeSet;
use crate::ops::{
    apply_operator, divergence_complex, gradient, OperatorKind,
};
use crate::sum::{pairwise_sum, pairwise_sum_complex};
use num_complex::Complex64;
use std::f64::consts::PI;

/// The pair `(b, a)` of the current family: `b > 0` scales the form, `a`
/// mixes in the antisymmetric part. `|a| <= 1` is what makes the quadratic
/// form positive semi-definite, but the bilinear form itself accepts any
/// real `a` (see [`matrix_m_eigenvalues`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductParams {
    b: f64,
    a: f64,
}

impl ProductParams {
    pub fn new(b: f64, a: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(KgError::InvalidScale(b));
        }
        if !a.is_finite() {
            return Err(KgError::InvalidScale(a));
        }
        Ok(Self { b, a })
    }

    /// The symmetric product `(b, 0)`.
    pub fn symmetric(b: f64) -> Result<Self> {
        Self::new(b, 0.0)
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn a(&self) -> f64 {
        self.a
    }
}

impl Default for ProductParams {
    /// The canonical choice `b = 1`, `a = 0`.
    fn default() -> Self {
        Self { b: 1.0, a: 0.0 }
    }
}

/// Eigenvalue report for the mixing matrix `M = [[1, ia], [-ia, 1]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MEigenvalues {
    pub plus: f64,
    pub minus: f64,
    pub positive_semidefinite: bool,
}

/// Eigenvalues `1 +- a` of `M`; the form is positive semi-definite exactly
/// for `|a| <= 1`.
pub fn matrix_m_eigenvalues(a: f64) -> MEigenvalues {
    MEigenvalues {
        plus: 1.0 + a,
        minus: 1.0 - a,
        positive_semidefinite: a.abs() <= 1.0,
    }
}

/// The four-current `j^mu` on grid sites.
///
/// Components are stored complex: for real input fields they are real
/// whenever `a = 0` or the two fields coincide (the `i a` part then cancels
/// pointwise); for `a != 0` and distinct fields the current is genuinely
/// complex-valued. Use [`Current4::max_imag`] to check, or the `*_real`
/// accessors where reality is expected.
#[derive(Debug, Clone)]
pub struct Current4 {
    pub j0: Vec<Complex64>,
    pub ji: Vec<Vec<Complex64>>,
    pub params: ProductParams,
    pub time: f64,
}

impl Current4 {
    /// Largest imaginary magnitude over all components.
    pub fn max_imag(&self) -> f64 {
        let t = self.j0.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        self.ji
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v.im.abs())
            .fold(t, f64::max)
    }

    /// Real part of `j^0`, asserting the imaginary part is rounding noise.
    pub fn j0_real(&self) -> Vec<f64> {
        let scale = self
            .j0
            .iter()
            .map(|v| v.re.abs())
            .fold(1.0_f64, f64::max);
        debug_assert!(self.max_imag() <= 1e-12 * scale, "current is not real");
        self.j0.iter().map(|v| v.re).collect()
    }
}

fn quad(grid: &SpatialGrid, integrand: &[f64]) -> f64 {
    grid.cell_volume() * pairwise_sum(integrand)
}

fn quad_complex(grid: &SpatialGrid, integrand: &[Complex64]) -> Complex64 {
    grid.cell_volume() * pairwise_sum_complex(integrand)
}

/// Spatial form of the bilinear product,
/// `b int phi1 sqrt(D) phi2 + pi1 D^{-1/2} pi2 + i a (phi1 pi2 - pi1 phi2)`.
pub fn inner_product_spatial(
    f1: &LatticeField,
    f2: &LatticeField,
    p: ProductParams,
) -> Result<Complex64> {
    f1.same_frame(f2)?;
    let grid = f1.grid();
    let mass = f1.mass();
    let s2 = apply_operator(OperatorKind::SqrtD, f2.phi(), grid, mass)?;
    let u2 = apply_operator(OperatorKind::InvSqrtD, f2.pi(), grid, mass)?;
    let n = grid.site_count();
    let mut sym = vec![0.0; n];
    let mut antisym = vec![0.0; n];
    for i in 0..n {
        sym[i] = f1.phi()[i] * s2[i] + f1.pi()[i] * u2[i];
        antisym[i] = f1.phi()[i] * f2.pi()[i] - f1.pi()[i] * f2.phi()[i];
    }
    Ok(Complex64::new(
        p.b * quad(grid, &sym),
        p.a * p.b * quad(grid, &antisym),
    ))
}

/// Quadratic-form route: `b int (D^{1/4} phi1, D^{-1/4} pi1) M (...)^T`.
///
/// Related to the spatial form by partial integration, which is exact on the
/// periodic lattice; the two routes use different transforms and agree to
/// rounding.
pub fn inner_product_quadform(
    f1: &LatticeField,
    f2: &LatticeField,
    p: ProductParams,
) -> Result<Complex64> {
    f1.same_frame(f2)?;
    let grid = f1.grid();
    let mass = f1.mass();
    let w1 = apply_operator(OperatorKind::QuarterD, f1.phi(), grid, mass)?;
    let v1 = apply_operator(OperatorKind::InvQuarterD, f1.pi(), grid, mass)?;
    let w2 = apply_operator(OperatorKind::QuarterD, f2.phi(), grid, mass)?;
    let v2 = apply_operator(OperatorKind::InvQuarterD, f2.pi(), grid, mass)?;
    let n = grid.site_count();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    for i in 0..n {
        diag[i] = w1[i] * w2[i] + v1[i] * v2[i];
        off[i] = w1[i] * v2[i] - v1[i] * w2[i];
    }
    Ok(Complex64::new(
        p.b * quad(grid, &diag),
        p.a * p.b * quad(grid, &off),
    ))
}

/// Mode-sum route on spectra,
/// `(4b/V) sum_k w_k [Re + i a Im](conj(alpha1_k) alpha2_k)`.
pub fn inner_product_modes(s1: &Spectrum, s2: &Spectrum, p: ProductParams) -> Result<Complex64> {
    if s1.grid() != s2.grid() {
        return Err(KgError::FieldMismatch("grids differ".into()));
    }
    if s1.mass() != s2.mass() {
        return Err(KgError::FieldMismatch("masses differ".into()));
    }
    if s1.time() != s2.time() {
        return Err(KgError::FieldMismatch(format!(
            "times differ ({} vs {})",
            s1.time(),
            s2.time()
        )));
    }
    let omega = omegas(s1.grid(), s1.mass());
    let terms: Vec<Complex64> = s1
        .alpha()
        .iter()
        .zip(s2.alpha())
        .zip(&omega)
        .map(|((a1, a2), w)| w * a1.conj() * a2)
        .collect();
    let sum = pairwise_sum_complex(&terms);
    let scale = 4.0 * p.b / s1.grid().volume();
    Ok(Complex64::new(scale * sum.re, scale * p.a * sum.im))
}

/// Mode-sum route on exact mode sets, aligned by identical wavevectors:
/// `sum_j w_j / ((2 pi)^d 2 w_j) * 2b [Re + i a Im](conj(a1_j) a2_j)`.
///
/// Both sets must carry the same mass and time and list the same wavevectors
/// with the same weights (any amplitudes); otherwise they are unalignable.
pub fn inner_product_modeset(m1: &ModeSet, m2: &ModeSet, p: ProductParams) -> Result<Complex64> {
    if m1.mass() != m2.mass() {
        return Err(KgError::FieldMismatch("masses differ".into()));
    }
    if m1.time() != m2.time() {
        return Err(KgError::FieldMismatch("times differ".into()));
    }
    if m1.modes().len() != m2.modes().len() {
        return Err(KgError::UnalignableModeSets(format!(
            "mode counts differ ({} vs {})",
            m1.modes().len(),
            m2.modes().len()
        )));
    }
    let mut order1: Vec<usize> = (0..m1.modes().len()).collect();
    let mut order2 = order1.clone();
    let lex = |ms: &ModeSet, i: usize, j: usize| {
        ms.modes()[i]
            .k
            .partial_cmp(&ms.modes()[j].k)
            .expect("finite wavevectors")
    };
    order1.sort_by(|&i, &j| lex(m1, i, j));
    order2.sort_by(|&i, &j| lex(m2, i, j));
    let mut acc = Complex64::default();
    for (&i, &j) in order1.iter().zip(&order2) {
        let a = &m1.modes()[i];
        let b = &m2.modes()[j];
        if a.k != b.k {
            return Err(KgError::UnalignableModeSets(format!(
                "no partner for wavevector {:?}",
                a.k
            )));
        }
        if a.weight != b.weight {
            return Err(KgError::UnalignableModeSets(format!(
                "weights differ at wavevector {:?} ({} vs {})",
                a.k, a.weight, b.weight
            )));
        }
        let z = a.amplitude.conj() * b.amplitude;
        let pref = 2.0 * p.b * m1.mode_prefactor(a);
        acc += pref * Complex64::new(z.re, p.a * z.im);
    }
    Ok(acc)
}

/// Norm of a lattice field, `(f, f)_{b,a}` for any `a` (the `a` terms cancel
/// pointwise for equal arguments). Non-negative; zero only for the zero
/// spectrum.
pub fn norm(f: &LatticeField, b: f64) -> Result<f64> {
    let p = ProductParams::symmetric(b)?;
    Ok(inner_product_spatial(f, f, p)?.re)
}

/// Norm computed in mode space, `(4b/V) sum_k w_k |alpha_k|^2`.
pub fn norm_spectrum(s: &Spectrum, b: f64) -> Result<f64> {
    let p = ProductParams::symmetric(b)?;
    Ok(inner_product_modes(s, s, p)?.re)
}

/// Per-bin contributions `(4b/V) w_k |alpha_k|^2`; these sum to
/// [`norm_spectrum`] and realize the mode-count reading of the norm.
pub fn norm_contributions(s: &Spectrum, b: f64) -> Result<Vec<f64>> {
    ProductParams::symmetric(b)?;
    let omega = omegas(s.grid(), s.mass());
    let scale = 4.0 * b / s.grid().volume();
    Ok(s.alpha()
        .iter()
        .zip(&omega)
        .map(|(a, w)| scale * w * a.norm_sqr())
        .collect())
}

/// Norm of an exact mode set, `(b / (2 pi)^d) sum_j w_j |a_j|^2 / w(k_j)`.
/// Per mode, `|a|^2 w / w(k)` is a Lorentz invariant, so boosts leave this
/// sum unchanged.
pub fn norm_modeset(ms: &ModeSet, b: f64) -> Result<f64> {
    ProductParams::symmetric(b)?;
    let total: f64 = ms
        .modes()
        .iter()
        .map(|m| 2.0 * b * ms.mode_prefactor(m) * m.amplitude.norm_sqr())
        .sum();
    Ok(total)
}

/// The textbook symplectic product `int phi1 i <->dt phi2`
/// (`= i int phi1 pi2 - pi1 phi2`).
///
/// Antisymmetric, hence identically zero for a field paired with itself —
/// the folклore "vanishing norm" of the neutral field. For a shared mode it
/// carries `sin(chi1 - chi2)` where the positive product carries the cosine.
pub fn naive_symplectic(f1: &LatticeField, f2: &LatticeField) -> Result<Complex64> {
    f1.same_frame(f2)?;
    let n = f1.grid().site_count();
    let mut antisym = vec![0.0; n];
    for i in 0..n {
        antisym[i] = f1.phi()[i] * f2.pi()[i] - f1.pi()[i] * f2.phi()[i];
    }
    Ok(Complex64::new(0.0, quad(f1.grid(), &antisym)))
}

/// Total field energy `int (pi^2 + (grad phi)^2 + m^2 phi^2) / 2`.
///
/// The gradient square is integrated by parts to `phi D phi`, which the
/// lattice quadrature evaluates exactly for any grid content; the result is
/// the manifestly non-negative Fourier sum `(1/2V) sum_k |pihat|^2 + w^2 |fhat|^2`.
pub fn total_energy(f: &LatticeField) -> Result<f64> {
    let dphi = apply_operator(OperatorKind::D, f.phi(), f.grid(), f.mass())?;
    let n = f.grid().site_count();
    let mut density = vec![0.0; n];
    for i in 0..n {
        density[i] = 0.5 * (f.pi()[i] * f.pi()[i] + f.phi()[i] * dphi[i]);
    }
    Ok(quad(f.grid(), &density))
}

struct CurrentIngredients {
    u1: Vec<f64>,
    u2: Vec<f64>,
    s1: Vec<f64>,
    s2: Vec<f64>,
}

fn current_ingredients(f1: &LatticeField, f2: &LatticeField) -> Result<CurrentIngredients> {
    let grid = f1.grid();
    let mass = f1.mass();
    Ok(CurrentIngredients {
        u1: apply_operator(OperatorKind::InvSqrtD, f1.pi(), grid, mass)?,
        u2: apply_operator(OperatorKind::InvSqrtD, f2.pi(), grid, mass)?,
        s1: apply_operator(OperatorKind::SqrtD, f1.phi(), grid, mass)?,
        s2: apply_operator(OperatorKind::SqrtD, f2.phi(), grid, mass)?,
    })
}

/// The conserved current density `j^mu` of the pair `(f1, f2)`.
///
/// Time components use the on-shell relation `d/dt u = -sqrt(D) phi`;
/// spatial derivatives are spectral. For `f1 = f2` the `a` terms cancel
/// identically and `j^mu = b u <->d^mu phi`, independent of `a`.
pub fn current_density(f1: &LatticeField, f2: &LatticeField, p: ProductParams) -> Result<Current4> {
    f1.same_frame(f2)?;
    let grid = f1.grid();
    let n = grid.site_count();
    let ing = current_ingredients(f1, f2)?;
    let (phi1, pi1) = (f1.phi(), f1.pi());
    let (phi2, pi2) = (f2.phi(), f2.pi());

    let hb = 0.5 * p.b;
    let ha = 0.5 * p.a * p.b;
    let mut j0 = vec![Complex64::default(); n];
    for i in 0..n {
        let sym = ing.u1[i] * pi2[i] + ing.s1[i] * phi2[i] + phi1[i] * ing.s2[i] + pi1[i] * ing.u2[i];
        let anti = phi1[i] * pi2[i] - pi1[i] * phi2[i] - ing.u1[i] * ing.s2[i] + ing.s1[i] * ing.u2[i];
        j0[i] = Complex64::new(hb * sym, ha * anti);
    }

    let g_phi1 = gradient(phi1, grid)?;
    let g_phi2 = gradient(phi2, grid)?;
    let g_u1 = gradient(&ing.u1, grid)?;
    let g_u2 = gradient(&ing.u2, grid)?;
    let mut ji = Vec::with_capacity(grid.dim());
    for axis in 0..grid.dim() {
        let mut comp = vec![Complex64::default(); n];
        for i in 0..n {
            let sym = ing.u1[i] * g_phi2[axis][i] - g_u1[axis][i] * phi2[i]
                - phi1[i] * g_u2[axis][i]
                + g_phi1[axis][i] * ing.u2[i];
            let anti = phi1[i] * g_phi2[axis][i] - g_phi1[axis][i] * phi2[i]
                + ing.u1[i] * g_u2[axis][i]
                - g_u1[axis][i] * ing.u2[i];
            comp[i] = Complex64::new(-hb * sym, -ha * anti);
        }
        ji.push(comp);
    }
    let current = Current4 {
        j0,
        ji,
        params: p,
        time: f1.time(),
    };
    if p.a == 0.0 {
        let scale = current
            .j0
            .iter()
            .map(|v| v.re.abs())
            .fold(1.0_f64, f64::max);
        debug_assert!(
            current.max_imag() <= 1e-12 * scale,
            "a = 0 current must be real"
        );
    }
    Ok(current)
}

/// Charge of the current: `int j^0 d^dx`, which equals the bilinear form.
pub fn current_charge(c: &Current4, grid: &SpatialGrid) -> Result<Complex64> {
    if c.j0.len() != grid.site_count() {
        return Err(KgError::LengthMismatch {
            got: c.j0.len(),
            expected: grid.site_count(),
        });
    }
    Ok(quad_complex(grid, &c.j0))
}

/// Max-norm of `d/dt j^0 + div j` with the time derivative evaluated
/// analytically through the equations of motion.
///
/// On fields whose spectra are banded below half the Brillouin zone the
/// pointwise products in `j` do not alias, and the residual is pure rounding
/// noise; full-band content shows the aliasing scale instead. Because the
/// time derivative is evaluated on shell, this residual checks the operator
/// identity and the de-aliasing, not the provenance of the trajectory — see
/// [`continuity_residual_fd`] for the check with power against fake dynamics.
pub fn continuity_residual(
    f1: &LatticeField,
    f2: &LatticeField,
    p: ProductParams,
) -> Result<f64> {
    f1.same_frame(f2)?;
    let grid = f1.grid();
    let mass = f1.mass();
    let n = grid.site_count();
    let current = current_density(f1, f2, p)?;
    let ing = current_ingredients(f1, f2)?;
    let dphi1 = apply_operator(OperatorKind::D, f1.phi(), grid, mass)?;
    let dphi2 = apply_operator(OperatorKind::D, f2.phi(), grid, mass)?;
    let spi1 = apply_operator(OperatorKind::SqrtD, f1.pi(), grid, mass)?;
    let spi2 = apply_operator(OperatorKind::SqrtD, f2.pi(), grid, mass)?;

    let hb = 0.5 * p.b();
    let ha = 0.5 * p.a() * p.b();
    let div = divergence_complex(&current.ji, grid)?;
    let mut residual = 0.0_f64;
    for i in 0..n {
        let sym = -ing.u1[i] * dphi2[i] + spi1[i] * f2.phi()[i] + f1.phi()[i] * spi2[i]
            - dphi1[i] * ing.u2[i];
        let anti = dphi1[i] * f2.phi()[i] - f1.phi()[i] * dphi2[i] - ing.u1[i] * spi2[i]
            + spi1[i] * ing.u2[i];
        let dt_j0 = Complex64::new(hb * sym, ha * anti);
        residual = residual.max((dt_j0 + div[i]).norm());
    }
    Ok(residual)
}

/// Finite-difference continuity residual over a three-slice trajectory:
/// `[j^0(t+dt) - j^0(t-dt)] / (2 dt) + div j(t)` in max-norm.
///
/// For slices produced by the true evolution this is `O(dt^2)`; for a
/// trajectory that does not solve the field equation it is order one, which
/// is the off-shell counterexample demonstrating the check has power.
pub fn continuity_residual_fd(
    earlier: (&LatticeField, &LatticeField),
    current: (&LatticeField, &LatticeField),
    later: (&LatticeField, &LatticeField),
    dt: f64,
    p: ProductParams,
) -> Result<f64> {
    let grid = current.0.grid();
    let j_prev = current_density(earlier.0, earlier.1, p)?;
    let j_mid = current_density(current.0, current.1, p)?;
    let j_next = current_density(later.0, later.1, p)?;
    let div = divergence_complex(&j_mid.ji, grid)?;
    let mut residual = 0.0_f64;
    for i in 0..grid.site_count() {
        let dt_j0 = (j_next.j0[i] - j_prev.j0[i]) / (2.0 * dt);
        residual = residual.max((dt_j0 + div[i]).norm());
    }
    Ok(residual)
}

/// Normalize a spectrum so its `b = 1` norm is one; leaves zero spectra
/// untouched.
pub fn unit_norm(s: &Spectrum) -> Result<Spectrum> {
    let n = norm_spectrum(s, 1.0)?;
    if n == 0.0 {
        return Ok(s.clone());
    }
    Ok(s.scaled(1.0 / n.sqrt()))
}

/// Mode-space inner product written with moduli and phases,
/// `2 b |a1||a2| cos(chi1 - chi2) * w / ((2 pi)^d 2 w(k))` per shared mode.
/// Exposed for tests and reports; identical to the `a = 0` value of
/// [`inner_product_modeset`].
pub fn modeset_cosine_form(m1: &ModeSet, m2: &ModeSet, b: f64) -> Result<f64> {
    let _ = PI;
    let p = ProductParams::symmetric(b)?;
    Ok(inner_product_modeset(m1, m2, p)?.re)
}
