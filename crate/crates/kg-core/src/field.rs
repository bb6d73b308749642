//! Field state on the lattice and its positive-frequency spectrum.
//!
//! A [`LatticeField`] stores the real pair `(phi, pi = d/dt phi)` on grid
//! sites; a [`Spectrum`] stores one complex coefficient `alpha_k` per
//! wavevector bin such that, at the stored time,
//!
//! ```text
//! phi(x) = (1/V) sum_k [ alpha_k e^{i k.x} + conj(alpha_k) e^{-i k.x} ]
//! pi(x)  = (1/V) sum_k [ -i w_k alpha_k e^{i k.x} + c.c. ]
//! ```
//!
//! with the on-shell frequency `w_k = sqrt(k.k + m^2)`. Every `alpha`
//! reproduces a real field, and the pair of maps
//! `alpha_k = (fhat_k + i pihat_k / w_k) / 2` and the reconstruction above
//! are exact mutual inverses (including the self-conjugate Nyquist bins), so
//! the two representations are interchangeable to rounding accuracy.
//!
//! For a single plane wave `phi = a e^{i k.x} + conj(a) e^{-i k.x}` the
//! stored coefficient is `alpha_k = V * a`.

use crate::error::{KgError, Result};
use crate::fft;
use crate::grid::SpatialGrid;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Residue above this (relative to the field amplitude) is an internal error.
const IMAG_RESIDUE_LIMIT: f64 = 1e-10;

/// Field mass, strictly positive so `sqrt(-laplace + m^2)` is strictly
/// positive on every bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mass(f64);

impl Mass {
    pub fn new(m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(KgError::InvalidMass(m));
        }
        Ok(Mass(m))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// On-shell frequencies `w_k = sqrt(k.k + m^2)` per bin, canonical order.
pub fn omegas(grid: &SpatialGrid, mass: Mass) -> Vec<f64> {
    let m2 = mass.value() * mass.value();
    grid.wavevector_norms_squared()
        .into_iter()
        .map(|k2| (k2 + m2).sqrt())
        .collect()
}

/// Largest on-shell frequency on the grid.
pub fn omega_max(grid: &SpatialGrid, mass: Mass) -> f64 {
    omegas(grid, mass).into_iter().fold(0.0, f64::max)
}

/// Real field state `(phi, pi)` at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    grid: SpatialGrid,
    mass: Mass,
    time: f64,
    phi: Vec<f64>,
    pi: Vec<f64>,
}

impl LatticeField {
    pub fn new(
        grid: SpatialGrid,
        mass: Mass,
        time: f64,
        phi: Vec<f64>,
        pi: Vec<f64>,
    ) -> Result<Self> {
        let expected = grid.site_count();
        for got in [phi.len(), pi.len()] {
            if got != expected {
                return Err(KgError::LengthMismatch { got, expected });
            }
        }
        Ok(Self {
            grid,
            mass,
            time,
            phi,
            pi,
        })
    }

    pub fn zero(grid: SpatialGrid, mass: Mass, time: f64) -> Self {
        let n = grid.site_count();
        Self {
            grid,
            mass,
            time,
            phi: vec![0.0; n],
            pi: vec![0.0; n],
        }
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

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    /// Check that two fields live on the same grid with the same mass at the
    /// same time, as required by every bilinear operation.
    pub fn same_frame(&self, other: &LatticeField) -> Result<()> {
        if self.grid != other.grid {
            return Err(KgError::FieldMismatch("grids differ".into()));
        }
        if self.mass != other.mass {
            return Err(KgError::FieldMismatch("masses differ".into()));
        }
        if self.time != other.time {
            return Err(KgError::FieldMismatch(format!(
                "times differ ({} vs {})",
                self.time, other.time
            )));
        }
        Ok(())
    }

    /// Positive-frequency coefficients `alpha_k = (fhat_k + i pihat_k/w_k)/2`.
    pub fn to_spectrum(&self) -> Spectrum {
        let fhat = fft::forward_real(&self.grid, &self.phi);
        let pihat = fft::forward_real(&self.grid, &self.pi);
        let omega = omegas(&self.grid, self.mass);
        let alpha = fhat
            .iter()
            .zip(&pihat)
            .zip(&omega)
            .map(|((f, p), w)| 0.5 * (f + Complex64::i() * p / w))
            .collect();
        Spectrum {
            grid: self.grid.clone(),
            mass: self.mass,
            time: self.time,
            alpha,
        }
    }
}

/// Positive-frequency coefficients per wavevector bin.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: SpatialGrid,
    mass: Mass,
    time: f64,
    alpha: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: SpatialGrid, mass: Mass, time: f64, alpha: Vec<Complex64>) -> Result<Self> {
        if alpha.len() != grid.site_count() {
            return Err(KgError::LengthMismatch {
                got: alpha.len(),
                expected: grid.site_count(),
            });
        }
        Ok(Self {
            grid,
            mass,
            time,
            alpha,
        })
    }

    pub fn zero(grid: SpatialGrid, mass: Mass, time: f64) -> Self {
        let n = grid.site_count();
        Self {
            grid,
            mass,
            time,
            alpha: vec![Complex64::default(); n],
        }
    }

    /// Single plane wave `phi = a e^{i k.x} + conj(a) e^{-i k.x}` at `time`;
    /// stores `alpha_k = V * a`. `k` must be grid-admissible.
    pub fn plane_wave(
        grid: SpatialGrid,
        mass: Mass,
        time: f64,
        k: &[f64],
        amplitude: Complex64,
    ) -> Result<Self> {
        let bin = grid
            .wavevector_index(k)
            .ok_or_else(|| KgError::NonAdmissibleMode {
                index: 0,
                k: k.to_vec(),
            })?;
        let mut s = Spectrum::zero(grid, mass, time);
        s.alpha[bin] = s.grid.volume() * amplitude;
        Ok(s)
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

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn alpha_mut(&mut self) -> &mut [Complex64] {
        &mut self.alpha
    }

    pub fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    /// Same field with all coefficients scaled by a real factor.
    pub fn scaled(&self, c: f64) -> Spectrum {
        let mut out = self.clone();
        for a in &mut out.alpha {
            *a *= c;
        }
        out
    }

    /// Reconstruct the real `(phi, pi)` pair at the stored time.
    ///
    /// The inverse transform must come back real; a residue above the
    /// consistency limit is reported as an error rather than discarded.
    pub fn to_lattice(&self) -> Result<LatticeField> {
        let conj_idx = conjugate_bins(&self.grid);
        let omega = omegas(&self.grid, self.mass);
        let n = self.alpha.len();
        let mut fhat = vec![Complex64::default(); n];
        let mut pihat = vec![Complex64::default(); n];
        for i in 0..n {
            let a = self.alpha[i];
            let ac = self.alpha[conj_idx[i]].conj();
            fhat[i] = a + ac;
            pihat[i] = -Complex64::i() * omega[i] * (a - ac);
        }
        fft::inverse(&self.grid, &mut fhat);
        fft::inverse(&self.grid, &mut pihat);
        let phi = fft::into_real(fhat, IMAG_RESIDUE_LIMIT)?;
        let pi = fft::into_real(pihat, IMAG_RESIDUE_LIMIT)?;
        LatticeField::new(self.grid.clone(), self.mass, self.time, phi, pi)
    }
}

/// Flat index of the bin carrying `-k` for each bin `k`. Per axis this is
/// `i -> (n - i) % n`, which fixes both the zero bin and the Nyquist bin.
pub(crate) fn conjugate_bins(grid: &SpatialGrid) -> Vec<usize> {
    let dims = grid.points();
    let total = grid.site_count();
    let mut out = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rest = flat;
        let mut axis_idx = vec![0usize; dims.len()];
        for axis in (0..dims.len()).rev() {
            axis_idx[axis] = rest % dims[axis];
            rest /= dims[axis];
        }
        let mut conj = 0usize;
        for (axis, &n) in dims.iter().enumerate() {
            let i = axis_idx[axis];
            let j = (n - i) % n;
            conj = conj * n + j;
        }
        out.push(conj);
    }
    out
}

/// Deterministic band-limited random spectrum.
///
/// Bins with `|k| <= band_limit` receive i.i.d. complex standard normal
/// coefficients (`E|alpha|^2 = 1`); bins beyond stay zero. The generator is
/// a ChaCha8 stream seeded with `seed`, consumed in canonical bin order and
/// mapped through the Box-Muller transform, so a seed pins the field exactly.
pub fn random_field(
    grid: &SpatialGrid,
    mass: Mass,
    seed: u64,
    band_limit: f64,
) -> Result<Spectrum> {
    let nyquist = grid.nyquist();
    if !(band_limit.is_finite() && (0.0..=nyquist).contains(&band_limit)) {
        return Err(KgError::InvalidBandLimit {
            band_limit,
            nyquist,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k2s = grid.wavevector_norms_squared();
    let band2 = band_limit * band_limit;
    // accept k.k <= band^2 with a one-ulp cushion so |k| == band stays inside
    let cutoff = band2 * (1.0 + 1e-12);
    let alpha = k2s
        .iter()
        .map(|&k2| {
            if k2 <= cutoff {
                let (re, im) = standard_normal_pair(&mut rng);
                Complex64::new(re, im) / 2.0_f64.sqrt()
            } else {
                Complex64::default()
            }
        })
        .collect();
    Spectrum::new(grid.clone(), mass, 0.0, alpha)
}

/// Box-Muller pair of independent standard normals.
fn standard_normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * PI * u2;
    (r * theta.cos(), r * theta.sin())
}
