//! Exact continuum plane-wave mode sets and their Lorentz boosts.
//!
//! A [`ModeSet`] is the analytic representation of a real field: a finite
//! list of on-shell plane waves with wavevector `k`, complex amplitude `a`
//! and momentum-cell weight `w > 0`. With `c_j = w_j / ((2 pi)^d 2 w(k_j))`
//! the represented field is
//!
//! ```text
//! phi(x, t) = sum_j c_j * 2 Re[ a_j e^{-i (w_j t - k_j.x)} ]
//! ```
//!
//! which is manifestly real (every mode carries its own conjugate). On a grid
//! whose reciprocal lattice contains all the `k_j`, the corresponding
//! spectrum coefficient is `alpha_k = V c_j a_j e^{-i w_j t}`; a box-matched
//! mode set uses `w = (2 pi)^d / V` (see `SpatialGrid::mode_weight`).
//!
//! Wavevectors are unconstrained otherwise — boosted mode sets generally
//! leave the reciprocal lattice and remain valid `ModeSet`s.

use crate::error::{KgError, Result};
use crate::field::{LatticeField, Mass, Spectrum};
use crate::grid::SpatialGrid;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One on-shell plane wave. The frequency is always derived from `k` and the
/// set's mass, never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub k: Vec<f64>,
    pub amplitude: Complex64,
    pub weight: f64,
}

impl Mode {
    pub fn new(k: Vec<f64>, amplitude: Complex64, weight: f64) -> Self {
        Self {
            k,
            amplitude,
            weight,
        }
    }

    pub fn omega(&self, mass: Mass) -> f64 {
        let k2: f64 = self.k.iter().map(|x| x * x).sum();
        (k2 + mass.value() * mass.value()).sqrt()
    }
}

/// Finite list of exact plane-wave modes with pairwise distinct wavevectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    mass: Mass,
    time: f64,
    modes: Vec<Mode>,
}

impl ModeSet {
    pub fn new(mass: Mass, time: f64, modes: Vec<Mode>) -> Result<Self> {
        let dim = modes.first().map(|m| m.k.len());
        for (index, mode) in modes.iter().enumerate() {
            if let Some(d) = dim {
                if mode.k.len() != d {
                    return Err(KgError::ModeDimMismatch {
                        got: mode.k.len(),
                        expected: d,
                    });
                }
            }
            if mode.k.is_empty() || mode.k.len() > 3 {
                return Err(KgError::InvalidDim(mode.k.len()));
            }
            if !(mode.weight.is_finite() && mode.weight > 0.0) {
                return Err(KgError::InvalidWeight {
                    index,
                    weight: mode.weight,
                });
            }
            for earlier in &modes[..index] {
                if earlier.k == mode.k {
                    return Err(KgError::DuplicateMode {
                        index,
                        k: mode.k.clone(),
                    });
                }
            }
        }
        Ok(Self { mass, time, modes })
    }

    pub fn empty(mass: Mass, time: f64) -> Self {
        Self {
            mass,
            time,
            modes: Vec::new(),
        }
    }

    pub fn mass(&self) -> Mass {
        self.mass
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// Dimension of the wavevectors, `None` for an empty set.
    pub fn dim(&self) -> Option<usize> {
        self.modes.first().map(|m| m.k.len())
    }

    /// Measure prefactor `w / ((2 pi)^d 2 w(k))` of one mode.
    pub fn mode_prefactor(&self, mode: &Mode) -> f64 {
        let d = mode.k.len() as i32;
        mode.weight / ((2.0 * PI).powi(d) * 2.0 * mode.omega(self.mass))
    }

    /// Evaluate `(phi, pi)` pointwise on the grid at the set's time.
    ///
    /// Every wavevector must be grid-admissible; the first offending mode is
    /// reported. An empty set evaluates to the zero field.
    pub fn to_lattice(&self, grid: &SpatialGrid) -> Result<LatticeField> {
        if let Some(d) = self.dim() {
            if d != grid.dim() {
                return Err(KgError::ModeDimMismatch {
                    got: d,
                    expected: grid.dim(),
                });
            }
        }
        for (index, mode) in self.modes.iter().enumerate() {
            if grid.wavevector_index(&mode.k).is_none() {
                return Err(KgError::NonAdmissibleMode {
                    index,
                    k: mode.k.clone(),
                });
            }
        }
        let positions = grid.positions();
        let mut phi = vec![0.0; grid.site_count()];
        let mut pi = vec![0.0; grid.site_count()];
        for mode in &self.modes {
            let omega = mode.omega(self.mass);
            let pref = self.mode_prefactor(mode);
            // a e^{-i w t} folded once; the spatial phase varies per site
            let rotated = mode.amplitude * Complex64::from_polar(1.0, -omega * self.time);
            for (site, x) in positions.iter().enumerate() {
                let kx: f64 = mode.k.iter().zip(x).map(|(k, x)| k * x).sum();
                let e = Complex64::from_polar(1.0, kx);
                let z = rotated * e;
                phi[site] += pref * 2.0 * z.re;
                pi[site] += pref * 2.0 * (-Complex64::i() * omega * z).re;
            }
        }
        LatticeField::new(grid.clone(), self.mass, self.time, phi, pi)
    }

    /// Direct map to spectrum coefficients, `alpha_k = V c_j a_j e^{-i w t}`.
    ///
    /// This is the documented normalization bridge; it does not go through
    /// the lattice, so `to_lattice(...).to_spectrum()` is an independent path
    /// that must agree with it.
    pub fn to_spectrum(&self, grid: &SpatialGrid) -> Result<Spectrum> {
        let mut s = Spectrum::zero(grid.clone(), self.mass, self.time);
        let v = grid.volume();
        for (index, mode) in self.modes.iter().enumerate() {
            let bin = grid
                .wavevector_index(&mode.k)
                .ok_or_else(|| KgError::NonAdmissibleMode {
                    index,
                    k: mode.k.clone(),
                })?;
            let omega = mode.omega(self.mass);
            let pref = self.mode_prefactor(mode);
            s.alpha_mut()[bin] +=
                v * pref * mode.amplitude * Complex64::from_polar(1.0, -omega * self.time);
        }
        Ok(s)
    }

    /// Boost along `axis` with the given rapidity.
    ///
    /// Per mode: `(w, k_axis) -> (w cosh n + k_axis sinh n, k_axis cosh n + w sinh n)`,
    /// transverse components and the scalar amplitude unchanged, and
    /// `weight -> weight * w'/w` so the invariant measure `weight / w` is
    /// preserved mode by mode.
    pub fn boost(&self, rapidity: f64, axis: usize) -> Result<ModeSet> {
        if let Some(d) = self.dim() {
            if axis >= d {
                return Err(KgError::InvalidAxis { axis, dim: d });
            }
        } else if axis >= 1 {
            return Err(KgError::InvalidAxis { axis, dim: 1 });
        }
        let ch = rapidity.cosh();
        let sh = rapidity.sinh();
        let modes = self
            .modes
            .iter()
            .map(|mode| {
                let omega = mode.omega(self.mass);
                let mut k = mode.k.clone();
                k[axis] = mode.k[axis] * ch + omega * sh;
                let boosted = Mode::new(k, mode.amplitude, 1.0);
                let omega_new = boosted.omega(self.mass);
                // ratio first: the identity boost then scales by exactly 1.0
                Mode {
                    weight: mode.weight * (omega_new / omega),
                    ..boosted
                }
            })
            .collect();
        ModeSet::new(self.mass, self.time, modes)
    }
}

// --- JSON schema -----------------------------------------------------------
//
// {
//   "mass": 1.0,
//   "time": 0.0,
//   "modes": [
//     { "k": [1.0], "amplitude": { "re": 0.5, "im": 0.0 }, "weight": 6.2832 }
//   ]
// }

#[derive(Serialize, Deserialize)]
struct ComplexJson {
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct ModeJson {
    k: Vec<f64>,
    amplitude: ComplexJson,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct ModeSetJson {
    mass: f64,
    time: f64,
    modes: Vec<ModeJson>,
}

/// Serialize a mode set to the documented JSON schema.
pub fn modeset_to_json(ms: &ModeSet) -> String {
    let doc = ModeSetJson {
        mass: ms.mass().value(),
        time: ms.time(),
        modes: ms
            .modes()
            .iter()
            .map(|m| ModeJson {
                k: m.k.clone(),
                amplitude: ComplexJson {
                    re: m.amplitude.re,
                    im: m.amplitude.im,
                },
                weight: m.weight,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("mode set serialization cannot fail")
}

/// Parse a mode set from the documented JSON schema, re-validating all
/// invariants (positive mass and weights, distinct wavevectors).
pub fn modeset_from_json(text: &str) -> Result<ModeSet> {
    let doc: ModeSetJson =
        serde_json::from_str(text).map_err(|e| KgError::ModeSetJson(e.to_string()))?;
    let mass = Mass::new(doc.mass)?;
    let modes = doc
        .modes
        .into_iter()
        .map(|m| Mode::new(m.k, Complex64::new(m.amplitude.re, m.amplitude.im), m.weight))
        .collect();
    ModeSet::new(mass, doc.time, modes)
}
