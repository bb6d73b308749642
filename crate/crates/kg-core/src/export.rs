//! CSV builders for observables and spectrum dumps.
//!
//! Plain text, one header row, `{:.17e}` floats: deterministic output that
//! survives a round trip through any plotting tool.

use crate::error::Result;
use crate::field::{omegas, LatticeField, Spectrum};
use crate::products::{naive_symplectic, norm, norm_contributions, total_energy};

/// Header of the per-step observables table written by the `evolve` command.
pub fn observables_header() -> &'static str {
    "time,norm_b1,energy,naive_self\n"
}

/// One observables row: time, `norm(b=1)`, total energy and the naive
/// symplectic self-charge (reported as its imaginary component, which is the
/// only part the product can have; it vanishes identically for a field
/// paired with itself).
pub fn observables_row(f: &LatticeField) -> Result<String> {
    let n = norm(f, 1.0)?;
    let e = total_energy(f)?;
    let q = naive_symplectic(f, f)?;
    Ok(format!(
        "{:.17e},{:.17e},{:.17e},{:.17e}\n",
        f.time(),
        n,
        e,
        q.im
    ))
}

/// Spectrum dump: one row per wavevector bin in canonical order with the
/// wavevector components, the frequency, the stored coefficient and the
/// per-bin norm contribution at `b = 1` (columns `k1..kd, omega, alpha_re,
/// alpha_im, norm_contribution`). Contributions sum to the total norm.
pub fn spectrum_csv(s: &Spectrum) -> Result<String> {
    let dim = s.grid().dim();
    let mut out = String::new();
    for axis in 0..dim {
        out.push_str(&format!("k{},", axis + 1));
    }
    out.push_str("omega,alpha_re,alpha_im,norm_contribution\n");
    let ks = s.grid().wavevectors();
    let ws = omegas(s.grid(), s.mass());
    let contributions = norm_contributions(s, 1.0)?;
    for (((k, w), a), c) in ks.iter().zip(&ws).zip(s.alpha()).zip(&contributions) {
        for x in k {
            out.push_str(&format!("{x:.17e},"));
        }
        out.push_str(&format!("{w:.17e},{:.17e},{:.17e},{c:.17e}\n", a.re, a.im));
    }
    Ok(out)
}
