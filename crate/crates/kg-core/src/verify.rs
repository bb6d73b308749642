//! Executable verification harness.
//!
//! Twelve named suites bundle every invariant of the field/operator/product
//! stack into tolerance-pinned checks with a machine-readable report. Runs
//! are deterministic for a fixed config (no timestamps, fixed check order,
//! seeded generators), so identical configs produce byte-identical reports.
//!
//! Most checks compare a measured residual against an upper bound; power
//! checks (the harness demonstrating that a detector actually fires on bad
//! input) compare against a lower bound instead and are marked `>=` in the
//! report. Tolerance overrides from the config apply to the `<=` checks of
//! the named suite.

use crate::error::{KgError, Result};
use crate::evolve::{evolve_exact, evolve_leapfrog, leapfrog_max_dt};
use crate::fft;
use crate::field::{omegas, random_field, LatticeField, Mass, Spectrum};
use crate::grid::SpatialGrid;
use crate::modes::{Mode, ModeSet};
use crate::ops::{apply_operator, apply_operator_complex, grading, project, project_data, EnergySign, OperatorKind};
use crate::products::{
    continuity_residual, continuity_residual_fd, current_charge, current_density,
    inner_product_modes, inner_product_quadform, inner_product_spatial, matrix_m_eigenvalues,
    naive_symplectic, norm, norm_contributions, norm_spectrum, total_energy, ProductParams,
};
use crate::sum::{pairwise_sum, pairwise_sum_complex};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// The named verification suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    ProjectorAlgebra,
    ConservationExact,
    ConservationLeapfrog,
    AIndependence,
    Positivity,
    TripleEquivalence,
    Parseval,
    BoostInvariance,
    Continuity,
    NaiveVanishing,
    EnergyRelation,
    ConvergenceOrder,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::ProjectorAlgebra,
        Suite::ConservationExact,
        Suite::ConservationLeapfrog,
        Suite::AIndependence,
        Suite::Positivity,
        Suite::TripleEquivalence,
        Suite::Parseval,
        Suite::BoostInvariance,
        Suite::Continuity,
        Suite::NaiveVanishing,
        Suite::EnergyRelation,
        Suite::ConvergenceOrder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ProjectorAlgebra => "projector-algebra",
            Suite::ConservationExact => "conservation-exact",
            Suite::ConservationLeapfrog => "conservation-leapfrog",
            Suite::AIndependence => "a-independence",
            Suite::Positivity => "positivity",
            Suite::TripleEquivalence => "triple-equivalence",
            Suite::Parseval => "parseval",
            Suite::BoostInvariance => "boost-invariance",
            Suite::Continuity => "continuity",
            Suite::NaiveVanishing => "naive-vanishing",
            Suite::EnergyRelation => "energy-relation",
            Suite::ConvergenceOrder => "convergence-order",
        }
    }

    pub fn from_name(name: &str) -> Result<Suite> {
        Suite::ALL
            .iter()
            .copied()
            .find(|s| s.name() == name)
            .ok_or_else(|| KgError::UnknownSuite(name.to_string()))
    }

    fn index(self) -> u64 {
        Suite::ALL.iter().position(|s| *s == self).unwrap() as u64
    }
}

/// Grid request in a config; omitted points/lengths fall back to desk-scale
/// defaults (1D 256, 2D 64^2, 3D 32^3, box length 2 pi per axis).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    #[serde(default)]
    pub points: Option<Vec<usize>>,
    #[serde(default)]
    pub lengths: Option<Vec<f64>>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            dim: 1,
            points: None,
            lengths: None,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<SpatialGrid> {
        let default_n = match self.dim {
            1 => 256,
            2 => 64,
            3 => 32,
            other => return Err(KgError::InvalidDim(other)),
        };
        let points = self
            .points
            .clone()
            .unwrap_or_else(|| vec![default_n; self.dim]);
        let lengths = self
            .lengths
            .clone()
            .unwrap_or_else(|| vec![2.0 * PI; self.dim]);
        if points.len() != self.dim || lengths.len() != self.dim {
            return Err(KgError::InvalidDim(self.dim));
        }
        SpatialGrid::new(&points, &lengths)
    }
}

fn default_seed() -> u64 {
    1
}

fn default_mass() -> f64 {
    1.0
}

/// Harness configuration; deserializable from the CLI's JSON config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "default_mass")]
    pub mass: f64,
    /// Suite names to run; omitted means all twelve.
    #[serde(default)]
    pub suites: Option<Vec<String>>,
    /// Per-suite tolerance overrides for the `<=` checks.
    #[serde(default)]
    pub tolerances: HashMap<String, f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: default_seed(),
            grid: GridSpec::default(),
            mass: default_mass(),
            suites: None,
            tolerances: HashMap::new(),
        }
    }
}

impl SuiteConfig {
    pub fn from_json(text: &str) -> Result<SuiteConfig> {
        serde_json::from_str(text).map_err(|e| KgError::ModeSetJson(e.to_string()))
    }
}

/// Pass direction of a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One named check with its measured value and pinned threshold.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub suite: String,
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub direction: Direction,
    pub pass: bool,
}

/// Full harness report; `aggregate_pass` holds exactly when every check
/// passes.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub seed: u64,
    pub dim: usize,
    pub points: Vec<usize>,
    pub lengths: Vec<f64>,
    pub mass: f64,
    pub suites_run: Vec<String>,
    pub checks: Vec<CheckResult>,
    pub aggregate_pass: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Plain-text summary table, one row per check.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<22} {:<36} {:>13} {:>13}  {:<3} result",
            "suite", "check", "measured", "threshold", "dir"
        );
        let _ = writeln!(out, "{}", "-".repeat(98));
        for c in &self.checks {
            let dir = match c.direction {
                Direction::AtMost => "<=",
                Direction::AtLeast => ">=",
            };
            let _ = writeln!(
                out,
                "{:<22} {:<36} {:>13.4e} {:>13.4e}  {:<3} {}",
                c.suite,
                c.name,
                c.measured,
                c.threshold,
                dir,
                if c.pass { "pass" } else { "FAIL" }
            );
        }
        let passed = self.checks.iter().filter(|c| c.pass).count();
        let _ = writeln!(
            out,
            "aggregate: {} ({passed}/{} checks)",
            if self.aggregate_pass { "PASS" } else { "FAIL" },
            self.checks.len()
        );
        out
    }
}

struct Checker {
    suite: &'static str,
    override_tol: Option<f64>,
    out: Vec<CheckResult>,
}

impl Checker {
    fn new(suite: Suite, cfg: &SuiteConfig) -> Self {
        Checker {
            suite: suite.name(),
            override_tol: cfg.tolerances.get(suite.name()).copied(),
            out: Vec::new(),
        }
    }

    fn le(&mut self, name: &str, measured: f64, default_tol: f64) {
        let threshold = self.override_tol.unwrap_or(default_tol);
        self.out.push(CheckResult {
            suite: self.suite.to_string(),
            name: name.to_string(),
            measured,
            threshold,
            direction: Direction::AtMost,
            pass: measured <= threshold,
        });
    }

    fn ge(&mut self, name: &str, measured: f64, threshold: f64) {
        self.out.push(CheckResult {
            suite: self.suite.to_string(),
            name: name.to_string(),
            measured,
            threshold,
            direction: Direction::AtLeast,
            pass: measured >= threshold,
        });
    }
}

/// Run the configured suites and collect the report.
///
/// Suites execute independently (in parallel when a rayon pool is available;
/// `KG_THREADS` caps it) but the report lists them in request order, so the
/// output is schedule-independent.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Report> {
    let grid = cfg.grid.build()?;
    let mass = Mass::new(cfg.mass)?;
    let suites: Vec<Suite> = match &cfg.suites {
        None => Suite::ALL.to_vec(),
        Some(names) => names
            .iter()
            .map(|n| Suite::from_name(n))
            .collect::<Result<_>>()?,
    };
    for key in cfg.tolerances.keys() {
        Suite::from_name(key)?;
    }

    let run_all = || -> Result<Vec<Vec<CheckResult>>> {
        suites
            .par_iter()
            .map(|&s| run_one(s, cfg, &grid, mass))
            .collect()
    };
    let results = match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(run_all),
        None => run_all(),
    }?;

    let checks: Vec<CheckResult> = results.into_iter().flatten().collect();
    let aggregate_pass = checks.iter().all(|c| c.pass);
    Ok(Report {
        seed: cfg.seed,
        dim: grid.dim(),
        points: grid.points().to_vec(),
        lengths: grid.lengths().to_vec(),
        mass: cfg.mass,
        suites_run: suites.iter().map(|s| s.name().to_string()).collect(),
        checks,
        aggregate_pass,
    })
}

fn thread_cap() -> Option<usize> {
    std::env::var("KG_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
}

fn run_one(suite: Suite, cfg: &SuiteConfig, grid: &SpatialGrid, mass: Mass) -> Result<Vec<CheckResult>> {
    let mut ck = Checker::new(suite, cfg);
    let seed = cfg.seed.wrapping_mul(0x9E37_79B9).wrapping_add(suite.index() * 1000);
    match suite {
        Suite::ProjectorAlgebra => suite_projector(&mut ck, grid, mass, seed)?,
        Suite::ConservationExact => suite_conservation_exact(&mut ck, grid, mass, seed)?,
        Suite::ConservationLeapfrog => suite_conservation_leapfrog(&mut ck, grid, mass, seed)?,
        Suite::AIndependence => suite_a_independence(&mut ck, grid, mass, seed)?,
        Suite::Positivity => suite_positivity(&mut ck, grid, mass, seed)?,
        Suite::TripleEquivalence => suite_triple_equivalence(&mut ck, grid, mass, seed)?,
        Suite::Parseval => suite_parseval(&mut ck, grid, mass, seed)?,
        Suite::BoostInvariance => suite_boost_invariance(&mut ck, grid, mass, seed)?,
        Suite::Continuity => suite_continuity(&mut ck, grid, mass, seed)?,
        Suite::NaiveVanishing => suite_naive_vanishing(&mut ck, grid, mass, seed)?,
        Suite::EnergyRelation => suite_energy_relation(&mut ck, grid, mass, seed)?,
        Suite::ConvergenceOrder => suite_convergence_order(&mut ck, grid, mass, seed)?,
    }
    Ok(ck.out)
}

// --- shared helpers ---------------------------------------------------------

/// Band limit that keeps quadratic quantities (currents, energy densities)
/// alias-free: per axis, twice the band must stay below the Nyquist index.
/// Capped at 8 frequency units so residual scales stay tame in every
/// dimension.
fn conservative_band(grid: &SpatialGrid) -> f64 {
    (0..grid.dim())
        .map(|axis| {
            let dk = 2.0 * PI / grid.lengths()[axis];
            let max_m = (grid.points()[axis] as f64 / 2.0 - 1.0) / 2.0;
            dk * max_m.min(8.0)
        })
        .fold(f64::INFINITY, f64::min)
}

fn normalized_field(grid: &SpatialGrid, mass: Mass, seed: u64, band: f64) -> Result<Spectrum> {
    let s = random_field(grid, mass, seed, band)?;
    let n = norm_spectrum(&s, 1.0)?;
    Ok(if n > 0.0 { s.scaled(1.0 / n.sqrt()) } else { s })
}

fn max_rel(diff: f64, scale: f64) -> f64 {
    diff / scale.max(1e-300)
}

fn complex_scale(values: &[Complex64]) -> f64 {
    values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

// --- suites -----------------------------------------------------------------

fn suite_projector(ck: &mut Checker, grid: &SpatialGrid, mass: Mass, seed: u64) -> Result<()> {
    let f = normalized_field(grid, mass, seed, grid.nyquist())?.to_lattice()?;
    let plus = project(EnergySign::Positive, &f);
    let minus = project(EnergySign::Negative, &f);
    let scale = complex_scale(plus.values()).max(1e-300);

    // completeness P+ + P- = 1, exact by construction
    let completeness = plus
        .values()
        .iter()
        .zip(minus.values())
        .zip(f.phi())
        .map(|((p, m), &phi)| (p + m - Complex64::new(phi, 0.0)).norm())
        .fold(0.0, f64::max);
    ck.le("completeness_exact", completeness, 0.0);

    let conj = plus
        .values()
        .iter()
        .zip(minus.values())
        .map(|(p, m)| (p.conj() - m).norm())
        .fold(0.0, f64::max);
    ck.le("conjugate_pairing", max_rel(conj, scale), 1e-13);

    // idempotence: rebuild the real field carried by one half, project again
    for (sign, half, name) in [
        (EnergySign::Positive, &plus, "idempotence_plus"),
        (EnergySign::Negative, &minus, "idempotence_minus"),
    ] {
        let shalf = apply_operator_complex(OperatorKind::SqrtD, half.values(), grid, mass)?;
        let tfac = match sign {
            EnergySign::Positive => -Complex64::i(),
            EnergySign::Negative => Complex64::i(),
        };
        let phi_g: Vec<f64> = half.values().iter().map(|v| 2.0 * v.re).collect();
        let pi_g: Vec<f64> = shalf.iter().map(|v| 2.0 * (tfac * v).re).collect();
        let g = LatticeField::new(grid.clone(), mass, f.time(), phi_g, pi_g)?;
        let again = project(sign, &g);
        let residual = again.max_abs_diff(half);
        ck.le(name, max_rel(residual, scale), 1e-12);
    }

    // orthogonality: P+ annihilates negative-frequency data and vice versa
    let s_minus = apply_operator_complex(OperatorKind::SqrtD, minus.values(), grid, mass)?;
    let pi_minus: Vec<Complex64> = s_minus.iter().map(|v| Complex64::i() * v).collect();
    let ortho_pm = complex_scale(&project_data(
        EnergySign::Positive,
        minus.values(),
        &pi_minus,
        grid,
        mass,
    )?);
    ck.le("orthogonality_plus_minus", max_rel(ortho_pm, scale), 1e-12);

    let s_plus = apply_operator_complex(OperatorKind::SqrtD, plus.values(), grid, mass)?;
    let pi_plus: Vec<Complex64> = s_plus.iter().map(|v| -Complex64::i() * v).collect();
    let ortho_mp = complex_scale(&project_data(
        EnergySign::Negative,
        plus.values(),
        &pi_plus,
        grid,
        mass,
    )?);
    ck.le("orthogonality_minus_plus", max_rel(ortho_mp, scale), 1e-12);

    // grading = P+ - P-, squares to the identity on shell
    let n_field = grading(&f);
    let diff = n_field
        .values()
        .iter()
        .zip(plus.values())
        .zip(minus.values())
        .map(|((n, p), m)| (n - (p - m)).norm())
        .fold(0.0, f64::max);
    ck.le("grading_is_projector_difference", max_rel(diff, scale), 1e-13);

    let sphi = apply_operator(OperatorKind::SqrtD, f.phi(), grid, mass)?;
    let pi_n: Vec<Complex64> = sphi.iter().map(|&x| Complex64::new(0.0, -x)).collect();
    let twice = apply_operator_complex(OperatorKind::InvSqrtD, &pi_n, grid, mass)?;
    let phi_scale = f.phi().iter().map(|x| x.abs()).fold(1e-300, f64::max);
    let invol = twice
        .iter()
        .zip(f.phi())
        .map(|(v, &phi)| (Complex64::i() * v - phi).norm())
        .fold(0.0, f64::max);
    ck.le("grading_involution", max_rel(invol, phi_scale), 1e-12);

    // eigenvalues +-1 on frequency eigenstates
    let u_pos = apply_operator_complex(OperatorKind::InvSqrtD, &pi_plus, grid, mass)?;
    let eig_plus = u_pos
        .iter()
        .zip(plus.values())
        .map(|(u, p)| (Complex64::i() * u - p).norm())
        .fold(0.0, f64::max);
    ck.le("grading_eigenvalue_plus", max_rel(eig_plus, scale), 1e-12);
    let u_neg = apply_operator_complex(OperatorKind::InvSqrtD, &pi_minus, grid, mass)?;
    let eig_minus = u_neg
        .iter()
        .zip(minus.values())
        .map(|(u, m)| (Complex64::i() * u + m).norm())
        .fold(0.0, f64::max);
    ck.le("grading_eigenvalue_minus", max_rel(eig_minus, scale), 1e-12);

    // factorized operator: D phi = -d^2/dt^2 phi on a single-frequency field
    let k1 = 2.0 * PI / grid.lengths()[0];
    let mut kv = vec![0.0; grid.dim()];
    kv[0] = k1;
    let ms = ModeSet::new(
        mass,
        0.3,
        vec![Mode::new(kv.clone(), Complex64::new(0.6, -0.2), 1.0)],
    )?;
    let single = ms.to_lattice(grid)?;
    let dphi = apply_operator(OperatorKind::D, single.phi(), grid, mass)?;
    let mode = &ms.modes()[0];
    let w = mode.omega(mass);
    let pref = ms.mode_prefactor(mode);
    let rot = mode.amplitude * Complex64::from_polar(1.0, -w * ms.time());
    // D amplifies transform noise by up to omega_max^2; the pointwise
    // identity is machine-exact relative to that operator scale
    let wmax = crate::field::omega_max(grid, mass);
    let dscale =
        wmax * wmax * single.phi().iter().map(|x| x.abs()).fold(1e-300, f64::max);
    let kg_res = grid
        .positions()
        .iter()
        .zip(&dphi)
        .map(|(x, got)| {
            let kx: f64 = kv.iter().zip(x).map(|(k, x)| k * x).sum();
            let want = w * w * pref * 2.0 * (rot * Complex64::from_polar(1.0, kx)).re;
            (got - want).abs()
        })
        .fold(0.0, f64::max);
    ck.le("kg_factorization_single_mode", max_rel(kg_res, dscale), 1e-12);
    Ok(())
}

fn suite_conservation_exact(
    ck: &mut Checker,
    grid: &SpatialGrid,
    mass: Mass,
    seed: u64,
) -> Result<()> {
    let m = mass.value();
    let s1 = normalized_field(grid, mass, seed + 1, 0.9 * grid.nyquist())?;
    let s2 = normalized_field(grid, mass, seed + 2, 0.9 * grid.nyquist())?;
    let p0 = ProductParams::default();
    let f1 = s1.to_lattice()?;
    let f2 = s2.to_lattice()?;
    let v0 = inner_product_spatial(&f1, &f2, p0)?;
    let n0 = norm(&f1, 1.0)?;
    let e0 = total_energy(&f1)?;

    let samples = 20usize;
    let dt = 20.0 / (m * samples as f64);
    let mut a1 = s1.clone();
    let mut a2 = s2.clone();
    let (mut dp, mut dn, mut de) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        a1 = evolve_exact(&a1, dt);
        a2 = evolve_exact(&a2, dt);
        let g1 = a1.to_lattice()?;
        let g2 = a2.to_lattice()?;
        dp = dp.max((inner_product_spatial(&g1, &g2, p0)? - v0).norm() / v0.norm());
        dn = dn.max((norm(&g1, 1.0)? - n0).abs() / n0);
        de = de.max((total_energy(&g1)? - e0).abs() / e0);
    }
    ck.le("product_drift_rel", dp, 1e-12);
    ck.le("norm_drift_rel", dn, 1e-12);
    ck.le("energy_drift_rel", de, 1e-12);

    // the charge of the current density is the product, for a = 0 and a != 0
    for (a, name) in [(0.0, "charge_matches_product_a0"), (0.7, "charge_matches_product_a07")] {
        let p = ProductParams::new(1.0, a)?;
        let c = current_density(&f1, &f2, p)?;
        let charge = current_charge(&c, grid)?;
        let product = inner_product_spatial(&f1, &f2, p)?;
        ck.le(name, (charge - product).norm() / product.norm().max(1e-300), 1e-10);
    }

    // evolving then projecting equals projecting then rotating the half
    let dt_c = 0.7 / m;
    let path_a = project(EnergySign::Positive, &evolve_exact(&s1, dt_c).to_lattice()?);
    let half = project(EnergySign::Positive, &f1);
    let mut hat = half.values().to_vec();
    fft::forward(grid, &mut hat);
    for (h, w) in hat.iter_mut().zip(&omegas(grid, mass)) {
        *h *= Complex64::from_polar(1.0, -w * dt_c);
    }
    fft::inverse(grid, &mut hat);
    let scale = complex_scale(path_a.values()).max(1e-300);
    let commute = path_a
        .values()
        .iter()
        .zip(&hat)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    ck.le("project_evolve_commute", max_rel(commute, scale), 1e-12);
    Ok(())
}

fn suite_conservation_leapfrog(
    ck: &mut Checker,
    grid: &SpatialGrid,
    mass: Mass,
    seed: u64,
) -> Result<()> {
    let m = mass.value();
    let band = conservative_band(grid);
    let s = normalized_field(grid, mass, seed + 1, band)?;
    let mut f = s.to_lattice()?;
    let n0 = norm(&f, 1.0)?;
    let e0 = total_energy(&f)?;
    let dt = (0.01 / m).min(0.5 * leapfrog_max_dt(&f));
    let chunks = 100usize;
    let steps_per_chunk = 10usize;
    let mut dev_norm = Vec::with_capacity(chunks);
    let mut dev_energy = Vec::with_capacity(chunks);
    for _ in 0..chunks {
        f = evolve_leapfrog(&f, dt, steps_per_chunk)?;
        dev_norm.push((norm(&f, 1.0)? - n0).abs() / n0);
        dev_energy.push((total_energy(&f)? - e0).abs() / e0);
    }
    // bounded oscillation: max relative deviation, scaled by dt^2, stays
    // below a pinned constant ~ w_band^2 / 2 (the leapfrog shadow-energy
    // amplitude is ~ (w dt)^2 / 8 per mode; factor 4 of headroom)
    let m2 = m * m;
    let w_band = (band * band * grid.dim() as f64 + m2).sqrt();
    let c_bound = 0.5 * w_band * w_band;
    let max_norm_dev = dev_norm.iter().copied().fold(0.0, f64::max);
    let max_energy_dev = dev_energy.iter().copied().fold(0.0, f64::max);
    ck.le("norm_deviation_over_dt2", max_norm_dev / (dt * dt), c_bound);
    ck.le("energy_deviation_over_dt2", max_energy_dev / (dt * dt), c_bound);

    // not secular: the second half of the run is no worse than the first
    let half = chunks / 2;
    let first = dev_norm[..half].iter().copied().fold(1e-300, f64::max);
    let second = dev_norm[half..].iter().copied().fold(0.0, f64::max);
    ck.le("norm_oscillation_not_secular", second / first, 1.5);
    Ok(())
}

fn suite_a_independence(ck: &mut Checker, grid: &SpatialGrid, mass: Mass, seed: u64) -> Result<()> {
    let mut worst_spatial = 0.0f64;
    let mut worst_quadform = 0.0f64;
    for i in 0..20u64 {
        let f = normalized_field(grid, mass, seed + i, grid.nyquist())?.to_lattice()?;
        let base_s = inner_product_spatial(&f, &f, ProductParams::default())?;
        let base_q = inner_product_quadform(&f, &f, ProductParams::default())?;
        for a in [-1.0, -0.5, 0.5, 1.0] {
            let p = ProductParams::new(1.0, a)?;
            let vs = inner_product_spatial(&f, &f, p)?;
            let vq = inner_product_quadform(&f, &f, p)?;
            worst_spatial = worst_spatial.max((vs - base_s).norm() / base_s.re);
            worst_quadform = worst_quadform.max((vq - base_q).norm() / base_q.re);
        }
    }
    ck.le("norm_a_independence_spatial", worst_spatial, 1e-12);
    ck.le("norm_a_independence_quadform", worst_quadform, 1e-12);
    Ok(())
}

fn suite_positivity(ck: &mut Checker, grid: &SpatialGrid, mass: Mass, seed: u64) -> Result<()> {
    let mut min_norm = f64::INFINITY;
    for i in 0..100u64 {
        let s = random_field(grid, mass, seed + i, grid.nyquist())?;
        min_norm = min_norm.min(norm_spectrum(&s, 1.0)?);
    }
    ck.ge("norm_strictly_positive_min", min_norm, 1e-300);
    let zero = LatticeField::zero(grid.clone(), mass, 0.0);
    ck.le("zero_field_norm_exact_zero", norm(&zero, 1.0)?.abs(), 0.0);
    Ok(())
}

fn suite_triple_equivalence(
    ck: &mut Checker,
    grid: &SpatialGrid,
    mass: Mass,
    seed: u64,
) -> Result<()> {
    let mut sq = 0.0f64;
    let mut sm = 0.0f64;
    let mut qm = 0.0f64;
    let mut proj = 0.0f64;
    for i in 0..20u64 {
        let s1 = normalized_field(grid, mass, seed + 2 * i, grid.nyquist())?;
        let s2 = normalized_field(grid, mass, seed + 2 * i + 1, grid.nyquist())?;
        let f1 = s1.to_lattice()?;
        let f2 = s2.to_lattice()?;
        for a in [0.0, 0.5, -0.5] {
            let p = ProductParams::new(1.0, a)?;
            let spatial = inner_product_spatial(&f1, &f2, p)?;
            let quadf = inner_product_quadform(&f1, &f2, p)?;
            let modes = inner_product_modes(&s1, &s2, p)?;
            let scale = spatial.norm().max(1e-300);
            sq = sq.max((spatial - quadf).norm() / scale);
            sm = sm.max((spatial - modes).norm() / scale);
            qm = qm.max((quadf - modes).norm() / scale);
            let projector = inner_product_projector_form(&f1, &f2, p)?;
            proj = proj.max((spatial - projector).norm() / scale);
        }
    }
    ck.le("spatial_vs_quadform", sq, 1e-10);
    ck.le("spatial_vs_modes", sm, 1e-10);
    ck.le("quadform_vs_modes", qm, 1e-10);
    ck.le("projector_form_vs_spatial", proj, 1e-10);
    Ok(())
}

/// Energy-split form of the bilinear product,
/// `b int (a+1) (phi1- i<->dt phi2+) + (a-1) (phi1+ i<->dt phi2-)`,
/// with the half time-derivatives `d/dt phi(+-) = for i sqrt(D) phi(+-)`.
/// Used only here, as a cross-check of the production (projector-free) path.
fn inner_product_projector_form(
    f1: &LatticeField,
    f2: &LatticeField,
    p: ProductParams,
) -> Result<Complex64> {
    let grid = f1.grid();
    let mass = f1.mass();
    let p1m = project(EnergySign::Negative, f1);
    let p1p = project(EnergySign::Positive, f1);
    let p2p = project(EnergySign::Positive, f2);
    let p2m = project(EnergySign::Negative, f2);
    let s1m = apply_operator_complex(OperatorKind::SqrtD, p1m.values(), grid, mass)?;
    let s1p = apply_operator_complex(OperatorKind::SqrtD, p1p.values(), grid, mass)?;
    let s2p = apply_operator_complex(OperatorKind::SqrtD, p2p.values(), grid, mass)?;
    let s2m = apply_operator_complex(OperatorKind::SqrtD, p2m.values(), grid, mass)?;
    let n = grid.site_count();
    let mut integrand = vec![Complex64::default(); n];
    for i in 0..n {
        // phi1- i<->dt phi2+ = phi1- sqrt(D) phi2+ + (sqrt(D) phi1-) phi2+
        let b1 = p1m.values()[i] * s2p[i] + s1m[i] * p2p.values()[i];
        // phi1+ i<->dt phi2- = -(phi1+ sqrt(D) phi2- + (sqrt(D) phi1+) phi2-)
        let b2 = -(p1p.values()[i] * s2m[i] + s1p[i] * p2m.values()[i]);
        integrand[i] = (p.a() + 1.0) * b1 + (p.a() - 1.0) * b2;
    }
    Ok(p.b() * grid.cell_volume() * pairwise_sum_complex(&integrand))
}

fn suite_parseval(ck: &mut Checker, grid: &SpatialGrid, mass: Mass, seed: u64) -> Result<()> {
    let mut worst = 0.0f64;
    for i in 0..10u64 {
        let s1 = normalized_field(grid, mass, seed + 2 * i, grid.nyquist())?;
        let s2 = normalized_field(grid, mass, seed + 2 * i + 1, grid.nyquist())?;
        let p = ProductParams::default();
        let modes = inner_product_modes(&s1, &s2, p)?;
        let spatial = inner_product_spatial(&s1.to_lattice()?, &s2.to_lattice()?, p)?;
        worst = worst.max((modes - spatial).norm() / spatial.norm().max(1e-300));
    }
    ck.le("parseval_modes_vs_spatial", worst, 1e-10);
    Ok(())
}

fn suite_boost_invariance(
    ck: &mut Checker,
    grid: &SpatialGrid,
    mass: Mass,
    seed: u64,
) -> Result<()> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dim = grid.dim();
    let mut modes = Vec::new();
    for _ in 0..12 {
        let k: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 6.0 - 3.0).collect();
        let amp = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let weight = 0.5 + 1.5 * rng.random::<f64>();
        modes.push(Mode::new(k, amp, weight));
    }
    let ms = ModeSet::new(mass, 0.0, modes)?;
    let n0 = crate::products::norm_modeset(&ms, 1.0)?;
    let invariant = |set: &ModeSet| -> Vec<f64> {
        set.modes()
            .iter()
            .map(|m| m.amplitude.norm_sqr() * m.weight / m.omega(mass))
            .collect()
    };
    let inv0 = invariant(&ms);

    let mut worst_norm = 0.0f64;
    let mut worst_mode = 0.0f64;
    for axis in 0..dim {
        for eta in [0.5, 1.2, 2.0] {
            let boosted = ms.boost(eta, axis)?;
            worst_norm = worst_norm
                .max((crate::products::norm_modeset(&boosted, 1.0)? - n0).abs() / n0.abs());
            for (a, b) in invariant(&boosted).iter().zip(&inv0) {
                worst_mode = worst_mode.max((a - b).abs() / b.abs());
            }
        }
    }
    ck.le("norm_boost_invariance", worst_norm, 1e-12);
    ck.le("per_mode_measure_invariance", worst_mode, 1e-12);

    // identity boost is exact
    let id = ms.boost(0.0, 0)?;
    let id_res = id
        .modes()
        .iter()
        .zip(ms.modes())
        .map(|(a, b)| {
            let dk: f64 = a
                .k
                .iter()
                .zip(&b.k)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            dk.max((a.weight - b.weight).abs())
        })
        .fold(0.0, f64::max);
    ck.le("identity_boost_exact", id_res, 0.0);

    // group composition
    let two = ms.boost(0.5, 0)?.boost(0.7, 0)?;
    let one = ms.boost(1.2, 0)?;
    let comp = two
        .modes()
        .iter()
        .zip(one.modes())
        .map(|(a, b)| {
            let dk: f64 = a
                .k
                .iter()
                .zip(&b.k)
                .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
                .fold(0.0, f64::max);
            dk.max((a.weight - b.weight).abs() / b.weight)
        })
        .fold(0.0, f64::max);
    ck.le("boost_composition", comp, 1e-12);
    Ok(())
}

fn suite_continuity(ck: &mut Checker, grid: &SpatialGrid, mass: Mass, seed: u64) -> Result<()> {
    let m = mass.value();
    let band = conservative_band(grid);
    let s1 = normalized_field(grid, mass, seed + 1, band)?;
    let s2 = normalized_field(grid, mass, seed + 2, band)?;
    let f1 = s1.to_lattice()?;
    let f2 = s2.to_lattice()?;
    ck.le(
        "residual_onshell_a0",
        continuity_residual(&f1, &f2, ProductParams::default())?,
        1e-10,
    );
    ck.le(
        "residual_onshell_a07",
        continuity_residual(&f1, &f2, ProductParams::new(1.0, 0.7)?)?,
        1e-10,
    );
    let z = LatticeField::zero(grid.clone(), mass, 0.0);
    ck.le(
        "residual_zero_field",
        continuity_residual(&z, &z, ProductParams::default())?,
        0.0,
    );

    // finite-difference residual: small on the true flow ...
    let dt = 1e-3 / m;
    let slice = |s: &Spectrum, t: f64| -> Result<LatticeField> {
        evolve_exact(s, t).to_lattice()
    };
    let on_shell = continuity_residual_fd(
        (&slice(&s1, -dt)?, &slice(&s2, -dt)?),
        (&f1, &f2),
        (&slice(&s1, dt)?, &slice(&s2, dt)?),
        dt,
        ProductParams::default(),
    )?;
    ck.le("fd_residual_onshell", on_shell, 1e-3);

    // ... and order one on a fake trajectory oscillating at the wrong
    // frequency (every mode would need its own w_k; lambda < m fits none)
    let lambda = 0.5 * m;
    let phase = 0.4;
    let fake = |t: f64| -> Result<LatticeField> {
        let c = (lambda * t + phase).cos();
        let sv = -lambda * (lambda * t + phase).sin();
        LatticeField::new(
            grid.clone(),
            mass,
            0.0,
            f1.phi().iter().map(|&x| c * x).collect(),
            f1.phi().iter().map(|&x| sv * x).collect(),
        )
    };
    let (fm, fc, fp) = (fake(-dt)?, fake(0.0)?, fake(dt)?);
    let off_shell =
        continuity_residual_fd((&fm, &fm), (&fc, &fc), (&fp, &fp), dt, ProductParams::default())?;
    ck.ge("fd_residual_offshell_power", off_shell, 1e-2);
    Ok(())
}

fn suite_naive_vanishing(ck: &mut Checker, grid: &SpatialGrid, mass: Mass, seed: u64) -> Result<()> {
    let mut max_self = 0.0f64;
    let mut min_norm = f64::INFINITY;
    for i in 0..100u64 {
        let f = normalized_field(grid, mass, seed + i, grid.nyquist())?.to_lattice()?;
        max_self = max_self.max(naive_symplectic(&f, &f)?.norm());
        min_norm = min_norm.min(norm(&f, 1.0)?);
    }
    ck.le("naive_self_charge_max", max_self, 1e-13);
    ck.ge("norm_positive_on_same_fields", min_norm, 1e-300);

    let f1 = normalized_field(grid, mass, seed + 201, grid.nyquist())?.to_lattice()?;
    let f2 = normalized_field(grid, mass, seed + 202, grid.nyquist())?.to_lattice()?;
    let q12 = naive_symplectic(&f1, &f2)?;
    let q21 = naive_symplectic(&f2, &f1)?;
    ck.le("antisymmetry_under_swap", (q12 + q21).norm() / q12.norm().max(1e-300), 1e-12);

    // one shared mode, phases a quarter turn apart: the naive product reads
    // the sine (Q = i w V |a1||a2| * 2 sin(pi/2) / ... -> i w V here), the
    // positive product reads the cosine and vanishes
    let k1 = 2.0 * PI / grid.lengths()[0];
    let mut kv = vec![0.0; grid.dim()];
    kv[0] = k1;
    let g1 = Spectrum::plane_wave(grid.clone(), mass, 0.0, &kv, Complex64::new(0.5, 0.0))?
        .to_lattice()?;
    let g2 = Spectrum::plane_wave(grid.clone(), mass, 0.0, &kv, Complex64::new(0.0, 0.5))?
        .to_lattice()?;
    let w = (k1 * k1 + mass.value() * mass.value()).sqrt();
    let expected = Complex64::new(0.0, w * grid.volume());
    let q = naive_symplectic(&g1, &g2)?;
    ck.le(
        "sine_content_matches_closed_form",
        (q - expected).norm() / expected.norm(),
        1e-12,
    );
    let cos_part = inner_product_spatial(&g1, &g2, ProductParams::default())?;
    ck.le("cosine_counterpart_vanishes", cos_part.norm() / expected.norm(), 1e-12);

    // mixing-matrix eigenvalues: 1 +- a, with the semi-definite flag
    // flipping exactly at |a| = 1
    let e_in = matrix_m_eigenvalues(1.0);
    let e_out = matrix_m_eigenvalues(1.0 + 1e-12);
    let flag_err = (e_in.plus - 2.0).abs()
        + e_in.minus.abs()
        + f64::from(!e_in.positive_semidefinite)
        + f64::from(e_out.positive_semidefinite);
    ck.le("m_eigenvalues_boundary", flag_err, 0.0);
    Ok(())
}

fn suite_energy_relation(ck: &mut Checker, grid: &SpatialGrid, mass: Mass, seed: u64) -> Result<()> {
    // pinned closed forms on the canonical 1D box (L = 2 pi, m = 1)
    let g1 = SpatialGrid::new(&[32], &[2.0 * PI])?;
    let m1 = Mass::new(1.0)?;
    let amp = Complex64::new(0.5, 0.0);
    for (idx, k) in [0.0, 1.0, 2.0].into_iter().enumerate() {
        let f = Spectrum::plane_wave(g1.clone(), m1, 0.0, &[k], amp)?.to_lattice()?;
        let w = (k * k + 1.0_f64).sqrt();
        let expected_norm = 4.0 * w * g1.volume() * 0.25;
        let expected_energy = 2.0 * w * w * g1.volume() * 0.25;
        let n = norm(&f, 1.0)?;
        let e = total_energy(&f)?;
        ck.le(
            &format!("norm_closed_form_k{idx}"),
            (n - expected_norm).abs() / expected_norm,
            1e-12,
        );
        ck.le(
            &format!("energy_closed_form_k{idx}"),
            (e - expected_energy).abs() / expected_energy,
            1e-12,
        );
        ck.le(
            &format!("energy_norm_relation_k{idx}"),
            (e - 0.5 * w * n).abs() / expected_energy,
            1e-12,
        );
    }

    // additivity, degree-2 homogeneity and per-bin contributions on the
    // configured grid
    let s = random_field(grid, mass, seed + 1, conservative_band(grid))?;
    let mut s_a = Spectrum::zero(grid.clone(), mass, 0.0);
    let mut s_b = Spectrum::zero(grid.clone(), mass, 0.0);
    for (i, a) in s.alpha().iter().enumerate() {
        if i % 2 == 0 {
            s_a.alpha_mut()[i] = *a;
        } else {
            s_b.alpha_mut()[i] = *a;
        }
    }
    let total = norm_spectrum(&s, 1.0)?;
    let parts = norm_spectrum(&s_a, 1.0)? + norm_spectrum(&s_b, 1.0)?;
    ck.le("norm_additive_over_disjoint_modes", (total - parts).abs() / total, 1e-12);
    let doubled = norm_spectrum(&s.scaled(2.0), 1.0)?;
    ck.le(
        "norm_homogeneous_degree_2",
        (doubled - 4.0 * total).abs() / (4.0 * total),
        1e-12,
    );
    let contributions = norm_contributions(&s, 1.0)?;
    let csum = pairwise_sum(&contributions);
    let spatial = norm(&s.to_lattice()?, 1.0)?;
    ck.le("contributions_sum_to_norm", (csum - spatial).abs() / spatial, 1e-10);

    let zero = LatticeField::zero(grid.clone(), mass, 0.0);
    ck.le("zero_field_energy_exact_zero", total_energy(&zero)?.abs(), 0.0);
    Ok(())
}

fn suite_convergence_order(
    ck: &mut Checker,
    grid: &SpatialGrid,
    mass: Mass,
    seed: u64,
) -> Result<()> {
    let m = mass.value();
    let s = normalized_field(grid, mass, seed + 1, conservative_band(grid))?;
    let f = s.to_lattice()?;
    let dt0 = (0.008 / m).min(0.5 * leapfrog_max_dt(&f));
    let dts = [dt0, dt0 / 2.0, dt0 / 4.0, dt0 / 8.0];
    let table = convergence_study(&dts, 1.0 / m, &f)?;
    for (i, pair) in table.rows.windows(2).enumerate() {
        let ratio = pair[0].max_error / pair[1].max_error;
        ck.le(&format!("halving_ratio_{}", i + 1), (ratio - 4.0).abs(), 0.5);
    }
    let order = table.fitted_order.unwrap_or(0.0);
    ck.le("fitted_order_is_two", (order - 2.0).abs(), 0.25);

    let zero_table = convergence_study(&dts, 0.0, &f)?;
    let worst = zero_table
        .rows
        .iter()
        .map(|r| r.max_error)
        .fold(0.0, f64::max);
    ck.le("zero_horizon_zero_error", worst, 0.0);
    Ok(())
}

// --- convergence study -------------------------------------------------------

/// One row of a convergence table.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub steps: usize,
    pub max_error: f64,
}

/// Leapfrog-vs-exact error table with a least-squares order fit (needs at
/// least two rows with nonzero error; a single-entry table reports no fit).
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub fitted_order: Option<f64>,
}

/// Evolve `field` to `t_final` with leapfrog at each `dt` and measure the
/// max-norm error of `(phi, pi)` against exact evolution to the same time.
pub fn convergence_study(
    dt_list: &[f64],
    t_final: f64,
    field: &LatticeField,
) -> Result<ConvergenceTable> {
    let spectrum = field.to_spectrum();
    let mut rows = Vec::with_capacity(dt_list.len());
    for &dt in dt_list {
        let steps = if t_final == 0.0 {
            0
        } else {
            (t_final / dt).round().max(1.0) as usize
        };
        let reached = steps as f64 * dt;
        let lf = evolve_leapfrog(field, dt, steps)?;
        // at zero steps both trajectories are the input itself; skip the
        // transform round trip so the error is exactly zero
        let exact = if steps == 0 {
            field.clone()
        } else {
            evolve_exact(&spectrum, reached).to_lattice()?
        };
        let mut err = 0.0f64;
        for (a, b) in lf.phi().iter().zip(exact.phi()) {
            err = err.max((a - b).abs());
        }
        for (a, b) in lf.pi().iter().zip(exact.pi()) {
            err = err.max((a - b).abs());
        }
        rows.push(ConvergenceRow {
            dt,
            steps,
            max_error: err,
        });
    }
    let fitted_order = fit_order(&rows);
    Ok(ConvergenceTable { rows, fitted_order })
}

fn fit_order(rows: &[ConvergenceRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.max_error > 0.0)
        .map(|r| (r.dt.ln(), r.max_error.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> SuiteConfig {
        SuiteConfig {
            seed: 3,
            grid: GridSpec {
                dim: 1,
                points: Some(vec![64]),
                lengths: None,
            },
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn default_config_runs_all_suites_and_passes() {
        let report = run_suite(&small_config()).unwrap();
        assert_eq!(report.suites_run.len(), 12);
        for c in &report.checks {
            assert!(
                c.pass,
                "{}/{} failed: measured {:e} vs {:e}",
                c.suite, c.name, c.measured, c.threshold
            );
        }
        assert!(report.aggregate_pass);
    }

    #[test]
    fn unknown_suite_is_rejected() {
        let mut cfg = small_config();
        cfg.suites = Some(vec!["projector-algebra".into(), "nope".into()]);
        assert!(matches!(run_suite(&cfg), Err(KgError::UnknownSuite(_))));
        let mut cfg2 = small_config();
        cfg2.tolerances.insert("nope".into(), 1.0);
        assert!(matches!(run_suite(&cfg2), Err(KgError::UnknownSuite(_))));
    }

    #[test]
    fn report_is_deterministic() {
        let a = run_suite(&small_config()).unwrap().to_json();
        let b = run_suite(&small_config()).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn impossible_tolerance_fails_honestly() {
        let mut cfg = small_config();
        cfg.suites = Some(vec!["triple-equivalence".into()]);
        cfg.tolerances.insert("triple-equivalence".into(), 1e-20);
        let report = run_suite(&cfg).unwrap();
        assert!(!report.aggregate_pass);
        assert!(report.checks.iter().any(|c| !c.pass && c.measured > 1e-20));
    }

    #[test]
    fn pass_pattern_is_seed_robust() {
        let base: Vec<bool> = run_suite(&small_config())
            .unwrap()
            .checks
            .iter()
            .map(|c| c.pass)
            .collect();
        for seed in [7u64, 11, 13, 17, 19] {
            let mut cfg = small_config();
            cfg.seed = seed;
            let pattern: Vec<bool> = run_suite(&cfg).unwrap().checks.iter().map(|c| c.pass).collect();
            assert_eq!(base, pattern, "seed {seed}");
        }
    }

    #[test]
    fn convergence_study_edges() {
        let g = SpatialGrid::new(&[32], &[2.0 * PI]).unwrap();
        let m = Mass::new(1.0).unwrap();
        let f = random_field(&g, m, 5, 4.0).unwrap().to_lattice().unwrap();
        let one = convergence_study(&[0.01], 1.0, &f).unwrap();
        assert_eq!(one.rows.len(), 1);
        assert!(one.fitted_order.is_none());
        let zero = convergence_study(&[0.01, 0.005], 0.0, &f).unwrap();
        assert!(zero.rows.iter().all(|r| r.max_error == 0.0 && r.steps == 0));
        // unstable dt surfaces the leapfrog error
        assert!(convergence_study(&[1.0], 1.0, &f).is_err());
    }

    #[test]
    fn config_json_defaults_and_unknown_fields() {
        let cfg = SuiteConfig::from_json("{}").unwrap();
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.grid.dim, 1);
        assert_eq!(cfg.mass, 1.0);
        assert!(cfg.suites.is_none());
        assert!(SuiteConfig::from_json("{\"bogus\": 1}").is_err());
        let cfg2 = SuiteConfig::from_json(
            "{\"seed\": 9, \"grid\": {\"dim\": 2}, \"suites\": [\"positivity\"]}",
        )
        .unwrap();
        assert_eq!(cfg2.grid.build().unwrap().points(), &[64, 64]);
    }

    #[test]
    fn table_renders_every_check() {
        let mut cfg = small_config();
        cfg.suites = Some(vec!["positivity".into()]);
        let report = run_suite(&cfg).unwrap();
        let table = report.to_table();
        assert!(table.contains("norm_strictly_positive_min"));
        assert!(table.contains("aggregate: PASS"));
    }
}
