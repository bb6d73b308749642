//! Acceptance suite: one test per exit criterion, each printing a pass line
//! with the measured numbers (run with `--nocapture` to see them).
//!
//! Expected values tagged with closed forms below were frozen from an
//! independent brute-force quadrature oracle (`oracle_norm_energy`): fields,
//! their exact-mode derivatives and the integrand are evaluated analytically
//! per mode and summed directly, with no transform anywhere on that path.

use kg_core::{
    continuity_residual, continuity_residual_fd, evolve_exact, export, grading,
    inner_product_modes, inner_product_quadform, inner_product_spatial, matrix_m_eigenvalues,
    naive_symplectic, norm, norm_contributions, norm_spectrum, project, project_data,
    random_field, total_energy, verify, EnergySign, LatticeField, Mass, Mode, ModeSet,
    OperatorKind, ProductParams, SpatialGrid, Spectrum,
};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::time::Instant;

fn default_grid() -> SpatialGrid {
    SpatialGrid::new(&[256], &[2.0 * PI]).unwrap()
}

fn mass1() -> Mass {
    Mass::new(1.0).unwrap()
}

fn unit_field(grid: &SpatialGrid, seed: u64, band: f64) -> Spectrum {
    let s = random_field(grid, mass1(), seed, band).unwrap();
    let n = norm_spectrum(&s, 1.0).unwrap();
    s.scaled(1.0 / n.sqrt())
}

/// Brute-force quadrature of `b [phi sqrt(D) phi + pi D^{-1/2} pi]` and of
/// the energy density for a field given as explicit plane-wave data; sqrt(D)
/// acts as the scalar omega on each mode, so no transform is involved.
fn oracle_norm_energy(grid: &SpatialGrid, modes: &[(f64, Complex64)], b: f64) -> (f64, f64) {
    let xs = grid.positions();
    let n = grid.site_count();
    let (mut phi, mut pi, mut s, mut u, mut dphi) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for &(k, a) in modes {
        let w = (k * k + 1.0).sqrt();
        for (i, x) in xs.iter().enumerate() {
            let e = a * Complex64::from_polar(1.0, k * x[0]);
            let p = 2.0 * e.re;
            let q = 2.0 * (-Complex64::i() * w * e).re;
            phi[i] += p;
            pi[i] += q;
            s[i] += w * p;
            u[i] += q / w;
            dphi[i] += w * w * p;
        }
    }
    let mut nrm = 0.0;
    let mut energy = 0.0;
    for i in 0..n {
        nrm += b * (phi[i] * s[i] + pi[i] * u[i]);
        energy += 0.5 * (pi[i] * pi[i] + phi[i] * dphi[i]);
    }
    (nrm * grid.cell_volume(), energy * grid.cell_volume())
}

#[test]
fn criterion_01_positivity_and_definiteness() {
    let start = Instant::now();
    let grid = default_grid();
    let mut min_norm = f64::INFINITY;
    for seed in 0..100u64 {
        let s = random_field(&grid, mass1(), seed, grid.nyquist()).unwrap();
        let f = s.to_lattice().unwrap();
        let n = norm(&f, 1.0).unwrap();
        assert!(n > 0.0, "seed {seed}: norm {n} not strictly positive");
        min_norm = min_norm.min(n);
    }
    let zero = LatticeField::zero(grid, mass1(), 0.0);
    let zn = norm(&zero, 1.0).unwrap();
    assert_eq!(zn, 0.0, "zero field norm must be exactly zero");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}, budget 5 s");
    println!(
        "[PASS] criterion 1 (positivity): 100 random norms > 0 (min {min_norm:.3e}), zero field -> 0 exactly, {elapsed:?}"
    );
}

#[test]
fn criterion_02_a_independence_of_the_norm() {
    let grid = default_grid();
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let f = unit_field(&grid, 1000 + seed, grid.nyquist())
            .to_lattice()
            .unwrap();
        let base = inner_product_spatial(&f, &f, ProductParams::default()).unwrap();
        for a in [-1.0, -0.5, 0.5, 1.0] {
            let p = ProductParams::new(1.0, a).unwrap();
            let v = inner_product_spatial(&f, &f, p).unwrap();
            let rel = (v - base).norm() / base.re;
            assert!(rel <= 1e-12, "seed {seed}, a {a}: relative deviation {rel}");
            worst = worst.max(rel);
        }
    }
    println!("[PASS] criterion 2 (a-independence): worst |(f,f)_a - (f,f)_0| / (f,f)_0 = {worst:.3e} <= 1e-12");
}

#[test]
fn criterion_03_triple_equivalence() {
    let grid = default_grid();
    let mut worst = 0.0f64;
    for pair in 0..20u64 {
        let s1 = unit_field(&grid, 2000 + 2 * pair, grid.nyquist());
        let s2 = unit_field(&grid, 2001 + 2 * pair, grid.nyquist());
        let f1 = s1.to_lattice().unwrap();
        let f2 = s2.to_lattice().unwrap();
        for a in [0.0, 0.5, -0.5] {
            let p = ProductParams::new(1.0, a).unwrap();
            let spatial = inner_product_spatial(&f1, &f2, p).unwrap();
            let quadform = inner_product_quadform(&f1, &f2, p).unwrap();
            let modes = inner_product_modes(&s1, &s2, p).unwrap();
            let scale = spatial.norm().max(1e-300);
            for (x, y) in [(spatial, quadform), (spatial, modes), (quadform, modes)] {
                let rel = (x - y).norm() / scale;
                assert!(rel <= 1e-10, "pair {pair}, a {a}: relative gap {rel}");
                worst = worst.max(rel);
            }
        }
    }
    println!("[PASS] criterion 3 (triple equivalence): worst pairwise relative gap {worst:.3e} <= 1e-10");
}

#[test]
fn criterion_04_conservation_and_continuity() {
    let grid = default_grid();
    let m = 1.0;
    let s1 = unit_field(&grid, 3001, 8.0);
    let s2 = unit_field(&grid, 3002, 8.0);
    let p = ProductParams::default();
    let v0 = inner_product_spatial(&s1.to_lattice().unwrap(), &s2.to_lattice().unwrap(), p).unwrap();

    // drift of the product under exact evolution over t in [0, 20/m]
    let samples = 20;
    let dt = 20.0 / (m * samples as f64);
    let (mut a1, mut a2) = (s1.clone(), s2.clone());
    let mut drift = 0.0f64;
    for _ in 0..samples {
        a1 = evolve_exact(&a1, dt);
        a2 = evolve_exact(&a2, dt);
        let v = inner_product_spatial(&a1.to_lattice().unwrap(), &a2.to_lattice().unwrap(), p)
            .unwrap();
        drift = drift.max((v - v0).norm() / v0.norm());
    }
    assert!(drift <= 1e-12, "product drift {drift}");

    // local continuity residual, on shell
    let f1 = s1.to_lattice().unwrap();
    let f2 = s2.to_lattice().unwrap();
    let residual = continuity_residual(&f1, &f2, p).unwrap();
    assert!(residual <= 1e-10, "continuity residual {residual}");

    // off-shell counterexample: a trajectory oscillating at a frequency no
    // mode has; the finite-difference residual must fire
    let dtf = 1e-3;
    let lambda = 0.5;
    let fake = |t: f64| {
        let c = (lambda * t + 0.4).cos();
        let sv = -lambda * (lambda * t + 0.4).sin();
        LatticeField::new(
            grid.clone(),
            mass1(),
            0.0,
            f1.phi().iter().map(|&x| c * x).collect(),
            f1.phi().iter().map(|&x| sv * x).collect(),
        )
        .unwrap()
    };
    let (fm, fc, fp) = (fake(-dtf), fake(0.0), fake(dtf));
    let off = continuity_residual_fd((&fm, &fm), (&fc, &fc), (&fp, &fp), dtf, p).unwrap();
    assert!(off >= 1e-2, "off-shell residual {off} lacks power");
    println!(
        "[PASS] criterion 4 (conservation): product drift {drift:.3e} <= 1e-12, continuity residual {residual:.3e} <= 1e-10, off-shell counterexample {off:.3e} >= 1e-2"
    );
}

#[test]
fn criterion_05_projector_algebra() {
    let grid = default_grid();
    let m = mass1();
    let f = unit_field(&grid, 4001, grid.nyquist()).to_lattice().unwrap();
    let plus = project(EnergySign::Positive, &f);
    let minus = project(EnergySign::Negative, &f);
    let scale = plus.values().iter().map(|v| v.norm()).fold(1e-300, f64::max);

    // completeness is exact
    let completeness = plus
        .values()
        .iter()
        .zip(minus.values())
        .zip(f.phi())
        .map(|((p, q), &phi)| (p + q - Complex64::new(phi, 0.0)).norm())
        .fold(0.0, f64::max);
    assert_eq!(completeness, 0.0, "P+ + P- must rebuild phi exactly");

    // conjugate pairing
    let conj = plus
        .values()
        .iter()
        .zip(minus.values())
        .map(|(p, q)| (p.conj() - q).norm())
        .fold(0.0, f64::max)
        / scale;
    assert!(conj <= 1e-12);

    // idempotence: re-project the real field carried by the positive half
    let sp = kg_core::apply_operator_complex(OperatorKind::SqrtD, plus.values(), &grid, m).unwrap();
    let g = LatticeField::new(
        grid.clone(),
        m,
        f.time(),
        plus.values().iter().map(|v| 2.0 * v.re).collect(),
        sp.iter().map(|v| 2.0 * (-Complex64::i() * v).re).collect(),
    )
    .unwrap();
    let idem = project(EnergySign::Positive, &g).max_abs_diff(&plus) / scale;
    assert!(idem <= 1e-12, "idempotence residual {idem}");

    // orthogonality P+ P- = 0 on negative-frequency data
    let sm = kg_core::apply_operator_complex(OperatorKind::SqrtD, minus.values(), &grid, m).unwrap();
    let pi_minus: Vec<Complex64> = sm.iter().map(|v| Complex64::i() * v).collect();
    let ortho = project_data(EnergySign::Positive, minus.values(), &pi_minus, &grid, m)
        .unwrap()
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
        / scale;
    assert!(ortho <= 1e-12, "orthogonality residual {ortho}");

    // grading squares to the identity on shell
    let n1 = grading(&f);
    let sphi = kg_core::apply_operator(OperatorKind::SqrtD, f.phi(), &grid, m).unwrap();
    let pi_n: Vec<Complex64> = sphi.iter().map(|&x| Complex64::new(0.0, -x)).collect();
    let twice = kg_core::apply_operator_complex(OperatorKind::InvSqrtD, &pi_n, &grid, m).unwrap();
    let phi_scale = f.phi().iter().map(|x| x.abs()).fold(1e-300, f64::max);
    let invol = twice
        .iter()
        .zip(f.phi())
        .map(|(v, &phi)| (Complex64::i() * v - phi).norm())
        .fold(0.0, f64::max)
        / phi_scale;
    assert!(invol <= 1e-12, "grading involution residual {invol}");
    let ngrading = n1
        .values()
        .iter()
        .zip(plus.values())
        .zip(minus.values())
        .map(|((n, p), q)| (n - (p - q)).norm())
        .fold(0.0, f64::max)
        / scale;
    assert!(ngrading <= 1e-12);
    println!(
        "[PASS] criterion 5 (projector algebra): completeness exact, conj {conj:.3e}, idempotence {idem:.3e}, orthogonality {ortho:.3e}, grading^2 {invol:.3e}, all <= 1e-12"
    );
}

#[test]
#[allow(clippy::approx_constant)] // frozen oracle values, 2 pi included
fn criterion_06_single_mode_closed_forms() {
    // norm = 4 b w V |a|^2 and E = (w/2) norm for k in {0, 1, 2} on the
    // 1D box L = 2 pi with m = 1, checked against the quadrature oracle
    let grid = SpatialGrid::new(&[64], &[2.0 * PI]).unwrap();
    let amp = Complex64::new(0.5, 0.0);
    let frozen_norms = [
        6.283185307179586f64,  // 2 pi
        8.885765876316732,     // 2 sqrt(2) pi
        14.049629462081453,    // 2 sqrt(5) pi
    ];
    let mut report = String::new();
    for (i, k) in [0.0f64, 1.0, 2.0].into_iter().enumerate() {
        let f = Spectrum::plane_wave(grid.clone(), mass1(), 0.0, &[k], amp)
            .unwrap()
            .to_lattice()
            .unwrap();
        let w = (k * k + 1.0).sqrt();
        let (oracle_n, oracle_e) = oracle_norm_energy(&grid, &[(k, amp)], 1.0);
        let closed_n = 4.0 * w * grid.volume() * amp.norm_sqr();
        assert!((oracle_n - closed_n).abs() <= 1e-12 * closed_n);
        assert!((oracle_n - frozen_norms[i]).abs() <= 1e-12 * frozen_norms[i]);

        let n = norm(&f, 1.0).unwrap();
        let e = total_energy(&f).unwrap();
        let dn = (n - closed_n).abs() / closed_n;
        let de = (e - 0.5 * w * n).abs() / e;
        let deo = (e - oracle_e).abs() / e;
        assert!(dn <= 1e-12, "k {k}: norm off by {dn}");
        assert!(de <= 1e-12, "k {k}: energy relation off by {de}");
        assert!(deo <= 1e-12, "k {k}: energy vs oracle off by {deo}");
        report.push_str(&format!("k={k}: norm {n:.12} (closed {closed_n:.12}) "));
    }
    println!("[PASS] criterion 6 (single-mode closed forms): {report}all within 1e-12");
}

#[test]
fn criterion_07_naive_product_vanishes_while_norm_does_not() {
    let grid = default_grid();
    let mut worst_naive = 0.0f64;
    let mut min_norm = f64::INFINITY;
    for seed in 0..50u64 {
        let f = unit_field(&grid, 5000 + seed, grid.nyquist())
            .to_lattice()
            .unwrap();
        let q = naive_symplectic(&f, &f).unwrap().norm();
        let n = norm(&f, 1.0).unwrap();
        assert!(q <= 1e-13, "seed {seed}: naive self-charge {q}");
        assert!(n > 0.0);
        worst_naive = worst_naive.max(q);
        min_norm = min_norm.min(n);
    }
    println!(
        "[PASS] criterion 7 (naive vanishing): max |int phi i<->dt phi| = {worst_naive:.3e} <= 1e-13 while min norm = {min_norm:.3e} > 0"
    );
}

#[test]
fn criterion_08_mode_count_interpretation() {
    let grid = default_grid();
    let s = random_field(&grid, mass1(), 6001, 32.0).unwrap();

    // additive over disjoint mode content
    let mut even = Spectrum::zero(grid.clone(), mass1(), 0.0);
    let mut odd = Spectrum::zero(grid.clone(), mass1(), 0.0);
    for (i, a) in s.alpha().iter().enumerate() {
        if i % 2 == 0 {
            even.alpha_mut()[i] = *a;
        } else {
            odd.alpha_mut()[i] = *a;
        }
    }
    let total = norm_spectrum(&s, 1.0).unwrap();
    let additivity =
        (norm_spectrum(&even, 1.0).unwrap() + norm_spectrum(&odd, 1.0).unwrap() - total).abs()
            / total;
    assert!(additivity <= 1e-12);

    // homogeneous of degree 2 in the amplitudes
    let homogeneity = (norm_spectrum(&s.scaled(3.0), 1.0).unwrap() - 9.0 * total).abs() / (9.0 * total);
    assert!(homogeneity <= 1e-12);

    // per-bin contributions and the spectrum CSV both sum to the total
    let contributions = norm_contributions(&s, 1.0).unwrap();
    let sum: f64 = kg_core::sum::pairwise_sum(&contributions);
    let spatial = norm(&s.to_lattice().unwrap(), 1.0).unwrap();
    assert!((sum - spatial).abs() <= 1e-10 * spatial);

    let csv = export::spectrum_csv(&s).unwrap();
    let csv_sum: f64 = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    let csv_gap = (csv_sum - spatial).abs() / spatial;
    assert!(csv_gap <= 1e-10);
    println!(
        "[PASS] criterion 8 (mode count): additivity {additivity:.3e}, degree-2 homogeneity {homogeneity:.3e}, CSV sum gap {csv_gap:.3e}, all within bounds"
    );
}

#[test]
fn criterion_09_boost_invariance() {
    use rand::{Rng, SeedableRng};
    let m = mass1();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7001);
    let modes: Vec<Mode> = (0..16)
        .map(|_| {
            Mode::new(
                vec![rng.random::<f64>() * 6.0 - 3.0],
                Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                0.5 + 1.5 * rng.random::<f64>(),
            )
        })
        .collect();
    let ms = ModeSet::new(m, 0.0, modes).unwrap();
    let n0 = kg_core::norm_modeset(&ms, 1.0).unwrap();
    let inv = |set: &ModeSet| -> Vec<f64> {
        set.modes()
            .iter()
            .map(|mode| mode.amplitude.norm_sqr() * mode.weight / mode.omega(m))
            .collect()
    };
    let inv0 = inv(&ms);
    let mut worst_norm = 0.0f64;
    let mut worst_mode = 0.0f64;
    for eta in [0.25, 0.5, 1.0, 1.5, 2.0, -2.0] {
        let boosted = ms.boost(eta, 0).unwrap();
        let n = kg_core::norm_modeset(&boosted, 1.0).unwrap();
        worst_norm = worst_norm.max((n - n0).abs() / n0.abs());
        for (a, b) in inv(&boosted).iter().zip(&inv0) {
            worst_mode = worst_mode.max((a - b).abs() / b.abs());
        }
    }
    assert!(worst_norm <= 1e-12, "norm invariance {worst_norm}");
    assert!(worst_mode <= 1e-12, "per-mode invariance {worst_mode}");
    println!(
        "[PASS] criterion 9 (boost invariance): norm deviation {worst_norm:.3e}, per-mode measure deviation {worst_mode:.3e}, rapidity up to 2, both <= 1e-12"
    );
}

#[test]
fn criterion_10_mixing_matrix_eigenvalues() {
    for a in [-1.5, -1.0, -0.3, 0.0, 0.7, 1.0, 2.0] {
        let e = matrix_m_eigenvalues(a);
        assert_eq!(e.plus, 1.0 + a);
        assert_eq!(e.minus, 1.0 - a);
        assert_eq!(e.positive_semidefinite, a.abs() <= 1.0);
    }
    // the flag flips exactly at |a| = 1
    assert!(matrix_m_eigenvalues(1.0).positive_semidefinite);
    assert!(!matrix_m_eigenvalues(1.0 + f64::EPSILON).positive_semidefinite);
    assert!(matrix_m_eigenvalues(-1.0).positive_semidefinite);
    assert!(!matrix_m_eigenvalues(-1.0 - f64::EPSILON).positive_semidefinite);
    println!("[PASS] criterion 10 (M eigenvalues): 1 +- a exact, semi-definite flag flips at |a| = 1");
}

#[test]
fn criterion_11_leapfrog_order_and_suite_runtime() {
    let grid = default_grid();
    let f = unit_field(&grid, 8001, 8.0).to_lattice().unwrap();
    let dt0 = 0.004;
    let table = verify::convergence_study(&[dt0, dt0 / 2.0, dt0 / 4.0, dt0 / 8.0], 1.0, &f).unwrap();
    let mut ratios = Vec::new();
    for pair in table.rows.windows(2) {
        let r = pair[0].max_error / pair[1].max_error;
        assert!((3.5..=4.5).contains(&r), "halving ratio {r} outside [3.5, 4.5]");
        ratios.push(r);
    }

    let start = Instant::now();
    let report = verify::run_suite(&verify::SuiteConfig::default()).unwrap();
    let elapsed = start.elapsed();
    assert!(report.aggregate_pass, "default verify run must pass:\n{}", report.to_table());
    assert!(elapsed.as_secs_f64() < 60.0, "suite took {elapsed:?}");
    println!(
        "[PASS] criterion 11 (leapfrog order & runtime): halving ratios {ratios:.3?} in [3.5, 4.5], full default suite {} checks in {elapsed:?} < 60 s",
        report.checks.len()
    );
}

#[test]
fn higher_dimension_smoke() {
    // the identities hold verbatim on 2D and 3D desk-scale grids
    for dim in [2usize, 3] {
        let cfg = verify::SuiteConfig {
            grid: verify::GridSpec {
                dim,
                points: None,
                lengths: None,
            },
            suites: Some(
                [
                    "projector-algebra",
                    "positivity",
                    "a-independence",
                    "triple-equivalence",
                    "parseval",
                    "boost-invariance",
                    "continuity",
                    "energy-relation",
                ]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            ),
            ..verify::SuiteConfig::default()
        };
        let report = verify::run_suite(&cfg).unwrap();
        assert!(report.aggregate_pass, "dim {dim}:\n{}", report.to_table());
    }
    println!("[PASS] smoke: 2D and 3D default grids pass the dimension-independent suites");
}
