//! Acceptance suite: one test per criterion, each printing a pass line
//! with the measured quantity and its runtime. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::Instant;

use num_complex::Complex64;

use eikonal_lab::besov::{besov_seminorm, IndexRect};
use eikonal_lab::energy::{eikonal_residual, minimize_aviles_giga, BoundaryMode};
use eikonal_lab::entropy::DiscEntropy;
use eikonal_lab::fields::{jump_cost, jump_field, vortex};
use eikonal_lab::grid::{ComplexField, GridSpec, ScalarField, VectorField};
use eikonal_lab::inclusion::{beltrami_residual, complex_from_pair, field_to_potential, singular_set_scan};
use eikonal_lab::jin_kohn::{coercivity_scan, p_of_theta};
use eikonal_lab::mollify::p_eps;
use eikonal_lab::production::{bump_lattice, weak_entropy_production, weak_flux_pairings, BumpTest};
use eikonal_lab::vec2::Vec2;
use eikonal_lab::verify::{
    commutator_envelope, conjugate_sum_at_zero, harmonic_catalog, hilbert_unboundedness_sweep,
    smooth_field_catalog, verify_harmonic_entropy_identity, verify_multiplier_on_modes,
};

fn report(id: &str, ok: bool, detail: &str, t: Instant, limit_s: f64) {
    let elapsed = t.elapsed().as_secs_f64();
    println!(
        "acceptance {id}: {} ({detail}) [{elapsed:.2}s]",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "{id}: {detail}");
    assert!(
        elapsed < limit_s,
        "{id}: runtime {elapsed:.2}s exceeds {limit_s}s"
    );
}

#[test]
fn criterion_01_entropy_condition() {
    let t = Instant::now();
    let r1 = DiscEntropy::JinKohn1.entropy_condition_residual(2048);
    let r2 = DiscEntropy::JinKohn2.entropy_condition_residual(2048);
    report(
        "01 entropy-condition",
        r1 <= 1e-10 && r2 <= 1e-10,
        &format!("max residuals {r1:.2e}, {r2:.2e} over 2048 angles"),
        t,
        1.0,
    );
}

#[test]
fn criterion_02_multiplier_on_modes() {
    let t = Instant::now();
    let checks = verify_multiplier_on_modes(16);
    let worst = checks.iter().fold(0.0f64, |a, c| a.max(c.discrepancy));
    let coeff = |k: i64| checks.iter().find(|c| c.k == k).unwrap().coefficient;
    let ok = worst <= 1e-8 && coeff(1) == 0.0 && coeff(2) == 0.0 && coeff(3) == 4.0;
    report(
        "02 multiplier-on-modes",
        ok,
        &format!("max discrepancy {worst:.2e} for |k| <= 16; c1 = {}, c2 = {}, c3 = {}", coeff(1), coeff(2), coeff(3)),
        t,
        5.0,
    );
}

#[test]
fn criterion_03_divergence_identity_orders() {
    let t = Instant::now();
    let mut worst_order = f64::INFINITY;
    let mut detail = String::new();
    for id in ["harmonic_a", "harmonic_b", "harmonic_c"] {
        let phi = harmonic_catalog(id);
        let mut prev: Option<f64> = None;
        for n in [65usize, 129, 257] {
            let spec = GridSpec::unit(n).unwrap();
            let w = smooth_field_catalog(spec, id);
            let r = verify_harmonic_entropy_identity(&phi, &w).unwrap();
            if let Some(p) = prev {
                worst_order = worst_order.min((p / r).log2());
            }
            prev = Some(r);
        }
        detail.push_str(&format!("{id} "));
    }
    report(
        "03 divergence-identity-orders",
        worst_order >= 1.8,
        &format!("min observed order {worst_order:.2} across 64/128/256 grids, pairs: {detail}"),
        t,
        60.0,
    );
}

#[test]
fn criterion_04_vortex_rigidity() {
    let t = Instant::now();
    let spec = GridSpec::unit(256).unwrap();
    let v = vortex(Vec2::new(0.5, 0.5), 1, spec);
    let zeta = v.singular_points[0];
    let bumps: Vec<BumpTest> = bump_lattice(&spec, 5, &[0.08, 0.12, 0.16])
        .into_iter()
        .filter(|b| b.avoids(zeta, 0.05))
        .collect();
    assert!(bumps.len() >= 50, "need a meaningful off-center family");

    let mut max_production: f64 = 0.0;
    for phi in [DiscEntropy::JinKohn1, DiscEntropy::JinKohn2] {
        max_production = max_production.max(weak_entropy_production(&v.field, &phi, &bumps).unwrap().max_abs());
    }
    // divergence in the same weak (flux) sense, against the same family
    let max_divergence = weak_flux_pairings(&v.field, &bumps).unwrap().max_abs();

    let scan = singular_set_scan(&v.field).unwrap();
    let located = scan.len() == 1
        && scan[0].winding == 1
        && (scan[0].position - zeta).norm() <= spec.h * std::f64::consts::SQRT_2;

    report(
        "04 vortex-rigidity",
        max_production <= 1e-3 && max_divergence <= 1e-3 && located,
        &format!(
            "{} bumps: max production {max_production:.2e}, max weak divergence {max_divergence:.2e}, singular points {} (winding {})",
            bumps.len(),
            scan.len(),
            scan.first().map(|s| s.winding).unwrap_or(0)
        ),
        t,
        30.0,
    );
}

#[test]
fn criterion_05_coercivity_scan() {
    let t = Instant::now();
    let coarse = coercivity_scan(2048).unwrap();
    let fine = coercivity_scan(4096).unwrap();
    let rel = (fine.c0 - coarse.c0).abs() / fine.c0;
    report(
        "05 coercivity-scan",
        fine.c0 > 0.0 && rel <= 5e-3,
        &format!("c0 = {:.6} at n=4096 vs {:.6} at n=2048 (rel diff {rel:.1e})", fine.c0, coarse.c0),
        t,
        10.0,
    );
}

#[test]
fn criterion_06_cubic_jump_cost() {
    let t = Instant::now();
    let e1 = Vec2::new(1.0, 0.0);
    let mut worst: f64 = 0.0;
    for i in 1..=64 {
        let beta = std::f64::consts::FRAC_PI_2 * i as f64 / 64.0;
        let c = jump_cost(1, beta, e1).unwrap();
        let gap = 2.0 * beta.sin();
        worst = worst.max((c - gap * gap * gap / 6.0).abs());
    }
    report(
        "06 cubic-jump-cost",
        worst <= 1e-12,
        &format!("max defect {worst:.2e} over 64 half-angles"),
        t,
        1.0,
    );
}

#[test]
fn criterion_07_beltrami_correspondence() {
    let t = Instant::now();

    // constant angle: hand Wirtinger values at an interior node
    let spec = GridSpec::unit(65).unwrap();
    let p0 = p_of_theta(0.0).entries;
    let f1 = ScalarField::from_fn(spec, |p| p0.a * p.x + p0.b * p.y);
    let f2 = ScalarField::from_fn(spec, |p| p0.c * p.x + p0.d * p.y);
    let v: ComplexField = complex_from_pair(&f1, &f2);
    let inv2h = 0.5 / spec.h;
    let (i, j) = (32, 32);
    let d1 = (v.at(i + 1, j) - v.at(i - 1, j)) * inv2h;
    let d2 = (v.at(i, j + 1) - v.at(i, j - 1)) * inv2h;
    let im = Complex64::new(0.0, 1.0);
    let vz = 0.5 * (d1 - im * d2);
    let vzbar = 0.5 * (d1 + im * d2);
    let hand_ok = (vz - Complex64::new(-0.5, 0.0)).norm() <= 1e-10
        && (vzbar - Complex64::new(-1.0 / 6.0, 0.0)).norm() <= 1e-10;
    let (r1, r2) = beltrami_residual(&v).unwrap();
    let const_ok = r1.max_abs() <= 1e-10 && r2.max_abs() <= 1e-10;

    // vortex-generated potential: residual refinement orders
    let residuals = |n: usize| {
        let spec = GridSpec::unit(n).unwrap();
        let m = vortex(Vec2::new(-0.4, -0.4), 1, spec).field;
        let pot = field_to_potential(&m, 1e-1).unwrap();
        let v = complex_from_pair(&pot.f1, &pot.f2);
        let (r1, r2) = beltrami_residual(&v).unwrap();
        (r1.max_abs(), r2.max_abs())
    };
    let (a1, a2) = residuals(65);
    let (b1, b2) = residuals(129);
    let (c1, c2) = residuals(257);
    let order1 = (a1 / b1).log2().min((b1 / c1).log2());
    let order2 = (a2 / b2).log2().min((b2 / c2).log2());

    report(
        "07 beltrami-correspondence",
        hand_ok && const_ok && order1 >= 1.8 && order2 >= 1.8,
        &format!(
            "hand values ok = {hand_ok}; vortex residual orders {order1:.2}, {order2:.2} (finest {c1:.1e}, {c2:.1e})"
        ),
        t,
        30.0,
    );
}

#[test]
fn criterion_08_commutator_envelope() {
    let t = Instant::now();
    let env = commutator_envelope(20240801, 200).unwrap();
    report(
        "08 commutator-envelope",
        env.violations == 0,
        &format!("{} draws, max ratio {:.3} against envelope 10, {} violations", env.draws, env.max_ratio, env.violations),
        t,
        30.0,
    );
}

#[test]
fn criterion_09_increment_besov_chain() {
    let t = Instant::now();
    let spec = GridSpec::unit(129).unwrap();
    let margin = 24usize;
    let cases: [(&str, VectorField); 2] = [
        ("jump", jump_field(0.7, Vec2::new(1.0, 0.0), spec).unwrap().field),
        ("vortex", vortex(Vec2::new(0.5, 0.5), 1, spec).field),
    ];
    let mut ok = true;
    let mut detail = String::new();
    for (name, m) in &cases {
        let window = IndexRect::with_margin(spec.nx, spec.ny, margin);
        let seminorm = besov_seminorm(m, &window, 16).unwrap();
        for cells in [4usize, 8, 16] {
            let eps = cells as f64 * spec.h;
            let p = p_eps(m, eps).unwrap();
            let r = (eps / spec.h).floor() as usize;
            let h2 = p.spec.h * p.spec.h;
            let mut acc = 0.0;
            for j in margin - r..spec.ny - margin - r {
                for i in margin - r..spec.nx - margin - r {
                    acc += p.at(i, j).powf(4.0 / 3.0);
                }
            }
            let lp = (acc * h2).powf(0.75);
            let bound = seminorm.powi(3) * 1.1;
            if lp > bound {
                ok = false;
            }
            detail.push_str(&format!("{name}@{cells}h {:.2} ", lp / seminorm.powi(3)));
        }
    }
    report(
        "09 increment-besov-chain",
        ok,
        &format!("ratios to seminorm^3: {detail}(bound 1.1)"),
        t,
        60.0,
    );
}

#[test]
fn criterion_10_hilbert_unboundedness() {
    let t = Instant::now();
    let orders = [64usize, 128, 256, 512, 1024, 2048, 4096];
    let sweep = hilbert_unboundedness_sweep(&orders);
    let psi_drift = (sweep.last().unwrap().sup_psi - sweep[0].sup_psi).abs() / sweep[0].sup_psi;
    let strictly_grows = sweep.windows(2).all(|w| w[1].sup_conjugate > w[0].sup_conjugate);
    let zero_defect = (sweep.last().unwrap().sup_conjugate + conjugate_sum_at_zero(4096)).abs();
    report(
        "10 hilbert-unboundedness",
        psi_drift < 0.02 && strictly_grows && zero_defect <= 1e-10,
        &format!(
            "sup psi drift {:.2}% (64 -> 4096), conjugate sup grows at every doubling = {strictly_grows}, value-at-zero defect {zero_defect:.1e}",
            100.0 * psi_drift
        ),
        t,
        10.0,
    );
}

#[test]
fn criterion_11_descent_sanity() {
    let t = Instant::now();
    // frozen regression scenario: 33x33 unit grid, eps = 0.05, 2000 steps,
    // initial step 1.0, free boundary
    let spec = GridSpec::unit(33).unwrap();
    let u0 = ScalarField::from_fn(spec, |p| 0.9 * p.x);
    let (u, trace) = minimize_aviles_giga(&u0, 0.05, 2000, 1.0, BoundaryMode::Free).unwrap();
    let before = eikonal_residual(&u0).unwrap();
    let after = eikonal_residual(&u).unwrap();
    report(
        "11 descent-sanity",
        trace.is_monotone() && after <= 0.5 * before,
        &format!(
            "monotone = {}, slope residual {before:.4} -> {after:.4} ({:.0}% cut)",
            trace.is_monotone(),
            100.0 * (1.0 - after / before)
        ),
        t,
        60.0,
    );
}
