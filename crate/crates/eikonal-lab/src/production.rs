//! Weak entropy productions: flux pairings of a composed entropy field
//! against compactly supported test bumps, and the pointwise production
//! bound ratio on mollified fields.
//!
//! Pairings always use the flux form -sum Phi(m) . grad zeta h^2; the
//! composed field is never differentiated across jumps.

use std::io::Write;

use crate::entropy::DiscEntropy;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, VectorField};
use crate::mollify::{mollify, p_eps, MollifierKernel};
use crate::vec2::Vec2;

/// Radial C-infinity test bump supported on the open ball of radius r.
#[derive(Clone, Copy, Debug)]
pub struct BumpTest {
    pub center: Vec2,
    pub radius: f64,
}

impl BumpTest {
    pub fn value(&self, x: Vec2) -> f64 {
        let s = (x - self.center).norm() / self.radius;
        if s >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - s * s)).exp()
        }
    }

    pub fn gradient(&self, x: Vec2) -> Vec2 {
        let d = x - self.center;
        let dist = d.norm();
        let s = dist / self.radius;
        if s >= 1.0 || dist < 1e-300 {
            return Vec2::ZERO;
        }
        let q = 1.0 - s * s;
        let dvalue = (-1.0 / q).exp() * (-2.0 * s / (q * q));
        d * (dvalue / (self.radius * dist))
    }

    /// Whether the support stays clear of the margin ring of the grid.
    pub fn inside(&self, spec: &GridSpec) -> bool {
        let m = spec.boundary_margin as f64 * spec.h;
        let lo = spec.origin + Vec2::new(m, m);
        let hi = spec.node(spec.nx - 1, spec.ny - 1) - Vec2::new(m, m);
        self.center.x - self.radius >= lo.x
            && self.center.y - self.radius >= lo.y
            && self.center.x + self.radius <= hi.x
            && self.center.y + self.radius <= hi.y
    }

    pub fn avoids(&self, point: Vec2, clearance: f64) -> bool {
        (self.center - point).norm() >= self.radius + clearance
    }
}

/// Lattice of bump centers across the interior, at each of the given radii;
/// bumps whose support would touch the boundary margin are dropped.
pub fn bump_lattice(spec: &GridSpec, centers_per_side: usize, radii: &[f64]) -> Vec<BumpTest> {
    let lo = spec.origin;
    let hi = spec.node(spec.nx - 1, spec.ny - 1);
    let mut out = Vec::new();
    for &radius in radii {
        for cj in 0..centers_per_side {
            for ci in 0..centers_per_side {
                let fx = (ci as f64 + 1.0) / (centers_per_side as f64 + 1.0);
                let fy = (cj as f64 + 1.0) / (centers_per_side as f64 + 1.0);
                let center = Vec2::new(lo.x + fx * (hi.x - lo.x), lo.y + fy * (hi.y - lo.y));
                let bump = BumpTest { center, radius };
                if bump.inside(spec) {
                    out.push(bump);
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct ProductionRow {
    pub test_id: usize,
    pub center: Vec2,
    pub radius: f64,
    pub pairing: f64,
}

/// Per-test weak pairings plus aggregate norms.
#[derive(Clone, Debug, Default)]
pub struct ProductionReport {
    pub rows: Vec<ProductionRow>,
}

impl ProductionReport {
    pub fn max_abs(&self) -> f64 {
        self.rows.iter().fold(0.0f64, |a, r| a.max(r.pairing.abs()))
    }

    pub fn l2(&self) -> f64 {
        self.rows.iter().map(|r| r.pairing * r.pairing).sum::<f64>().sqrt()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "test_id,center_x,center_y,radius,pairing")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{:.12e},{:.12e},{:.12e},{:.12e}",
                r.test_id, r.center.x, r.center.y, r.radius, r.pairing
            )?;
        }
        Ok(())
    }
}

/// Flux pairings -sum g . grad zeta h^2 of an arbitrary sampled field
/// against each bump. Linear in the test function by construction.
pub fn weak_flux_pairings(g: &VectorField, tests: &[BumpTest]) -> Result<ProductionReport> {
    for t in tests {
        if !t.inside(&g.spec) {
            return Err(Error::TestTouchesBoundary);
        }
    }
    let spec = g.spec;
    let h2 = spec.h * spec.h;
    let rows: Vec<ProductionRow> = tests
        .iter()
        .enumerate()
        .map(|(test_id, t)| {
            // only the support box contributes
            let li = ((t.center.x - t.radius - spec.origin.x) / spec.h).floor().max(0.0) as usize;
            let lj = ((t.center.y - t.radius - spec.origin.y) / spec.h).floor().max(0.0) as usize;
            let hi = (((t.center.x + t.radius - spec.origin.x) / spec.h).ceil() as usize).min(spec.nx - 1);
            let hj = (((t.center.y + t.radius - spec.origin.y) / spec.h).ceil() as usize).min(spec.ny - 1);
            let mut acc = 0.0;
            for j in lj..=hj {
                for i in li..=hi {
                    let x = spec.node(i, j);
                    acc -= g.at(i, j).dot(t.gradient(x));
                }
            }
            ProductionRow {
                test_id,
                center: t.center,
                radius: t.radius,
                pairing: acc * h2,
            }
        })
        .collect();
    Ok(ProductionReport { rows })
}

/// Weak production of an entropy along a field: pairings of Phi(m) in flux
/// form against the test family.
pub fn weak_entropy_production(m: &VectorField, phi: &DiscEntropy, tests: &[BumpTest]) -> Result<ProductionReport> {
    let mut composed = VectorField::fill(m.spec, Vec2::ZERO);
    for j in 0..m.spec.ny {
        for i in 0..m.spec.nx {
            composed.set(i, j, phi.eval(m.at(i, j))?);
        }
    }
    weak_flux_pairings(&composed, tests)
}

#[derive(Clone, Debug)]
pub struct ProductionRatio {
    pub epsilon: f64,
    pub max_ratio: f64,
}

/// Pointwise production bound diagnostic: for each kernel radius, the max
/// over interior nodes of
///   |div Phi(m_eps)| / (C2 * (P + |div m_eps|) + 1e-12),
/// C2 the sampled circle norm of the entropy. Bounded uniformly in
/// epsilon for fields with vanishing cubic-entropy productions.
///
/// The increment average P is taken at radius eps + h: the centered
/// divergence of the mollified field reads one cell beyond the kernel
/// ball, and a denominator blind to that fringe would divide a genuine
/// signal by the bare floor.
pub fn production_bound_ratio(m: &VectorField, phi: &DiscEntropy, epsilons: &[f64]) -> Result<Vec<ProductionRatio>> {
    m.ensure_unit(1e-9)?;
    let c2 = phi.c2_norm_on_circle(2048);
    let floor = 1e-12;
    let mut out = Vec::new();
    for &epsilon in epsilons {
        let kernel = MollifierKernel::standard(epsilon, m.spec.h)?;
        let m_eps = mollify(&m.clone(), &kernel)?;
        let mut composed = VectorField::fill(m_eps.spec, Vec2::ZERO);
        for j in 0..m_eps.spec.ny {
            for i in 0..m_eps.spec.nx {
                composed.set(i, j, phi.eval(m_eps.at(i, j))?);
            }
        }
        let num = composed.divergence()?;
        let div_m_eps = m_eps.divergence()?;
        // radius eps + h shrinks by exactly one more cell, so the grids align
        let p = p_eps(m, epsilon + m.spec.h)?;
        debug_assert_eq!(p.spec.nx, num.spec.nx);
        let mut max_ratio: f64 = 0.0;
        for (idx, dphi) in num.values().iter().enumerate() {
            let denom = c2 * (p.values()[idx] + div_m_eps.values()[idx].abs()) + floor;
            max_ratio = max_ratio.max(dphi.abs() / denom);
        }
        out.push(ProductionRatio { epsilon, max_ratio });
    }
    Ok(out)
}

/// Max ratio across the kernel family.
pub fn production_bound_ratio_max(m: &VectorField, phi: &DiscEntropy, epsilons: &[f64]) -> Result<f64> {
    Ok(production_bound_ratio(m, phi, epsilons)?
        .iter()
        .fold(0.0f64, |a, r| a.max(r.max_ratio)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn bump_support_and_gradient() {
        let b = BumpTest {
            center: Vec2::new(0.5, 0.5),
            radius: 0.2,
        };
        assert_eq!(b.value(Vec2::new(0.71, 0.5)), 0.0);
        assert!(b.value(Vec2::new(0.5, 0.5)) > 0.0);
        // analytic gradient against finite differences
        let x = Vec2::new(0.55, 0.42);
        let h = 1e-6;
        let g = b.gradient(x);
        let fx = (b.value(x + Vec2::new(h, 0.0)) - b.value(x - Vec2::new(h, 0.0))) / (2.0 * h);
        let fy = (b.value(x + Vec2::new(0.0, h)) - b.value(x - Vec2::new(0.0, h))) / (2.0 * h);
        assert!((g - Vec2::new(fx, fy)).norm() < 1e-8);
    }

    #[test]
    fn constant_field_produces_nothing() {
        let spec = GridSpec::unit(65).unwrap();
        let m = VectorField::from_fn(spec, |_| Vec2::new(0.6, 0.8));
        let tests = bump_lattice(&spec, 3, &[0.12]);
        assert!(!tests.is_empty());
        for phi in [DiscEntropy::JinKohn1, DiscEntropy::JinKohn2] {
            let report = weak_entropy_production(&m, &phi, &tests).unwrap();
            // flux pairing of a constant composed field against grad zeta:
            // superalgebraically small quadrature leftovers only
            assert!(report.max_abs() < 1e-12, "got {}", report.max_abs());
        }
    }

    #[test]
    fn pairing_linear_in_test_function() {
        let spec = GridSpec::unit(49).unwrap();
        let m = VectorField::from_fn(spec, |p| Vec2::new(p.x * p.y, p.y));
        let a = BumpTest { center: Vec2::new(0.4, 0.5), radius: 0.15 };
        let b = BumpTest { center: Vec2::new(0.6, 0.5), radius: 0.1 };
        let pairings = weak_flux_pairings(&m, &[a, b]).unwrap();
        // pair against the sum by summing fields of two disjoint bumps:
        // linearity means pairing(a) + pairing(b) is the pairing of a + b
        let spec2 = m.spec;
        let h2 = spec2.h * spec2.h;
        let mut acc = 0.0;
        for j in 0..spec2.ny {
            for i in 0..spec2.nx {
                let x = spec2.node(i, j);
                acc -= m.at(i, j).dot(a.gradient(x) + b.gradient(x));
            }
        }
        let combined = acc * h2;
        assert!((pairings.rows[0].pairing + pairings.rows[1].pairing - combined).abs() < 1e-14);
    }

    #[test]
    fn boundary_touching_test_rejected() {
        let spec = GridSpec::unit(33).unwrap();
        let m = VectorField::from_fn(spec, |_| Vec2::ZERO);
        let bad = BumpTest { center: Vec2::new(0.05, 0.5), radius: 0.2 };
        assert!(matches!(
            weak_flux_pairings(&m, &[bad]),
            Err(Error::TestTouchesBoundary)
        ));
    }

    #[test]
    fn ratio_of_constant_field_is_zero() {
        let spec = GridSpec::unit(65).unwrap();
        let m = VectorField::from_fn(spec, |_| Vec2::new(1.0, 0.0));
        let ratios = production_bound_ratio(&m, &DiscEntropy::JinKohn1, &[4.0 * spec.h, 8.0 * spec.h]).unwrap();
        for r in ratios {
            assert_eq!(r.max_ratio, 0.0);
        }
    }

    #[test]
    fn flux_pairing_consistent_with_differentiated_form() {
        // for smooth fields the flux pairing agrees with the pairing of the
        // differentiated composition at second order; Richardson over a
        // grid triple confirms the rate
        let defect = |n: usize| {
            let spec = GridSpec::unit(n).unwrap();
            let m = VectorField::from_fn(spec, |p| {
                Vec2::new(0.8 * (2.0 * p.y).sin(), 0.7 * (3.0 * p.x).cos())
            });
            let bump = BumpTest {
                center: Vec2::new(0.5, 0.5),
                radius: 0.3,
            };
            let phi = DiscEntropy::JinKohn1;
            let flux = weak_entropy_production(&m, &phi, &[bump]).unwrap().rows[0].pairing;
            let composed = m.map_values(|v| phi.eval(v).unwrap());
            let div = composed.divergence().unwrap();
            let h2 = spec.h * spec.h;
            let mut classical = 0.0;
            for j in 0..div.spec.ny {
                for i in 0..div.spec.nx {
                    classical += div.at(i, j) * bump.value(div.spec.node(i, j));
                }
            }
            (flux - classical * h2).abs()
        };
        let (a, b, c) = (defect(33), defect(65), defect(129));
        assert!((a / b).log2() > 1.8, "{a} {b}");
        assert!((b / c).log2() > 1.8, "{b} {c}");
    }

    #[test]
    fn jump_field_is_weakly_divergence_free() {
        // the normal trace is continuous, so flux pairings of m itself
        // vanish at second order even for bumps straddling the line
        let run = |n: usize| {
            let spec = GridSpec::unit(n).unwrap();
            let g = crate::fields::jump_field(0.9, Vec2::new(1.0, 0.0), spec).unwrap();
            let mid = spec.center().x + 0.5 * spec.h;
            let bumps = [
                BumpTest { center: Vec2::new(mid, 0.5), radius: 0.2 },
                BumpTest { center: Vec2::new(0.25, 0.4), radius: 0.15 },
            ];
            weak_flux_pairings(&g.field, &bumps).unwrap().max_abs()
        };
        let (a, b) = (run(65), run(129));
        assert!(a < 5e-4, "straddling pairing {a}");
        assert!(b < 0.5 * a, "should shrink under refinement: {a} vs {b}");
    }

    #[test]
    fn harmonic_entropy_production_vanishes_on_vortex() {
        // unit divergence-free fields with vanishing cubic productions keep
        // all harmonic entropy productions small as well
        use crate::harmonic::HarmonicFunction;
        let spec = GridSpec::unit(129).unwrap();
        let v = crate::fields::vortex(Vec2::new(0.5, 0.5), 1, spec);
        let zeta = v.singular_points[0];
        let bumps: Vec<BumpTest> = bump_lattice(&spec, 4, &[0.1, 0.14])
            .into_iter()
            .filter(|b| b.avoids(zeta, 0.05))
            .collect();
        let psi = crate::angular::AngularFunction::real_harmonic(3, 0.6, 0.0)
            .add(&crate::angular::AngularFunction::real_harmonic(4, 0.0, 0.3));
        let phi = DiscEntropy::harmonic(HarmonicFunction::new(psi)).unwrap();
        let rep = weak_entropy_production(&v.field, &phi, &bumps).unwrap();
        assert!(rep.max_abs() <= 1e-3, "harmonic production {}", rep.max_abs());
    }

    #[test]
    fn jump_pairing_matches_flux_formula() {
        // bump straddling the interface: the pairing converges to the flux
        // jump (4/3) sin^3(beta) times the line integral of the bump
        let beta = 0.6f64;
        let run = |n: usize| {
            let spec = GridSpec::unit(n).unwrap();
            let g = crate::fields::jump_field(beta, Vec2::new(1.0, 0.0), spec).unwrap();
            let mid = spec.center().x + 0.5 * spec.h;
            let bump = BumpTest {
                center: Vec2::new(mid, 0.5),
                radius: 0.2,
            };
            let rep = weak_entropy_production(&g.field, &DiscEntropy::JinKohn1, &[bump]).unwrap();
            // line integral of the bump along the interface, fine quadrature
            let samples = 20001;
            let mut line = 0.0;
            for s in 0..samples {
                let y = 0.3 + 0.4 * s as f64 / (samples - 1) as f64;
                let w = if s == 0 || s == samples - 1 { 0.5 } else { 1.0 };
                line += w * bump.value(Vec2::new(mid, y));
            }
            line *= 0.4 / (samples - 1) as f64;
            let expect = 4.0 / 3.0 * beta.sin().powi(3) * line;
            (rep.rows[0].pairing - expect).abs()
        };
        let (a, b) = (run(65), run(129));
        assert!(a < 1e-3, "defect {a}");
        assert!(b < a, "defect should shrink under refinement: {a} vs {b}");
    }

    #[test]
    fn vortex_ratio_within_frozen_envelope() {
        let spec = GridSpec::unit(129).unwrap();
        let m = crate::fields::vortex(Vec2::new(0.5, 0.5), 1, spec).field;
        let pair = crate::entropy::jin_kohn_circle_pair(1).unwrap();
        let (cut, _) = crate::entropy::cutoff_extension(
            pair.c1,
            pair.c2,
            crate::entropy::CutoffProfile::standard(),
        )
        .unwrap();
        let eps: Vec<f64> = [4.0, 8.0, 16.0].iter().map(|c| c * spec.h).collect();
        for r in production_bound_ratio(&m, &cut, &eps).unwrap() {
            assert!(r.max_ratio <= 50.0, "eps {}: ratio {}", r.epsilon, r.max_ratio);
        }
    }

    #[test]
    fn smooth_jump_ratio_stays_finite() {
        // unit field turning smoothly across a strip; the ratio must not
        // grow as the kernel refines
        let spec = GridSpec::unit(129).unwrap();
        let mid = spec.center().x;
        let m = VectorField::from_fn(spec, |p| {
            let theta = 0.7 * ((p.x - mid) / 0.08).tanh();
            Vec2::unit_at_angle(theta)
        });
        let pair = crate::entropy::jin_kohn_circle_pair(1).unwrap();
        let (cut, _) = crate::entropy::cutoff_extension(
            pair.c1,
            pair.c2,
            crate::entropy::CutoffProfile::standard(),
        )
        .unwrap();
        let eps: Vec<f64> = [16.0, 8.0, 4.0].iter().map(|c| c * spec.h).collect();
        let ratios = production_bound_ratio(&m, &cut, &eps).unwrap();
        for w in ratios.windows(2) {
            assert!(w[1].max_ratio <= 1.5 * w[0].max_ratio + 1.0, "{ratios:?}");
        }
        assert!(ratios.iter().all(|r| r.max_ratio.is_finite()));
    }

    #[test]
    fn ratio_requires_unit_field() {
        let spec = GridSpec::unit(65).unwrap();
        let m = VectorField::from_fn(spec, |_| Vec2::new(0.5, 0.0));
        assert!(matches!(
            production_bound_ratio(&m, &DiscEntropy::JinKohn1, &[4.0 * spec.h]),
            Err(Error::NotUnitNorm(_))
        ));
    }
}
