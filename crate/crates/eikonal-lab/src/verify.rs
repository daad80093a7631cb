//! One routine per algebraic identity, each returning a residual that has
//! to vanish at second order under grid refinement, plus the suite runner
//! that drives them across a grid list and emits CSV rows.

use std::io::Write;

use crate::angular::{multiplier_coefficient, AngularFunction};
use crate::entropy::{cutoff_extension, jin_kohn_circle_pair, CutoffProfile, DiscEntropy};
use crate::error::{Error, Result};
use crate::fields::{jump_field, vortex};
use crate::grid::{GridSpec, ScalarField, VectorField};
use crate::harmonic::{a_value, db1_value, HarmonicFunction};
use crate::jin_kohn::jin_kohn_sigma;
use crate::mollify::{commutator, increment_square_average, MollifierKernel};
use crate::rng::Lcg;
use crate::vec2::Vec2;

fn compose(w: &VectorField, f: impl Fn(Vec2) -> Vec2) -> VectorField {
    w.map_values(f)
}

/// Centered partial derivatives of both components along one axis,
/// defined on the grid shrunk by one cell.
fn partial(w: &VectorField, axis: usize) -> Result<VectorField> {
    let spec = w.spec.shrink(1)?;
    let inv2h = 0.5 / w.spec.h;
    let mut out = VectorField::fill(spec, Vec2::ZERO);
    for j in 0..spec.ny {
        for i in 0..spec.nx {
            let (si, sj) = (i + 1, j + 1);
            let d = match axis {
                0 => (w.at(si + 1, sj) - w.at(si - 1, sj)) * inv2h,
                _ => (w.at(si, sj + 1) - w.at(si, sj - 1)) * inv2h,
            };
            out.set(i, j, d);
        }
    }
    Ok(out)
}

/// Residuals of the two divergence expansions of the cubic entropies:
/// div sigma1(w) = -2 w1 w2 div w + (d1 w2 + d2 w1)(1 - |w|^2) and
/// div sigma2(w) = (w1^2 - w2^2) div w + (d2 w2 - d1 w1)(1 - |w|^2),
/// max over interior nodes, one entry per entropy.
pub fn verify_jin_kohn_divergence(w: &VectorField) -> Result<[f64; 2]> {
    let div_w = w.divergence()?;
    let d1 = partial(w, 0)?;
    let d2 = partial(w, 1)?;
    let w_in = w.restrict(1)?;
    let mut residuals = [0.0f64; 2];
    for (j, slot) in residuals.iter_mut().enumerate() {
        let lhs = compose(w, |v| jin_kohn_sigma(j + 1, v).expect("fixed index")).divergence()?;
        let mut worst: f64 = 0.0;
        for idx in 0..lhs.values().len() {
            let v = w_in.values()[idx];
            let div = div_w.values()[idx];
            let (d1v, d2v) = (d1.values()[idx], d2.values()[idx]);
            let defect = 1.0 - v.norm_sq();
            let rhs = if j == 0 {
                -2.0 * v.x * v.y * div + (d1v.y + d2v.x) * defect
            } else {
                (v.x * v.x - v.y * v.y) * div + (d2v.y - d1v.x) * defect
            };
            worst = worst.max((lhs.values()[idx] - rhs).abs());
        }
        *slot = worst;
    }
    Ok(residuals)
}

/// Residual of the divergence decomposition
/// div w = G1(w) div sigma1(w) + G2(w) div sigma2(w) + L(w)[grad w](1 - |w|^2).
pub fn verify_div_decomposition(w: &VectorField) -> Result<f64> {
    let div_w = w.divergence()?;
    let div_s1 = compose(w, |v| jin_kohn_sigma(1, v).expect("fixed")).divergence()?;
    let div_s2 = compose(w, |v| jin_kohn_sigma(2, v).expect("fixed")).divergence()?;
    let d1 = partial(w, 0)?;
    let d2 = partial(w, 1)?;
    let w_in = w.restrict(1)?;
    let mut worst: f64 = 0.0;
    for idx in 0..div_w.values().len() {
        let v = w_in.values()[idx];
        let (d1v, d2v) = (d1.values()[idx], d2.values()[idx]);
        let div = div_w.values()[idx];
        let defect = 1.0 - v.norm_sq();
        let l_term = (1.0 + v.norm_sq()) * div
            + 2.0 * v.x * v.y * (d1v.y + d2v.x)
            + (v.y * v.y - v.x * v.x) * (d2v.y - d1v.x);
        let rhs = -2.0 * v.x * v.y * div_s1.values()[idx]
            + (v.x * v.x - v.y * v.y) * div_s2.values()[idx]
            + l_term * defect;
        worst = worst.max((div - rhs).abs());
    }
    Ok(worst)
}

/// Residual of the full divergence identity for a harmonic entropy:
/// div Phi(w) = A(w) div w + div((|w|^2 - 1) B(w))
///            + d2B1(w) div sigma1(w) - d1B1(w) div sigma2(w).
pub fn verify_harmonic_entropy_identity(phi: &HarmonicFunction, w: &VectorField) -> Result<f64> {
    let max_norm = w.max_norm();
    if max_norm > 1.0 + 1e-12 {
        return Err(Error::RangeEscapesDisc(max_norm));
    }
    let entropy = DiscEntropy::harmonic(phi.clone())?;
    let mut composed = VectorField::fill(w.spec, Vec2::ZERO);
    let mut weighted_b = VectorField::fill(w.spec, Vec2::ZERO);
    for j in 0..w.spec.ny {
        for i in 0..w.spec.nx {
            let v = w.at(i, j);
            composed.set(i, j, entropy.eval(v)?);
            let jet = phi.jet3(v)?;
            let (b1, b2) = crate::harmonic::b_value(&jet, v);
            weighted_b.set(i, j, Vec2::new(b1.re, b2.re) * (v.norm_sq() - 1.0));
        }
    }
    let lhs = composed.divergence()?;
    let div_w = w.divergence()?;
    let div_b = weighted_b.divergence()?;
    let div_s1 = compose(w, |v| jin_kohn_sigma(1, v).expect("fixed")).divergence()?;
    let div_s2 = compose(w, |v| jin_kohn_sigma(2, v).expect("fixed")).divergence()?;
    let w_in = w.restrict(1)?;
    let mut worst: f64 = 0.0;
    for idx in 0..lhs.values().len() {
        let v = w_in.values()[idx];
        let jet = phi.jet3(v)?;
        let a = a_value(&jet, v).re;
        let (d1b1, d2b1) = db1_value(&jet, v);
        let rhs = a * div_w.values()[idx]
            + div_b.values()[idx]
            + d2b1.re * div_s1.values()[idx]
            - d1b1.re * div_s2.values()[idx];
        worst = worst.max((lhs.values()[idx] - rhs).abs());
    }
    Ok(worst)
}

/// Residual of the cutoff divergence identity
/// div Phi(w) = Psi(w) . grad(1 - |w|^2) + gamma(w) div w
/// for fields with range in the annulus 1/2 < |w| < 2.
pub fn verify_cutoff_identity(entropy: &DiscEntropy, w: &VectorField) -> Result<f64> {
    if !matches!(entropy, DiscEntropy::Cutoff { .. }) {
        return Err(Error::InvalidCutoff("identity applies to cutoff extensions".into()));
    }
    for v in w.values() {
        let r = v.norm();
        if !(0.5 < r && r < 2.0) {
            return Err(Error::RangeOutsideAnnulus(r));
        }
    }
    let mut composed = VectorField::fill(w.spec, Vec2::ZERO);
    let mut defect = ScalarField::fill(w.spec, 0.0);
    for j in 0..w.spec.ny {
        for i in 0..w.spec.nx {
            let v = w.at(i, j);
            composed.set(i, j, entropy.eval(v)?);
            defect.set(i, j, 1.0 - v.norm_sq());
        }
    }
    let lhs = composed.divergence()?;
    let grad_defect = defect.gradient()?;
    let div_w = w.divergence()?;
    let w_in = w.restrict(1)?;
    let mut worst: f64 = 0.0;
    for idx in 0..lhs.values().len() {
        let v = w_in.values()[idx];
        let rhs = entropy.psi_vec(v)?.dot(grad_defect.values()[idx]) + entropy.gamma(v)? * div_w.values()[idx];
        worst = worst.max((lhs.values()[idx] - rhs).abs());
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug)]
pub struct ModeCheck {
    pub k: i64,
    pub coefficient: f64,
    pub discrepancy: f64,
}

/// For each |k| <= k_max, compare the disc expression A on the circle with
/// the multiplier coefficient acting on the mode.
pub fn verify_multiplier_on_modes(k_max: usize) -> Vec<ModeCheck> {
    let samples = 512;
    let mut out = Vec::new();
    for k in -(k_max as i64)..=(k_max as i64) {
        let phi = HarmonicFunction::from_mode(k);
        let coeff = multiplier_coefficient(k);
        let mut worst: f64 = 0.0;
        for s in 0..samples {
            let t = std::f64::consts::TAU * s as f64 / samples as f64;
            let z = Vec2::unit_at_angle(t);
            let a = a_value(&phi.jet3_unchecked(z), z);
            let expect = num_complex::Complex64::from_polar(1.0, k as f64 * t) * coeff;
            worst = worst.max((a - expect).norm());
        }
        out.push(ModeCheck {
            k,
            coefficient: coeff,
            discrepancy: worst,
        });
    }
    out
}

#[derive(Clone, Copy, Debug)]
pub struct UnboundednessSample {
    pub n: usize,
    pub sup_psi: f64,
    pub sup_conjugate: f64,
}

/// Partial sums of sum sin(k t)/(k log k): the function stays uniformly
/// bounded while its conjugate grows without bound. Evaluated on 2^16
/// angles with a rotation recurrence, checkpointed at the requested
/// truncation orders (must be increasing).
pub fn hilbert_unboundedness_sweep(orders: &[usize]) -> Vec<UnboundednessSample> {
    assert!(!orders.is_empty());
    assert!(orders.windows(2).all(|w| w[0] < w[1]), "orders must increase");
    let n_max = *orders.last().unwrap();
    let samples = 1usize << 16;

    let per_sample = |s: usize| -> Vec<(f64, f64)> {
        let t = std::f64::consts::TAU * s as f64 / samples as f64;
        let (sin_t, cos_t) = t.sin_cos();
        // rotate (cos kt, sin kt) up from k = 1
        let mut ck = cos_t;
        let mut sk = sin_t;
        let mut psi = 0.0;
        let mut conj = 0.0;
        let mut out = Vec::with_capacity(orders.len());
        let mut next = 0usize;
        for k in 2..=n_max {
            let (c_new, s_new) = (ck * cos_t - sk * sin_t, sk * cos_t + ck * sin_t);
            ck = c_new;
            sk = s_new;
            let w = 1.0 / (k as f64 * (k as f64).ln());
            psi += sk * w;
            conj -= ck * w;
            while next < orders.len() && k == orders[next] {
                out.push((psi.abs(), conj.abs()));
                next += 1;
            }
        }
        out
    };

    #[cfg(feature = "parallel")]
    let partials: Vec<Vec<(f64, f64)>> = {
        use rayon::prelude::*;
        (0..samples).into_par_iter().map(per_sample).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<Vec<(f64, f64)>> = (0..samples).map(per_sample).collect();

    let mut out: Vec<UnboundednessSample> = orders
        .iter()
        .map(|&n| UnboundednessSample {
            n,
            sup_psi: 0.0,
            sup_conjugate: 0.0,
        })
        .collect();
    for row in partials {
        for (slot, (p, c)) in out.iter_mut().zip(row) {
            slot.sup_psi = slot.sup_psi.max(p);
            slot.sup_conjugate = slot.sup_conjugate.max(c);
        }
    }
    out
}

/// Max norms of the partial sum and its conjugate at a single truncation.
pub fn hilbert_unboundedness_demo(n: usize) -> (f64, f64) {
    assert!(n >= 4);
    let s = hilbert_unboundedness_sweep(&[n]);
    (s[0].sup_psi, s[0].sup_conjugate)
}

/// The conjugate partial sum at angle zero: -sum_{k=2}^{n} 1/(k log k).
pub fn conjugate_sum_at_zero(n: usize) -> f64 {
    -(2..=n).map(|k| 1.0 / (k as f64 * (k as f64).ln())).sum::<f64>()
}

#[derive(Clone, Copy, Debug)]
pub struct CommutatorEnvelope {
    pub draws: usize,
    pub violations: usize,
    /// Max over draws of |commutator| / (|D^2 Pi| * ball average of |D^z m|^2).
    pub max_ratio: f64,
}

/// Seeded sweep of the commutator bound over mixed fields (vortices,
/// jumps, smooth waves), kernel radii 4h and 8h, and maps with known
/// second-derivative norm. The frozen envelope constant is 10.
pub fn commutator_envelope(seed: u64, draws: usize) -> Result<CommutatorEnvelope> {
    let spec = GridSpec::unit(65)?;
    let mut rng = Lcg::new(seed);
    let mut violations = 0usize;
    let mut max_ratio: f64 = 0.0;
    for draw in 0..draws {
        let m = match draw % 3 {
            0 => {
                let zeta = Vec2::new(rng.range(0.3, 0.7), rng.range(0.3, 0.7));
                let alpha = if rng.next_f64() < 0.5 { 1 } else { -1 };
                vortex(zeta, alpha, spec).field
            }
            1 => {
                let beta = rng.range(0.15, std::f64::consts::FRAC_PI_2);
                let nu = Vec2::unit_at_angle(rng.range(0.0, std::f64::consts::TAU));
                jump_field(beta, nu, spec)?.field
            }
            _ => {
                let (a1, a2) = (rng.range(0.2, 1.0), rng.range(0.2, 1.0));
                let (w1, w2) = (rng.range(1.0, 9.0), rng.range(1.0, 9.0));
                let (p1, p2) = (rng.range(0.0, 6.0), rng.range(0.0, 6.0));
                VectorField::from_fn(spec, move |p| {
                    Vec2::new(
                        a1 * (w1 * p.x + p1).sin(),
                        a2 * (w2 * p.y + w1 * p.x + p2).cos(),
                    )
                })
            }
        };
        let eps_cells = if rng.next_f64() < 0.5 { 4.0 } else { 8.0 };
        let kernel = MollifierKernel::standard(eps_cells * spec.h, spec.h)?;
        let margin = kernel.radius_cells() + 1;
        let i = margin + rng.index(spec.nx - 2 * margin);
        let j = margin + rng.index(spec.ny - 2 * margin);

        // map with a known second-derivative sup over the reachable ball
        let (pi, d2_norm): (Box<dyn Fn(Vec2) -> f64>, f64) = match draw % 4 {
            0 => (Box::new(|v: Vec2| v.norm_sq()), 2.0),
            1 => {
                let q = crate::vec2::Mat2::new(
                    rng.range(-1.0, 1.0),
                    rng.range(-1.0, 1.0),
                    0.0,
                    rng.range(-1.0, 1.0),
                );
                let sym = crate::vec2::Mat2::new(q.a, 0.5 * (q.b + q.c), 0.5 * (q.b + q.c), q.d);
                let norm = sym.sym_spectral_norm().max(1e-9);
                let scaled = sym * (1.0 / norm);
                (
                    Box::new(move |v: Vec2| 0.5 * v.dot(scaled.apply(v)) + 0.3 * v.x - 0.1 * v.y),
                    1.0,
                )
            }
            2 => {
                let a = Vec2::new(rng.range(-2.0, 2.0), rng.range(-2.0, 2.0));
                (Box::new(move |v: Vec2| (a.dot(v)).cos()), a.norm_sq())
            }
            _ => (Box::new(|v: Vec2| (v.x * v.x - v.y * v.y) * 0.5), 1.0),
        };

        let c = commutator(&pi, &m, &kernel, (i, j))?;
        let avg = increment_square_average(&m, &kernel, (i, j))?;
        if avg * d2_norm < 1e-300 {
            if c.abs() > 1e-14 {
                violations += 1;
            }
            continue;
        }
        let ratio = c.abs() / (d2_norm * avg);
        max_ratio = max_ratio.max(ratio);
        if ratio > 10.0 {
            violations += 1;
        }
    }
    Ok(CommutatorEnvelope {
        draws,
        violations,
        max_ratio,
    })
}

// suite -----------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct SuiteRow {
    pub identity: String,
    pub grid_h: f64,
    pub residual: f64,
    pub observed_order: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "identity_id,grid_h,residual,observed_order,pass")?;
        for r in &self.rows {
            let order = r
                .observed_order
                .map(|o| format!("{o:.4}"))
                .unwrap_or_default();
            writeln!(
                w,
                "{},{:.12e},{:.12e},{},{}",
                r.identity, r.grid_h, r.residual, order, r.pass
            )?;
        }
        Ok(())
    }
}

/// Minimum acceptable refinement order; leaves room for stencil pollution
/// near the interior boundary while still certifying the O(h^2) main term.
pub const MIN_ORDER: f64 = 1.8;

pub fn smooth_field_catalog(spec: GridSpec, id: &str) -> VectorField {
    match id {
        "jk_divergence" => VectorField::from_fn(spec, |p| Vec2::new(p.y.sin(), p.x.cos())),
        "div_decomposition" => VectorField::from_fn(spec, |p| {
            Vec2::new(0.7 * (p.x + 0.5 * p.y).sin(), 0.6 * (p.x - p.y).cos())
        }),
        "harmonic_a" => VectorField::from_fn(spec, |p| Vec2::new(0.5 * p.y.cos(), 0.5 * p.x.sin())),
        "harmonic_b" => VectorField::from_fn(spec, |p| Vec2::unit_at_angle(p.x)),
        "harmonic_c" => VectorField::from_fn(spec, |p| {
            Vec2::new(0.7 * (p.x + 0.3 * p.y).sin(), 0.7 * (p.x - p.y).cos())
        }),
        "cutoff" => VectorField::from_fn(spec, |p| {
            Vec2::unit_at_angle(p.y) * (0.8 + 0.1 * p.x.sin())
        }),
        other => panic!("unknown catalog field {other}"),
    }
}

pub fn harmonic_catalog(id: &str) -> HarmonicFunction {
    match id {
        // modes k <= 2 make the identity exact at every h (the entropy is
        // an algebraic combination of the norm defect and the cubic pair,
        // so the stencils telescope); refinement pairs need k >= 3
        "harmonic_a" => HarmonicFunction::new(AngularFunction::real_harmonic(4, 1.0, 0.0)),
        "harmonic_b" => HarmonicFunction::new(AngularFunction::real_harmonic(3, 1.0, 0.0)),
        "harmonic_c" => HarmonicFunction::new(
            AngularFunction::real_harmonic(1, 0.5, 0.0)
                .add(&AngularFunction::real_harmonic(2, 0.0, 0.3))
                .add(&AngularFunction::real_harmonic(3, 0.2, 0.0)),
        ),
        other => panic!("unknown catalog harmonic {other}"),
    }
}

const GRID_IDENTITIES: [&str; 6] = [
    "jk_divergence",
    "div_decomposition",
    "harmonic_a",
    "harmonic_b",
    "harmonic_c",
    "cutoff",
];

fn grid_identity_residual(id: &str, n: usize) -> Result<f64> {
    let spec = GridSpec::unit(n)?;
    let w = smooth_field_catalog(spec, id);
    match id {
        "jk_divergence" => {
            let r = verify_jin_kohn_divergence(&w)?;
            Ok(r[0].max(r[1]))
        }
        "div_decomposition" => verify_div_decomposition(&w),
        "harmonic_a" | "harmonic_b" | "harmonic_c" => {
            verify_harmonic_entropy_identity(&harmonic_catalog(id), &w)
        }
        "cutoff" => {
            let pair = jin_kohn_circle_pair(1)?;
            let (entropy, _) = cutoff_extension(pair.c1, pair.c2, CutoffProfile::standard())?;
            verify_cutoff_identity(&entropy, &w)
        }
        other => panic!("unknown identity {other}"),
    }
}

/// Run the identity suite over the given grid node counts (each entry
/// should roughly halve h). `filter` keeps only identities whose id
/// starts with the given prefix.
pub fn run_suite(grid_nodes: &[usize], filter: Option<&str>, seed: u64) -> Result<SuiteReport> {
    let keep = |id: &str| filter.map(|f| id.starts_with(f)).unwrap_or(true);
    let mut rows = Vec::new();

    for id in GRID_IDENTITIES {
        if !keep(id) {
            continue;
        }
        let mut prev: Option<f64> = None;
        for &n in grid_nodes {
            let spec = GridSpec::unit(n)?;
            let residual = grid_identity_residual(id, n)?;
            let order = prev.map(|p| (p / residual).log2());
            // residuals at the rounding floor carry no order information
            let pass = residual.is_finite()
                && (residual <= 1e-12 || order.map(|o| o >= MIN_ORDER).unwrap_or(true));
            rows.push(SuiteRow {
                identity: id.to_string(),
                grid_h: spec.h,
                residual,
                observed_order: order,
                pass,
            });
            prev = Some(residual);
        }
    }

    if keep("multiplier_modes") {
        let checks = verify_multiplier_on_modes(16);
        let worst = checks.iter().fold(0.0f64, |a, c| a.max(c.discrepancy));
        rows.push(SuiteRow {
            identity: "multiplier_modes".into(),
            grid_h: 0.0,
            residual: worst,
            observed_order: None,
            pass: worst <= 1e-8,
        });
    }

    if keep("hilbert_unboundedness") {
        let orders = [64, 128, 256, 512, 1024, 2048, 4096];
        let sweep = hilbert_unboundedness_sweep(&orders);
        let grows = sweep.windows(2).all(|w| w[1].sup_conjugate > w[0].sup_conjugate);
        let stable = (sweep.last().unwrap().sup_psi - sweep[0].sup_psi).abs() / sweep[0].sup_psi < 0.02;
        let zero_defect = (sweep.last().unwrap().sup_conjugate + conjugate_sum_at_zero(4096)).abs();
        rows.push(SuiteRow {
            identity: "hilbert_unboundedness".into(),
            grid_h: 0.0,
            residual: zero_defect,
            observed_order: None,
            pass: grows && stable && zero_defect <= 1e-10,
        });
    }

    if keep("commutator_envelope") {
        let env = commutator_envelope(seed, 200)?;
        rows.push(SuiteRow {
            identity: "commutator_envelope".into(),
            grid_h: 1.0 / 64.0,
            residual: env.max_ratio,
            observed_order: None,
            pass: env.violations == 0,
        });
    }

    Ok(SuiteReport { rows })
}
