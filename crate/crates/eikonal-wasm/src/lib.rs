//! Browser demo bindings: canonical singular fields with their entropy
//! production density, the phase-field descent trace, and the bounded
//! function whose conjugate grows without bound.
//!
//! Everything returns flat numeric buffers; the page draws them on plain
//! canvases. Compiles on native targets as well so the bindings stay under
//! ordinary `cargo test`.

use wasm_bindgen::prelude::*;

use eikonal_lab::energy::{eikonal_residual, minimize_aviles_giga, BoundaryMode};
use eikonal_lab::entropy::DiscEntropy;
use eikonal_lab::fields::{jump_field, two_vortices, vortex};
use eikonal_lab::grid::{GridSpec, ScalarField, VectorField};
use eikonal_lab::inclusion::singular_set_scan;
use eikonal_lab::mollify::{mollify, MollifierKernel};
use eikonal_lab::vec2::Vec2;
use eikonal_lab::verify::hilbert_unboundedness_sweep;

fn build_field(kind: u8, n: usize, beta: f64) -> Result<VectorField, JsError> {
    let spec = GridSpec::unit(n).map_err(|e| JsError::new(&e.to_string()))?;
    Ok(match kind {
        0 => vortex(spec.center(), 1, spec).field,
        1 => vortex(spec.center(), -1, spec).field,
        2 => jump_field(beta, Vec2::new(1.0, 0.0), spec)
            .map_err(|e| JsError::new(&e.to_string()))?
            .field,
        3 => two_vortices(Vec2::new(0.32, 0.45), Vec2::new(0.68, 0.55), spec).field,
        _ => return Err(JsError::new("unknown field kind")),
    })
}

/// A sampled unit field with its smoothed entropy production density and
/// detected singular plaquettes.
#[wasm_bindgen]
pub struct FieldDemo {
    n: usize,
    angles: Vec<f64>,
    prod_n: usize,
    production: Vec<f64>,
    production_max: f64,
    singular: Vec<f64>,
}

#[wasm_bindgen]
impl FieldDemo {
    /// kind: 0 vortex, 1 reversed vortex, 2 jump (half-angle beta, radians),
    /// 3 vortex pair. eps_cells: mollifier radius in cells.
    #[wasm_bindgen(constructor)]
    pub fn new(kind: u8, n: usize, beta: f64, eps_cells: usize) -> Result<FieldDemo, JsError> {
        let m = build_field(kind, n, beta)?;
        let spec = m.spec;
        let angles: Vec<f64> = m.values().iter().map(|v| v.angle()).collect();

        let eps = (eps_cells.max(2) as f64) * spec.h;
        let kernel =
            MollifierKernel::standard(eps, spec.h).map_err(|e| JsError::new(&e.to_string()))?;
        let m_eps = mollify(&m, &kernel).map_err(|e| JsError::new(&e.to_string()))?;
        let phi = DiscEntropy::JinKohn1;
        let mut composed = VectorField::fill(m_eps.spec, Vec2::ZERO);
        for j in 0..m_eps.spec.ny {
            for i in 0..m_eps.spec.nx {
                composed.set(
                    i,
                    j,
                    phi.eval(m_eps.at(i, j))
                        .map_err(|e| JsError::new(&e.to_string()))?,
                );
            }
        }
        let div = composed
            .divergence()
            .map_err(|e| JsError::new(&e.to_string()))?;
        let production: Vec<f64> = div.values().iter().map(|v| v.abs()).collect();
        let production_max = production.iter().fold(0.0f64, |a, &v| a.max(v));

        let mut singular = Vec::new();
        if let Ok(points) = singular_set_scan(&m) {
            for p in points {
                singular.push(p.position.x);
                singular.push(p.position.y);
                singular.push(p.winding as f64);
            }
        }
        Ok(FieldDemo {
            n: spec.nx,
            angles,
            prod_n: div.spec.nx,
            production,
            production_max,
            singular,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Angle of the field at each node, row-major.
    pub fn angles(&self) -> Vec<f64> {
        self.angles.clone()
    }

    pub fn production_n(&self) -> usize {
        self.prod_n
    }

    /// |div sigma1(m_eps)| on the interior grid, row-major.
    pub fn production(&self) -> Vec<f64> {
        self.production.clone()
    }

    pub fn production_max(&self) -> f64 {
        self.production_max
    }

    /// Flat (x, y, winding) triples of flagged plaquettes, unit coordinates.
    pub fn singular_points(&self) -> Vec<f64> {
        self.singular.clone()
    }
}

/// Descent on the phase-field energy from a rippled near-plane profile.
#[wasm_bindgen]
pub struct DescentDemo {
    energies: Vec<f64>,
    slopes: Vec<f64>,
    n: usize,
    residual_before: f64,
    residual_after: f64,
}

#[wasm_bindgen]
impl DescentDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, epsilon: f64, steps: usize, ripple: f64) -> Result<DescentDemo, JsError> {
        let spec = GridSpec::unit(n).map_err(|e| JsError::new(&e.to_string()))?;
        let tau = std::f64::consts::TAU;
        let u0 = ScalarField::from_fn(spec, |p| {
            0.9 * p.x + ripple * (4.0 * tau * p.x).sin() * (4.0 * tau * p.y).sin()
        });
        let (u, trace) = minimize_aviles_giga(&u0, epsilon, steps, 1.0, BoundaryMode::Free)
            .map_err(|e| JsError::new(&e.to_string()))?;
        let g = u.gradient().map_err(|e| JsError::new(&e.to_string()))?;
        Ok(DescentDemo {
            energies: trace.rows.iter().map(|r| r.energy).collect(),
            slopes: g.values().iter().map(|v| v.norm()).collect(),
            n: g.spec.nx,
            residual_before: eikonal_residual(&u0).map_err(|e| JsError::new(&e.to_string()))?,
            residual_after: eikonal_residual(&u).map_err(|e| JsError::new(&e.to_string()))?,
        })
    }

    pub fn energies(&self) -> Vec<f64> {
        self.energies.clone()
    }

    /// |grad u| of the final iterate on the interior grid, row-major.
    pub fn slopes(&self) -> Vec<f64> {
        self.slopes.clone()
    }

    pub fn slope_n(&self) -> usize {
        self.n
    }

    pub fn residual_before(&self) -> f64 {
        self.residual_before
    }

    pub fn residual_after(&self) -> f64 {
        self.residual_after
    }
}

/// Sup norms of the partial sums of sum sin(k t)/(k log k) and of their
/// conjugates, at doubling truncation orders up to `max_order`. Returns
/// flat (order, sup, conjugate sup) triples.
#[wasm_bindgen]
pub fn conjugate_growth(max_order: usize) -> Vec<f64> {
    let mut orders = vec![8usize];
    while *orders.last().unwrap() < max_order.clamp(8, 8192) {
        let next = orders.last().unwrap() * 2;
        orders.push(next);
    }
    let sweep = hilbert_unboundedness_sweep(&orders);
    let mut out = Vec::with_capacity(3 * sweep.len());
    for s in sweep {
        out.push(s.n as f64);
        out.push(s.sup_psi);
        out.push(s.sup_conjugate);
    }
    out
}
