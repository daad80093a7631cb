//! The second-order phase-field energy on scalar grids and an explicit
//! descent loop with backtracking.
//!
//! The energy integrates eps |Hessian u|^2 + (1 - |grad u|^2)^2 / eps with
//! centered stencils over interior nodes (midpoint rule over the interior
//! cell union). The outermost node ring supplies the ghost layer for the
//! second differences; descent can either clamp it as a Dirichlet trace or
//! move it freely.

use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::vec2::Vec2;

#[derive(Clone, Copy, Debug)]
struct Stencil {
    a: f64, // u_xx
    b: f64, // u_xy
    c: f64, // u_yy
    g: Vec2,
}

fn stencil(u: &ScalarField, i: usize, j: usize) -> Stencil {
    let h = u.spec.h;
    let inv_h2 = 1.0 / (h * h);
    let inv_2h = 0.5 / h;
    Stencil {
        a: (u.at(i + 1, j) - 2.0 * u.at(i, j) + u.at(i - 1, j)) * inv_h2,
        b: (u.at(i + 1, j + 1) - u.at(i + 1, j - 1) - u.at(i - 1, j + 1) + u.at(i - 1, j - 1))
            * (0.25 * inv_h2),
        c: (u.at(i, j + 1) - 2.0 * u.at(i, j) + u.at(i, j - 1)) * inv_h2,
        g: Vec2::new(
            (u.at(i + 1, j) - u.at(i - 1, j)) * inv_2h,
            (u.at(i, j + 1) - u.at(i, j - 1)) * inv_2h,
        ),
    }
}

/// Discrete energy sum of eps |D^2 u|^2 + (1 - |grad u|^2)^2 / eps over
/// interior nodes, weight h^2.
pub fn aviles_giga_energy(u: &ScalarField, epsilon: f64) -> Result<f64> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    u.spec.shrink(1)?;
    let h2 = u.spec.h * u.spec.h;
    let mut acc = 0.0;
    for j in 1..u.spec.ny - 1 {
        for i in 1..u.spec.nx - 1 {
            let s = stencil(u, i, j);
            let hess = s.a * s.a + 2.0 * s.b * s.b + s.c * s.c;
            let pot = 1.0 - s.g.norm_sq();
            acc += epsilon * hess + pot * pot / epsilon;
        }
    }
    Ok(acc * h2)
}

/// Which nodes the descent is allowed to move.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryMode {
    /// Outermost node ring stays at its initial values (Dirichlet trace).
    FixedRing,
    /// Every node moves; the energy still only sums interior stencils.
    Free,
}

/// Exact gradient of the discrete energy, assembled by applying each
/// (self-adjoint) stencil to the zero-extended integrand derivative
/// fields. With a fixed ring the boundary entries are left at zero.
fn energy_gradient(u: &ScalarField, epsilon: f64, mode: BoundaryMode) -> ScalarField {
    let spec = u.spec;
    let (nx, ny) = (spec.nx, spec.ny);
    let h = spec.h;
    let h2 = h * h;
    let inv_h2 = 1.0 / h2;
    let inv_2h = 0.5 / h;

    // integrand derivative fields on interior nodes, zero elsewhere
    let mut fa = vec![0.0; spec.len()];
    let mut fb = vec![0.0; spec.len()];
    let mut fc = vec![0.0; spec.len()];
    let mut fw = vec![Vec2::ZERO; spec.len()];
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let s = stencil(u, i, j);
            let idx = spec.idx(i, j);
            fa[idx] = s.a;
            fb[idx] = s.b;
            fc[idx] = s.c;
            fw[idx] = s.g * (-4.0 * (1.0 - s.g.norm_sq()) / epsilon);
        }
    }

    let at = |f: &Vec<f64>, i: i64, j: i64| -> f64 {
        if i < 0 || j < 0 || i >= nx as i64 || j >= ny as i64 {
            0.0
        } else {
            f[spec.idx(i as usize, j as usize)]
        }
    };
    let atw = |f: &Vec<Vec2>, i: i64, j: i64| -> Vec2 {
        if i < 0 || j < 0 || i >= nx as i64 || j >= ny as i64 {
            Vec2::ZERO
        } else {
            f[spec.idx(i as usize, j as usize)]
        }
    };
    let mut grad = ScalarField::fill(spec, 0.0);
    let (lo, hi_i, hi_j) = match mode {
        BoundaryMode::FixedRing => (1i64, nx as i64 - 1, ny as i64 - 1),
        BoundaryMode::Free => (0, nx as i64, ny as i64),
    };
    for j in lo..hi_j {
        for i in lo..hi_i {
            let dxx = (at(&fa, i + 1, j) - 2.0 * at(&fa, i, j) + at(&fa, i - 1, j)) * inv_h2;
            let dyy = (at(&fc, i, j + 1) - 2.0 * at(&fc, i, j) + at(&fc, i, j - 1)) * inv_h2;
            let dxy = (at(&fb, i + 1, j + 1) - at(&fb, i + 1, j - 1) - at(&fb, i - 1, j + 1)
                + at(&fb, i - 1, j - 1))
                * (0.25 * inv_h2);
            let hess_part = epsilon * (2.0 * dxx + 4.0 * dxy + 2.0 * dyy);
            let pot_part = (atw(&fw, i - 1, j).x - atw(&fw, i + 1, j).x) * inv_2h
                + (atw(&fw, i, j - 1).y - atw(&fw, i, j + 1).y) * inv_2h;
            grad.set(i as usize, j as usize, (hess_part + pot_part) * h2);
        }
    }
    grad
}

#[derive(Clone, Debug)]
pub struct TraceRow {
    pub step: usize,
    pub energy: f64,
    pub step_size: f64,
}

#[derive(Clone, Debug, Default)]
pub struct EnergyTrace {
    pub rows: Vec<TraceRow>,
}

impl EnergyTrace {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "step,energy,step_size")?;
        for r in &self.rows {
            writeln!(w, "{},{:.12e},{:.12e}", r.step, r.energy, r.step_size)?;
        }
        Ok(())
    }

    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|p| p[1].energy <= p[0].energy + 1e-15)
    }
}

/// Explicit gradient descent with a halving backtracking rule: a step that
/// would increase the energy is retried at half the size. After an accepted
/// step the size creeps back up toward its initial value, so one early deep
/// cascade cannot pin it permanently.
///
/// A fixed-ring start from exactly uniform slope is bulk-critical (constant
/// W'(grad u) has zero divergence) and only relaxes in a thin margin; the
/// free mode lets the whole field slide to a zero-energy state.
pub fn minimize_aviles_giga(
    u0: &ScalarField,
    epsilon: f64,
    steps: usize,
    step_size: f64,
    mode: BoundaryMode,
) -> Result<(ScalarField, EnergyTrace)> {
    if !step_size.is_finite() || step_size <= 0.0 {
        return Err(Error::InvalidStepSize(step_size));
    }
    let mut u = u0.clone();
    let mut energy = aviles_giga_energy(&u, epsilon)?;
    if !energy.is_finite() {
        return Err(Error::NonFiniteEnergy);
    }
    let mut s = step_size;
    let mut trace = EnergyTrace::default();
    trace.rows.push(TraceRow {
        step: 0,
        energy,
        step_size: s,
    });
    for step in 1..=steps {
        let grad = energy_gradient(&u, epsilon, mode);
        loop {
            let mut trial = u.clone();
            for j in 0..u.spec.ny {
                for i in 0..u.spec.nx {
                    let g = grad.at(i, j);
                    if g != 0.0 {
                        trial.set(i, j, u.at(i, j) - s * g);
                    }
                }
            }
            let trial_energy = aviles_giga_energy(&trial, epsilon)?;
            if !trial_energy.is_finite() {
                return Err(Error::NonFiniteEnergy);
            }
            if trial_energy <= energy {
                u = trial;
                energy = trial_energy;
                break;
            }
            s *= 0.5;
            if s < 1e-18 {
                // gradient resolution exhausted; accept the plateau
                break;
            }
        }
        trace.rows.push(TraceRow {
            step,
            energy,
            step_size: s,
        });
        if s < 1e-18 {
            break;
        }
        s = (s * 1.25).min(step_size);
    }
    Ok((u, trace))
}

/// Mean over interior nodes of | |grad u| - 1 |.
pub fn eikonal_residual(u: &ScalarField) -> Result<f64> {
    let g = u.gradient()?;
    let mut acc = 0.0;
    for v in g.values() {
        acc += (v.norm() - 1.0).abs();
    }
    Ok(acc / g.values().len() as f64)
}
