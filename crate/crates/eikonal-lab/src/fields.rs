//! Canonical reference fields: vortices, divergence-compatible jumps, and
//! the perpendicular-gradient bridge from scalar potentials.

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField, VectorField};
use crate::jin_kohn::jin_kohn_sigma;
use crate::vec2::Vec2;

/// A generated unit field together with the cell block around any
/// singular point; the block is excluded from unit-norm and production
/// statistics.
#[derive(Clone, Debug)]
pub struct GeneratedField {
    pub field: VectorField,
    /// Lower-left node indices of flagged plaquettes.
    pub singular_cells: Vec<(usize, usize)>,
    /// Physical singular points, one per flagged plaquette.
    pub singular_points: Vec<Vec2>,
}

/// The tangential unit field alpha i (x - zeta)/|x - zeta|. If zeta falls
/// on a grid node it is offset by h/2 in both directions so every node
/// carries a well-defined unit vector.
pub fn vortex(zeta: Vec2, alpha: i8, spec: GridSpec) -> GeneratedField {
    assert!(alpha == 1 || alpha == -1, "alpha must be +-1");
    let mut zeta = zeta;
    // nudge off lattice lines so no node or cell edge carries the center
    let fi = (zeta.x - spec.origin.x) / spec.h;
    let fj = (zeta.y - spec.origin.y) / spec.h;
    if (fi - fi.round()).abs() < 1e-9 {
        zeta.x += 0.5 * spec.h;
    }
    if (fj - fj.round()).abs() < 1e-9 {
        zeta.y += 0.5 * spec.h;
    }
    let sign = alpha as f64;
    let field = VectorField::from_fn(spec, |p| {
        let d = p - zeta;
        d.perp() * (sign / d.norm())
    });
    let mut singular_cells = Vec::new();
    let mut singular_points = Vec::new();
    let ci = ((zeta.x - spec.origin.x) / spec.h).floor();
    let cj = ((zeta.y - spec.origin.y) / spec.h).floor();
    if ci >= 0.0 && cj >= 0.0 && (ci as usize) + 1 < spec.nx && (cj as usize) + 1 < spec.ny {
        singular_cells.push((ci as usize, cj as usize));
        singular_points.push(zeta);
    }
    GeneratedField {
        field,
        singular_cells,
        singular_points,
    }
}

/// Product of two vortices as complex phases; winds once around each center.
pub fn two_vortices(zeta1: Vec2, zeta2: Vec2, spec: GridSpec) -> GeneratedField {
    let a = vortex(zeta1, 1, spec);
    let b = vortex(zeta2, 1, spec);
    let mut field = VectorField::fill(spec, Vec2::ZERO);
    for j in 0..spec.ny {
        for i in 0..spec.nx {
            let u = a.field.at(i, j);
            let v = b.field.at(i, j);
            // complex product (u1 + i u2)(v1 + i v2)
            field.set(i, j, Vec2::new(u.x * v.x - u.y * v.y, u.x * v.y + u.y * v.x));
        }
    }
    let mut singular_cells = a.singular_cells;
    singular_cells.extend(b.singular_cells);
    let mut singular_points = a.singular_points;
    singular_points.extend(b.singular_points);
    GeneratedField {
        field,
        singular_cells,
        singular_points,
    }
}

/// Traces of the divergence-compatible jump: the normal component
/// cos(beta) is continuous, the tangential component jumps by 2 sin(beta).
pub fn jump_traces(beta: f64, nu: Vec2) -> Result<(Vec2, Vec2)> {
    if !(beta > 0.0 && beta <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidHalfAngle(beta));
    }
    let nu = nu * (1.0 / nu.norm());
    let plus = nu * beta.cos() + nu.perp() * beta.sin();
    let minus = nu * beta.cos() - nu.perp() * beta.sin();
    Ok((plus, minus))
}

/// Piecewise-constant unit field jumping across the line near the grid
/// center, with normal nu. The line parameter snaps to a half-integer
/// lattice offset along nu, so for axis-aligned normals it passes through
/// cell midpoints and never through nodes.
pub fn jump_field(beta: f64, nu: Vec2, spec: GridSpec) -> Result<GeneratedField> {
    let (plus, minus) = jump_traces(beta, nu)?;
    let nu = nu * (1.0 / nu.norm());
    let base = spec.origin.dot(nu);
    let s_center = spec.center().dot(nu) - base;
    let s_line = base + (((s_center / spec.h).floor()) + 0.5) * spec.h;
    let field = VectorField::from_fn(spec, |p| {
        if p.dot(nu) > s_line {
            plus
        } else {
            minus
        }
    });
    Ok(GeneratedField {
        field,
        singular_cells: Vec::new(),
        singular_points: Vec::new(),
    })
}

/// Entropy flux jump across the interface, per unit length:
/// (sigma_j(m+) - sigma_j(m-)) . nu.
pub fn jump_cost(j: usize, beta: f64, nu: Vec2) -> Result<f64> {
    let (plus, minus) = jump_traces(beta, nu)?;
    let nu = nu * (1.0 / nu.norm());
    Ok((jin_kohn_sigma(j, plus)? - jin_kohn_sigma(j, minus)?).dot(nu))
}

/// The perpendicular gradient m = (-d2 u, d1 u) by centered differences,
/// on the grid shrunk by one cell.
pub fn field_from_u(u: &ScalarField) -> Result<VectorField> {
    let g = u.gradient()?;
    Ok(g.map_values(|v| v.perp()))
}
