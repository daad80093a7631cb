//! The correspondence between unit fields with curl-free entropy images,
//! potentials whose derivative lies on the matrix family, the equivalent
//! first-order complex system, and winding diagnostics.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, ScalarField, VectorField};
use crate::jin_kohn::{jin_kohn_sigma, p_matrix, p_matrix_d1, p_matrix_d2};
use crate::vec2::{Mat2, Vec2};

/// Potential pair for a unit field: grad F_j = i sigma_j(m), built by
/// trapezoid path integration along the bottom row and then up each
/// column. Any tree on a simply connected grid gives the same result up
/// to the curl residual, which is measured on every plaquette and
/// reported.
#[derive(Clone, Debug)]
pub struct PotentialPair {
    pub f1: ScalarField,
    pub f2: ScalarField,
    /// Max over plaquettes of |circulation| / h^2, one entry per component.
    pub curl_residual: [f64; 2],
}

fn integrate_gradient(g: &VectorField) -> ScalarField {
    let spec = g.spec;
    let h = spec.h;
    let mut f = ScalarField::fill(spec, 0.0);
    // bottom row
    for i in 1..spec.nx {
        let v = f.at(i - 1, 0) + 0.5 * h * (g.at(i - 1, 0).x + g.at(i, 0).x);
        f.set(i, 0, v);
    }
    // up each column
    for i in 0..spec.nx {
        for j in 1..spec.ny {
            let v = f.at(i, j - 1) + 0.5 * h * (g.at(i, j - 1).y + g.at(i, j).y);
            f.set(i, j, v);
        }
    }
    f
}

fn max_plaquette_curl(g: &VectorField) -> f64 {
    let spec = g.spec;
    let h = spec.h;
    let mut worst: f64 = 0.0;
    for j in 0..spec.ny - 1 {
        for i in 0..spec.nx - 1 {
            // trapezoid circulation around the cell, counterclockwise
            let bottom = 0.5 * (g.at(i, j).x + g.at(i + 1, j).x);
            let right = 0.5 * (g.at(i + 1, j).y + g.at(i + 1, j + 1).y);
            let top = 0.5 * (g.at(i + 1, j + 1).x + g.at(i, j + 1).x);
            let left = 0.5 * (g.at(i, j + 1).y + g.at(i, j).y);
            let circ = (bottom + right - top - left) * h;
            worst = worst.max((circ / (h * h)).abs());
        }
    }
    worst
}

/// Integrate the rotated entropy images of a unit field into a potential
/// pair. Fails when the plaquette curl residual exceeds `curl_tol`
/// (the field is then not admissible on this grid).
pub fn field_to_potential(m: &VectorField, curl_tol: f64) -> Result<PotentialPair> {
    m.ensure_unit(1e-9)?;
    let mut gs = Vec::new();
    for j in 1..=2 {
        let g = m.map_values(|v| jin_kohn_sigma(j, v).expect("index in range").perp());
        let curl = max_plaquette_curl(&g);
        if curl > curl_tol {
            return Err(Error::CurlResidual { max: curl, tol: curl_tol });
        }
        gs.push((g, curl));
    }
    let (g1, c1) = gs.remove(0);
    let (g2, c2) = gs.remove(0);
    Ok(PotentialPair {
        f1: integrate_gradient(&g1),
        f2: integrate_gradient(&g2),
        curl_residual: [c1, c2],
    })
}

/// Recover the unit field from a potential pair:
/// m1 = -F1_x - F2_y, m2 = F1_y - F2_x, centered differences.
pub fn potential_to_field(f1: &ScalarField, f2: &ScalarField) -> Result<VectorField> {
    let g1 = f1.gradient()?;
    let g2 = f2.gradient()?;
    let mut out = VectorField::fill(g1.spec, Vec2::ZERO);
    for j in 0..out.spec.ny {
        for i in 0..out.spec.nx {
            let a = g1.at(i, j);
            let b = g2.at(i, j);
            out.set(i, j, Vec2::new(-a.x - b.y, a.y - b.x));
        }
    }
    Ok(out)
}

/// Derivative matrix of the potential pair at interior nodes:
/// rows (grad F1, grad F2).
pub fn potential_jacobian(f1: &ScalarField, f2: &ScalarField) -> Result<Vec<(usize, usize, Mat2)>> {
    let g1 = f1.gradient()?;
    let g2 = f2.gradient()?;
    let mut out = Vec::with_capacity(g1.spec.len());
    for j in 0..g1.spec.ny {
        for i in 0..g1.spec.nx {
            out.push((i, j, Mat2::from_rows(g1.at(i, j), g2.at(i, j))));
        }
    }
    Ok(out)
}

/// Distance from a matrix to the family: coarse 1024-point scan of
/// |A - P(theta)| followed by three Newton steps on the squared distance.
pub fn inclusion_distance(a: Mat2) -> (f64, f64) {
    let n = 1024;
    let mut best = f64::INFINITY;
    let mut best_theta = 0.0;
    for i in 0..n {
        let t = std::f64::consts::TAU * i as f64 / n as f64;
        let d = (a - p_matrix(t)).norm();
        if d < best {
            best = d;
            best_theta = t;
        }
    }
    let mut theta = best_theta;
    for _ in 0..3 {
        let p = p_matrix(theta);
        let dp = p_matrix_d1(theta);
        let ddp = p_matrix_d2(theta);
        let r = a - p;
        // g(theta) = |A - P|^2: g' = -2 <r, P'>, g'' = 2 <P', P'> - 2 <r, P''>
        let inner = |x: Mat2, y: Mat2| x.a * y.a + x.b * y.b + x.c * y.c + x.d * y.d;
        let g1 = -2.0 * inner(r, dp);
        let g2 = 2.0 * inner(dp, dp) - 2.0 * inner(r, ddp);
        if g2.abs() < 1e-14 {
            break;
        }
        theta -= g1 / g2;
    }
    let refined = (a - p_matrix(theta)).norm();
    if refined < best {
        (refined, crate::jin_kohn::reduce_angle(theta))
    } else {
        (best, best_theta)
    }
}

/// Wirtinger residuals of the first-order system:
/// r1 = |dv/dzbar - (4/3)(dv/dz)^3| and r2 = | |dv/dz| - 1/2 |,
/// centered differences, defined on the grid shrunk by one cell.
pub fn beltrami_residual(v: &ComplexField) -> Result<(ScalarField, ScalarField)> {
    let spec = v.spec.shrink(1)?;
    let inv2h = 0.5 / v.spec.h;
    let mut r1 = ScalarField::fill(spec, 0.0);
    let mut r2 = ScalarField::fill(spec, 0.0);
    for j in 0..spec.ny {
        for i in 0..spec.nx {
            let (si, sj) = (i + 1, j + 1);
            let d1 = (v.at(si + 1, sj) - v.at(si - 1, sj)) * inv2h;
            let d2 = (v.at(si, sj + 1) - v.at(si, sj - 1)) * inv2h;
            let im = Complex64::new(0.0, 1.0);
            let vz = 0.5 * (d1 - im * d2);
            let vzbar = 0.5 * (d1 + im * d2);
            r1.set(i, j, (vzbar - 4.0 / 3.0 * vz * vz * vz).norm());
            r2.set(i, j, (vz.norm() - 0.5).abs());
        }
    }
    Ok((r1, r2))
}

pub fn complex_from_pair(f1: &ScalarField, f2: &ScalarField) -> ComplexField {
    let mut out = ComplexField::fill(f1.spec, Complex64::new(0.0, 0.0));
    for j in 0..f1.spec.ny {
        for i in 0..f1.spec.nx {
            out.set(i, j, Complex64::new(f1.at(i, j), f2.at(i, j)));
        }
    }
    out
}

fn angle_increment(from: Vec2, to: Vec2) -> f64 {
    let d = to.angle() - from.angle();
    // principal value in (-pi, pi]
    let tau = std::f64::consts::TAU;
    let mut d = d - tau * (d / tau).round();
    if d <= -std::f64::consts::PI {
        d += tau;
    }
    d
}

/// Winding of the field along the counterclockwise boundary of the node
/// rectangle [i0, i1] x [j0, j1]. Errors when the field is too short on
/// the loop or an increment reaches pi/2 (under-resolved loop).
pub fn winding_number(m: &VectorField, i0: usize, j0: usize, i1: usize, j1: usize) -> Result<i32> {
    assert!(i1 > i0 && j1 > j0 && i1 < m.spec.nx && j1 < m.spec.ny);
    let mut loop_nodes = Vec::new();
    for i in i0..=i1 {
        loop_nodes.push((i, j0));
    }
    for j in j0 + 1..=j1 {
        loop_nodes.push((i1, j));
    }
    for i in (i0..i1).rev() {
        loop_nodes.push((i, j1));
    }
    for j in (j0 + 1..j1).rev() {
        loop_nodes.push((i0, j));
    }
    loop_nodes.push((i0, j0));

    let mut total = 0.0;
    for w in loop_nodes.windows(2) {
        let a = m.at(w[0].0, w[0].1);
        let b = m.at(w[1].0, w[1].1);
        if a.norm() < 0.5 || b.norm() < 0.5 {
            return Err(Error::NotUnitNorm(a.norm().min(b.norm())));
        }
        let inc = angle_increment(a, b);
        if inc.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::UnderResolvedLoop(inc.abs()));
        }
        total += inc;
    }
    Ok((total / std::f64::consts::TAU).round() as i32)
}

/// Winding of the elementary 4-node plaquette loop at (i, j). No
/// resolution guard: large increments are exactly what flag a singular
/// plaquette.
fn plaquette_winding(m: &VectorField, i: usize, j: usize) -> i32 {
    let corners = [
        m.at(i, j),
        m.at(i + 1, j),
        m.at(i + 1, j + 1),
        m.at(i, j + 1),
        m.at(i, j),
    ];
    let mut total = 0.0;
    for w in corners.windows(2) {
        total += angle_increment(w[0], w[1]);
    }
    (total / std::f64::consts::TAU).round() as i32
}

#[derive(Clone, Copy, Debug)]
pub struct SingularPoint {
    /// Plaquette center.
    pub position: Vec2,
    pub winding: i32,
    /// Lower-left node of the plaquette.
    pub cell: (usize, usize),
}

/// Scan all plaquettes for nonzero elementary winding.
pub fn singular_set_scan(m: &VectorField) -> Result<Vec<SingularPoint>> {
    m.ensure_unit(1e-9)?;
    let spec = m.spec;
    let row = |j: usize| -> Vec<SingularPoint> {
        let mut found = Vec::new();
        for i in 0..spec.nx - 1 {
            let w = plaquette_winding(m, i, j);
            if w != 0 {
                found.push(SingularPoint {
                    position: spec.node(i, j) + Vec2::new(0.5 * spec.h, 0.5 * spec.h),
                    winding: w,
                    cell: (i, j),
                });
            }
        }
        found
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<SingularPoint>> = {
        use rayon::prelude::*;
        (0..spec.ny - 1).into_par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<SingularPoint>> = (0..spec.ny - 1).map(row).collect();
    Ok(rows.into_iter().flatten().collect())
}
