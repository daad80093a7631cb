//! Mollification on grids, the nonlinear commutator it induces, and the
//! cubic increment average that controls entropy productions.

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField, VectorField};
use crate::vec2::Vec2;

/// Discrete convolution kernel: a radial bump sampled at lattice offsets
/// inside the ball of radius epsilon, renormalized to exact discrete mass 1.
#[derive(Clone, Debug)]
pub struct MollifierKernel {
    pub epsilon: f64,
    pub h: f64,
    /// Offsets in cells, one weight per offset; weights sum to 1.
    radius_cells: usize,
    weights: Vec<f64>,
}

impl MollifierKernel {
    /// Standard profile exp(-1/(1 - (|z|/eps)^2)) on |z| < eps.
    pub fn standard(epsilon: f64, h: f64) -> Result<Self> {
        Self::from_profile(epsilon, h, |s| {
            if s >= 1.0 {
                0.0
            } else {
                (-1.0 / (1.0 - s * s)).exp()
            }
        })
    }

    /// Kernel from a radial profile of |z|/epsilon; the profile must vanish
    /// at and beyond 1. Discretized then renormalized, so small mass drift
    /// from sampling never reaches the convolution.
    pub fn from_profile(epsilon: f64, h: f64, profile: impl Fn(f64) -> f64) -> Result<Self> {
        if epsilon < 2.0 * h {
            return Err(Error::UnderResolvedKernel { epsilon, h });
        }
        let radius_cells = (epsilon / h).floor() as usize;
        let side = 2 * radius_cells + 1;
        let mut weights = vec![0.0; side * side];
        let mut mass = 0.0;
        for b in -(radius_cells as i64)..=(radius_cells as i64) {
            for a in -(radius_cells as i64)..=(radius_cells as i64) {
                let z = Vec2::new(a as f64 * h, b as f64 * h);
                if z.norm() < epsilon {
                    let w = profile(z.norm() / epsilon);
                    weights[Self::slot(radius_cells, a, b)] = w;
                    mass += w;
                }
            }
        }
        if mass <= 0.0 {
            return Err(Error::UnderResolvedKernel { epsilon, h });
        }
        for w in &mut weights {
            *w /= mass;
        }
        Ok(MollifierKernel {
            epsilon,
            h,
            radius_cells,
            weights,
        })
    }

    fn slot(radius: usize, a: i64, b: i64) -> usize {
        let side = 2 * radius + 1;
        ((b + radius as i64) as usize) * side + (a + radius as i64) as usize
    }

    pub fn radius_cells(&self) -> usize {
        self.radius_cells
    }

    pub fn weight(&self, a: i64, b: i64) -> f64 {
        self.weights[Self::slot(self.radius_cells, a, b)]
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn check_field(&self, spec: &GridSpec) -> Result<()> {
        if (self.h - spec.h).abs() > 1e-13 {
            return Err(Error::KernelSpacingMismatch {
                kernel_h: self.h,
                field_h: spec.h,
            });
        }
        Ok(())
    }

    /// Offsets of the lattice ball |z| < epsilon, including the origin.
    pub fn ball_offsets(&self) -> Vec<(i64, i64)> {
        let r = self.radius_cells as i64;
        let mut out = Vec::new();
        for b in -r..=r {
            for a in -r..=r {
                let z = Vec2::new(a as f64 * self.h, b as f64 * self.h);
                if z.norm() < self.epsilon {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

/// Convolve a vector field with the kernel. The result lives on the grid
/// shrunk by the kernel radius; constants pass through exactly and the
/// max norm never grows.
pub fn mollify(m: &VectorField, kernel: &MollifierKernel) -> Result<VectorField> {
    kernel.check_field(&m.spec)?;
    let r = kernel.radius_cells();
    let spec = m.spec.shrink(r)?;
    let row = |j: usize| -> Vec<Vec2> {
        let mut out = Vec::with_capacity(spec.nx);
        for i in 0..spec.nx {
            let (ci, cj) = (i + r, j + r);
            let mut acc = Vec2::ZERO;
            for b in -(r as i64)..=(r as i64) {
                for a in -(r as i64)..=(r as i64) {
                    let w = kernel.weight(a, b);
                    if w != 0.0 {
                        // [f]_eps(x) = sum_z w(z) f(x - z)
                        acc += w
                            * m.at(
                                (ci as i64 - a) as usize,
                                (cj as i64 - b) as usize,
                            );
                    }
                }
            }
            out.push(acc);
        }
        out
    };

    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<Vec2>> = {
        use rayon::prelude::*;
        (0..spec.ny).into_par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<Vec2>> = (0..spec.ny).map(row).collect();

    let mut out = VectorField::fill(spec, Vec2::ZERO);
    for (j, vals) in rows.into_iter().enumerate() {
        for (i, v) in vals.into_iter().enumerate() {
            out.set(i, j, v);
        }
    }
    Ok(out)
}

/// Same convolution for scalar fields.
pub fn mollify_scalar(u: &ScalarField, kernel: &MollifierKernel) -> Result<ScalarField> {
    kernel.check_field(&u.spec)?;
    let r = kernel.radius_cells();
    let spec = u.spec.shrink(r)?;
    let mut out = ScalarField::fill(spec, 0.0);
    for j in 0..spec.ny {
        for i in 0..spec.nx {
            let (ci, cj) = (i + r, j + r);
            let mut acc = 0.0;
            for b in -(r as i64)..=(r as i64) {
                for a in -(r as i64)..=(r as i64) {
                    let w = kernel.weight(a, b);
                    if w != 0.0 {
                        acc += w * u.at((ci as i64 - a) as usize, (cj as i64 - b) as usize);
                    }
                }
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

fn require_ball_inside(m: &VectorField, r: usize, i: usize, j: usize) -> Result<()> {
    if i < r || j < r || i + r >= m.spec.nx || j + r >= m.spec.ny {
        return Err(Error::NearBoundary(i, j));
    }
    Ok(())
}

/// Nonlinear commutator [Pi(m)]_eps(x) - Pi(m_eps(x)) at a node.
pub fn commutator(
    pi: impl Fn(Vec2) -> f64,
    m: &VectorField,
    kernel: &MollifierKernel,
    node: (usize, usize),
) -> Result<f64> {
    kernel.check_field(&m.spec)?;
    let r = kernel.radius_cells();
    let (i, j) = node;
    require_ball_inside(m, r, i, j)?;
    let mut smoothed_pi = 0.0;
    let mut smoothed_m = Vec2::ZERO;
    for b in -(r as i64)..=(r as i64) {
        for a in -(r as i64)..=(r as i64) {
            let w = kernel.weight(a, b);
            if w != 0.0 {
                let v = m.at((i as i64 - a) as usize, (j as i64 - b) as usize);
                smoothed_pi += w * pi(v);
                smoothed_m += w * v;
            }
        }
    }
    Ok(smoothed_pi - pi(smoothed_m))
}

/// Uniform average over the lattice ball of |m(x + z) - m(x)|^2.
pub fn increment_square_average(m: &VectorField, kernel: &MollifierKernel, node: (usize, usize)) -> Result<f64> {
    kernel.check_field(&m.spec)?;
    let r = kernel.radius_cells();
    let (i, j) = node;
    require_ball_inside(m, r, i, j)?;
    let offsets = kernel.ball_offsets();
    let center = m.at(i, j);
    let mut acc = 0.0;
    for (a, b) in &offsets {
        let v = m.at((i as i64 + a) as usize, (j as i64 + b) as usize);
        acc += (v - center).norm_sq();
    }
    Ok(acc / offsets.len() as f64)
}

/// The scaled cubic increment average
/// eps^{-1} * mean over the lattice ball of |m(x + z) - m(x)|^3,
/// evaluated on the grid shrunk by the ball radius.
pub fn p_eps(m: &VectorField, epsilon: f64) -> Result<ScalarField> {
    let kernel = MollifierKernel::standard(epsilon, m.spec.h)?;
    let r = kernel.radius_cells();
    let spec = m.spec.shrink(r)?;
    let offsets = kernel.ball_offsets();
    let inv = 1.0 / (epsilon * offsets.len() as f64);

    let row = |j: usize| -> Vec<f64> {
        let mut out = Vec::with_capacity(spec.nx);
        for i in 0..spec.nx {
            let (ci, cj) = (i + r, j + r);
            let center = m.at(ci, cj);
            let mut acc = 0.0;
            for (a, b) in &offsets {
                let v = m.at((ci as i64 + a) as usize, (cj as i64 + b) as usize);
                let d = (v - center).norm_sq();
                acc += d * d.sqrt();
            }
            out.push(acc * inv);
        }
        out
    };

    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (0..spec.ny).into_par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<f64>> = (0..spec.ny).map(row).collect();

    let mut out = ScalarField::fill(spec, 0.0);
    for (j, vals) in rows.into_iter().enumerate() {
        for (i, v) in vals.into_iter().enumerate() {
            out.set(i, j, v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::max_difference;

    #[test]
    fn kernel_mass_is_one() {
        let k = MollifierKernel::standard(0.1, 0.01).unwrap();
        assert!((k.mass() - 1.0).abs() < 1e-12);
        assert!(MollifierKernel::standard(0.015, 0.01).is_err());
    }

    #[test]
    fn constants_pass_through() {
        let spec = GridSpec::unit(33).unwrap();
        let m = VectorField::from_fn(spec, |_| Vec2::new(0.4, -1.1));
        let k = MollifierKernel::standard(4.0 * spec.h, spec.h).unwrap();
        let out = mollify(&m, &k).unwrap();
        for v in out.values() {
            assert!((*v - Vec2::new(0.4, -1.1)).norm() < 1e-14);
        }
    }

    #[test]
    fn affine_fields_are_fixed_points() {
        // odd moments of the symmetric kernel vanish
        let spec = GridSpec::unit(33).unwrap();
        let m = VectorField::from_fn(spec, |p| Vec2::new(2.0 * p.x - p.y, 0.5 * p.x + p.y));
        let k = MollifierKernel::standard(5.0 * spec.h, spec.h).unwrap();
        let out = mollify(&m, &k).unwrap();
        for j in 0..out.spec.ny {
            for i in 0..out.spec.nx {
                let exact = {
                    let p = out.spec.node(i, j);
                    Vec2::new(2.0 * p.x - p.y, 0.5 * p.x + p.y)
                };
                assert!((out.at(i, j) - exact).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn jump_transition_layer() {
        let spec = GridSpec::unit(65).unwrap();
        let mid = spec.center().x + 0.5 * spec.h;
        let m = VectorField::from_fn(spec, |p| {
            if p.x > mid {
                Vec2::new(0.0, 1.0)
            } else {
                Vec2::new(0.0, -1.0)
            }
        });
        let eps = 8.0 * spec.h;
        let k = MollifierKernel::standard(eps, spec.h).unwrap();
        let out = mollify(&m, &k).unwrap();
        assert!(out.max_norm() <= 1.0 + 1e-12);
        for j in 0..out.spec.ny {
            for i in 0..out.spec.nx {
                let p = out.spec.node(i, j);
                let v = out.at(i, j);
                if (p.x - mid).abs() > eps {
                    // far field untouched
                    let side = if p.x > mid { 1.0 } else { -1.0 };
                    assert!((v - Vec2::new(0.0, side)).norm() < 1e-13);
                } else {
                    assert!(v.y.abs() <= 1.0 + 1e-13);
                }
            }
        }
    }

    #[test]
    fn mollify_commutes_with_divergence() {
        let spec = GridSpec::unit(49).unwrap();
        let m = VectorField::from_fn(spec, |p| {
            Vec2::new((3.0 * p.y).sin() * p.x, (2.0 * p.x).cos() - p.y * p.y)
        });
        let k = MollifierKernel::standard(4.0 * spec.h, spec.h).unwrap();
        let a = mollify(&m, &k).unwrap().divergence().unwrap();
        let b = mollify_scalar(&m.divergence().unwrap(), &k).unwrap();
        assert!(max_difference(&a, &b).unwrap() < 1e-12);
    }

    #[test]
    fn commutator_trivial_cases() {
        let spec = GridSpec::unit(33).unwrap();
        let k = MollifierKernel::standard(4.0 * spec.h, spec.h).unwrap();
        // constant field commutes with everything
        let m = VectorField::from_fn(spec, |_| Vec2::new(0.6, -0.8));
        let c = commutator(|v| v.norm_sq(), &m, &k, (16, 16)).unwrap();
        assert!(c.abs() < 1e-14);
        // affine Pi commutes with mollification of any field
        let m = VectorField::from_fn(spec, |p| Vec2::new(p.x * p.x, (4.0 * p.y).sin()));
        let c = commutator(|v| 2.0 * v.x - 3.0 * v.y + 1.0, &m, &k, (16, 16)).unwrap();
        assert!(c.abs() < 1e-12);
    }

    #[test]
    fn commutator_on_interface_is_positive_and_bounded() {
        let spec = GridSpec::unit(65).unwrap();
        let mid = spec.center().x + 0.5 * spec.h;
        let m = VectorField::from_fn(spec, |p| {
            if p.x > mid {
                Vec2::new(0.5, 0.866025403784438_6)
            } else {
                Vec2::new(0.5, -0.866025403784438_6)
            }
        });
        let k = MollifierKernel::standard(6.0 * spec.h, spec.h).unwrap();
        // node right next to the interface
        let i = (0..spec.nx - 1).find(|&i| spec.node(i, 0).x <= mid && spec.node(i + 1, 0).x > mid).unwrap();
        let node = (i, 32);
        let c = commutator(|v| v.norm_sq(), &m, &k, node).unwrap();
        assert!(c > 0.0, "interface commutator should be positive, got {c}");
        let avg = increment_square_average(&m, &k, node).unwrap();
        // |D^2 Pi| = 2 for Pi = |.|^2
        assert!(c <= 10.0 * 2.0 * avg);
    }

    #[test]
    fn p_eps_basic_scales() {
        let spec = GridSpec::unit(65).unwrap();
        let eps = 6.0 * spec.h;
        // constants give zero
        let m = VectorField::from_fn(spec, |_| Vec2::new(1.0, 0.0));
        assert_eq!(p_eps(&m, eps).unwrap().max_abs(), 0.0);

        // Lipschitz fields: bounded by L^3 eps^2
        let lip = 2.0;
        let m = VectorField::from_fn(spec, |p| Vec2::new(lip * p.x, 0.0));
        let out = p_eps(&m, eps).unwrap();
        assert!(out.max_abs() <= lip.powi(3) * eps * eps + 1e-12);

        // jump fields: order 1/eps near the interface, zero far away
        let mid = spec.center().x + 0.5 * spec.h;
        let m = VectorField::from_fn(spec, |p| {
            if p.x > mid {
                Vec2::new(0.0, 1.0)
            } else {
                Vec2::new(0.0, -1.0)
            }
        });
        let out = p_eps(&m, eps).unwrap();
        let mut near: f64 = 0.0;
        let mut far: f64 = 0.0;
        for j in 0..out.spec.ny {
            for i in 0..out.spec.nx {
                let p = out.spec.node(i, j);
                if (p.x - mid).abs() < 0.5 * eps {
                    near = near.max(out.at(i, j));
                } else if (p.x - mid).abs() > 2.0 * eps {
                    far = far.max(out.at(i, j));
                }
            }
        }
        assert_eq!(far, 0.0);
        assert!(near * eps > 0.3 && near * eps < 8.0, "near-interface magnitude c/eps, got c = {}", near * eps);
    }
}
