//! The (1/3, 4, infinity) Besov seminorm on a sub-rectangle, sampled over
//! dyadic scales and a fan of directions per scale.

use crate::error::{Error, Result};
use crate::grid::VectorField;
use crate::vec2::Vec2;

/// Node-index window [i0, i1) x [j0, j1).
#[derive(Clone, Copy, Debug)]
pub struct IndexRect {
    pub i0: usize,
    pub i1: usize,
    pub j0: usize,
    pub j1: usize,
}

impl IndexRect {
    pub fn is_empty(&self) -> bool {
        self.i0 >= self.i1 || self.j0 >= self.j1
    }

    /// Centered window leaving `margin` cells on every side.
    pub fn with_margin(nx: usize, ny: usize, margin: usize) -> Self {
        IndexRect {
            i0: margin,
            i1: nx.saturating_sub(margin),
            j0: margin,
            j1: ny.saturating_sub(margin),
        }
    }
}

/// L^4 norm over the window of the shift difference m(. + z) - m(.).
fn shift_difference_l4(m: &VectorField, window: &IndexRect, shift: (i64, i64)) -> Result<f64> {
    let (a, b) = shift;
    let h2 = m.spec.h * m.spec.h;
    let mut acc = 0.0;
    for j in window.j0..window.j1 {
        for i in window.i0..window.i1 {
            let ii = i as i64 + a;
            let jj = j as i64 + b;
            if ii < 0 || jj < 0 || ii >= m.spec.nx as i64 || jj >= m.spec.ny as i64 {
                return Err(Error::NearBoundary(i, j));
            }
            let d = m.at(ii as usize, jj as usize) - m.at(i, j);
            let s = d.norm_sq();
            acc += s * s;
        }
    }
    Ok((acc * h2).powf(0.25))
}

/// Lattice shifts probing the ball |z| <= t: a fan of `directions`
/// equispaced angles rounded to the lattice, kept when they stay inside
/// the ball. A sampled lower bound of the true supremum over shifts.
fn scale_shifts(t_cells: usize, directions: usize) -> Vec<(i64, i64)> {
    let mut shifts = Vec::new();
    for d in 0..directions {
        let ang = std::f64::consts::TAU * d as f64 / directions as f64;
        let raw = Vec2::unit_at_angle(ang) * t_cells as f64;
        let mut cand = (raw.x.round() as i64, raw.y.round() as i64);
        // rounding may poke outside the ball; pull straight onto the axis length
        while (cand.0 * cand.0 + cand.1 * cand.1) as f64 > (t_cells * t_cells) as f64 {
            if cand.0.abs() >= cand.1.abs() {
                cand.0 -= cand.0.signum();
            } else {
                cand.1 -= cand.1.signum();
            }
        }
        if cand != (0, 0) && !shifts.contains(&cand) {
            shifts.push(cand);
        }
    }
    shifts
}

#[derive(Clone, Debug)]
pub struct BesovDetail {
    /// Per dyadic scale: (t, best shift, t^{-1/3} * sup_shift L4 norm).
    pub per_scale: Vec<(f64, (i64, i64), f64)>,
    pub seminorm: f64,
}

/// Seminorm max over dyadic scales t = h, 2h, 4h, ... up to `max_scale_cells`,
/// of t^{-1/3} sup over sampled shifts |z| <= t of the L4 shift difference.
pub fn besov_seminorm_detail(
    m: &VectorField,
    window: &IndexRect,
    max_scale_cells: usize,
    directions: usize,
) -> Result<BesovDetail> {
    if window.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let mut per_scale = Vec::new();
    let mut seminorm: f64 = 0.0;
    let mut t_cells = 1usize;
    while t_cells <= max_scale_cells {
        let t = t_cells as f64 * m.spec.h;
        let weight = t.powf(-1.0 / 3.0);
        let mut best = 0.0;
        let mut best_shift = (0i64, 0i64);
        for shift in scale_shifts(t_cells, directions) {
            let v = shift_difference_l4(m, window, shift)?;
            if v > best {
                best = v;
                best_shift = shift;
            }
        }
        let scaled = weight * best;
        per_scale.push((t, best_shift, scaled));
        seminorm = seminorm.max(scaled);
        t_cells *= 2;
    }
    Ok(BesovDetail { per_scale, seminorm })
}

/// The scalar seminorm with the default 16-direction fan.
pub fn besov_seminorm(m: &VectorField, window: &IndexRect, max_scale_cells: usize) -> Result<f64> {
    Ok(besov_seminorm_detail(m, window, max_scale_cells, 16)?.seminorm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn constants_have_zero_seminorm() {
        let spec = GridSpec::unit(65).unwrap();
        let m = VectorField::from_fn(spec, |_| Vec2::new(1.0, 0.0));
        let w = IndexRect::with_margin(spec.nx, spec.ny, 20);
        assert_eq!(besov_seminorm(&m, &w, 16).unwrap(), 0.0);
    }

    #[test]
    fn jump_field_seminorm_stable_under_refinement() {
        let run = |n: usize| {
            let spec = GridSpec::unit(n).unwrap();
            let mid = spec.center().x + 0.5 * spec.h;
            let m = VectorField::from_fn(spec, |p| {
                if p.x > mid {
                    Vec2::new(0.0, 1.0)
                } else {
                    Vec2::new(0.0, -1.0)
                }
            });
            // window with a fixed physical extent, margin scales with n
            let margin = (n - 1) / 4;
            let w = IndexRect::with_margin(spec.nx, spec.ny, margin);
            // fixed physical max scale 16/64
            let t_cells = (n - 1) / 4;
            besov_seminorm(&m, &w, t_cells).unwrap()
        };
        let a = run(65);
        let b = run(129);
        assert!(a > 0.0);
        assert!(
            (a - b).abs() / a < 0.10,
            "seminorm should be stable within 10%: {a} vs {b}"
        );
    }

    #[test]
    fn smooth_field_dominated_by_large_scales() {
        let spec = GridSpec::unit(65).unwrap();
        let m = VectorField::from_fn(spec, |p| Vec2::new((2.0 * p.y).sin(), (3.0 * p.x).cos()));
        let w = IndexRect::with_margin(spec.nx, spec.ny, 18);
        let detail = besov_seminorm_detail(&m, &w, 16, 16).unwrap();
        let last = detail.per_scale.last().unwrap().2;
        assert!(detail.seminorm.is_finite());
        assert!(
            (detail.seminorm - last).abs() < 1e-12,
            "Lipschitz fields peak at the largest tested scale"
        );
    }

    #[test]
    fn empty_window_rejected() {
        let spec = GridSpec::unit(65).unwrap();
        let m = VectorField::from_fn(spec, |_| Vec2::ZERO);
        let w = IndexRect { i0: 5, i1: 5, j0: 0, j1: 10 };
        assert!(besov_seminorm(&m, &w, 8).is_err());
    }
}
