//! The cubic entropy pair of Jin and Kohn, and the matrix family they
//! generate on the circle.

use crate::error::{Error, Result};
use crate::vec2::{Mat2, Vec2};

/// First entropy: (v2 (1 - v1^2 - v2^2/3), v1 (1 - v2^2 - v1^2/3)).
pub fn sigma1(v: Vec2) -> Vec2 {
    Vec2::new(
        v.y * (1.0 - v.x * v.x - v.y * v.y / 3.0),
        v.x * (1.0 - v.y * v.y - v.x * v.x / 3.0),
    )
}

/// Second entropy: (-v1 (1 - 2 v1^2/3), v2 (1 - 2 v2^2/3)).
pub fn sigma2(v: Vec2) -> Vec2 {
    Vec2::new(
        -v.x * (1.0 - 2.0 * v.x * v.x / 3.0),
        v.y * (1.0 - 2.0 * v.y * v.y / 3.0),
    )
}

/// Entropy by 1-based index.
pub fn jin_kohn_sigma(j: usize, v: Vec2) -> Result<Vec2> {
    match j {
        1 => Ok(sigma1(v)),
        2 => Ok(sigma2(v)),
        _ => Err(Error::InvalidEntropyIndex(j)),
    }
}

/// Jacobian of sigma_j.
pub fn jin_kohn_jacobian(j: usize, v: Vec2) -> Result<Mat2> {
    match j {
        1 => Ok(Mat2::new(
            -2.0 * v.x * v.y,
            1.0 - v.x * v.x - v.y * v.y,
            1.0 - v.x * v.x - v.y * v.y,
            -2.0 * v.x * v.y,
        )),
        2 => Ok(Mat2::new(
            -1.0 + 2.0 * v.x * v.x,
            0.0,
            0.0,
            1.0 - 2.0 * v.y * v.y,
        )),
        _ => Err(Error::InvalidEntropyIndex(j)),
    }
}

/// Residual of the quarter-turn relation sigma2(v) = R_{pi/4} sigma1(R_{-pi/4} v).
pub fn rotation_relation_residual(v: Vec2) -> f64 {
    let q = std::f64::consts::FRAC_PI_4;
    (sigma2(v) - sigma1(v.rotate(-q)).rotate(q)).norm()
}

/// A 2x2 matrix on (or near) the one-parameter family K; when `theta` is
/// present the entries are exactly the parameterized matrix.
#[derive(Clone, Copy, Debug)]
pub struct KMatrix {
    pub entries: Mat2,
    pub theta: Option<f64>,
}

/// Reduce an angle to [0, 2 pi); values landing on 2 pi map to 0.
pub fn reduce_angle(theta: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let r = theta - tau * (theta / tau).floor();
    if r >= tau {
        0.0
    } else {
        r
    }
}

/// The matrix with rows (i sigma1(e^{i theta}), i sigma2(e^{i theta})).
pub fn p_matrix(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    Mat2::new(
        -2.0 / 3.0 * c * c * c,
        2.0 / 3.0 * s * s * s,
        -s * (1.0 - 2.0 / 3.0 * s * s),
        -c * (1.0 - 2.0 / 3.0 * c * c),
    )
}

/// First derivative of `p_matrix` in theta.
pub fn p_matrix_d1(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    Mat2::new(
        2.0 * c * c * s,
        2.0 * s * s * c,
        -c + 2.0 * s * s * c,
        s - 2.0 * c * c * s,
    )
}

/// Second derivative of `p_matrix` in theta.
pub fn p_matrix_d2(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    Mat2::new(
        2.0 * c * c * c - 4.0 * c * s * s,
        4.0 * s * c * c - 2.0 * s * s * s,
        s + 4.0 * s * c * c - 2.0 * s * s * s,
        c + 4.0 * c * s * s - 2.0 * c * c * c,
    )
}

pub fn p_of_theta(theta: f64) -> KMatrix {
    let theta = reduce_angle(theta);
    KMatrix {
        entries: p_matrix(theta),
        theta: Some(theta),
    }
}

impl KMatrix {
    /// Serialized form: the four entries row-major.
    pub fn row_major(&self) -> [f64; 4] {
        [self.entries.a, self.entries.b, self.entries.c, self.entries.d]
    }

    pub fn from_row_major(v: [f64; 4]) -> Self {
        KMatrix {
            entries: Mat2::new(v[0], v[1], v[2], v[3]),
            theta: None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CoercivityScan {
    /// Sampled minimum of det(P(a) - P(b)) / |P(a) - P(b)|^4.
    pub c0: f64,
    /// Minimizing angle pair.
    pub argmin: (f64, f64),
    pub skipped_pairs: usize,
}

/// Brute-force scan of the quartic coercivity ratio over an equispaced
/// angle grid. Pairs with |P(a) - P(b)| < 1e-9 are skipped; the ratio
/// approaches a finite limit on the diagonal but the quotient itself is
/// numerically unstable there.
pub fn coercivity_scan(n_samples: usize) -> Result<CoercivityScan> {
    if n_samples < 8 {
        return Err(Error::GridTooSmall(format!(
            "coercivity scan needs at least 8 samples, got {n_samples}"
        )));
    }
    let tau = std::f64::consts::TAU;
    let angles: Vec<f64> = (0..n_samples).map(|i| tau * i as f64 / n_samples as f64).collect();
    let mats: Vec<Mat2> = angles.iter().map(|&t| p_matrix(t)).collect();

    let row = |i: usize| -> (f64, (f64, f64), usize) {
        let mut best = f64::INFINITY;
        let mut arg = (0.0, 0.0);
        let mut skipped = 0usize;
        for j in (i + 1)..n_samples {
            let d = mats[i] - mats[j];
            let norm = d.norm();
            if norm < 1e-9 {
                skipped += 1;
                continue;
            }
            let ratio = d.det() / (norm * norm * norm * norm);
            if ratio < best {
                best = ratio;
                arg = (angles[i], angles[j]);
            }
        }
        (best, arg, skipped)
    };

    #[cfg(feature = "parallel")]
    let rows: Vec<_> = {
        use rayon::prelude::*;
        (0..n_samples).into_par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<_> = (0..n_samples).map(row).collect();

    let mut best = f64::INFINITY;
    let mut arg = (0.0, 0.0);
    let mut skipped = 0usize;
    for (b, a, s) in rows {
        skipped += s;
        if b < best {
            best = b;
            arg = a;
        }
    }
    Ok(CoercivityScan {
        c0: best,
        argmin: arg,
        skipped_pairs: skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_hand_values() {
        let v = Vec2::new(1.0, 0.0);
        let s1 = jin_kohn_sigma(1, v).unwrap();
        assert!((s1 - Vec2::new(0.0, 2.0 / 3.0)).norm() < 1e-15);
        let s2 = jin_kohn_sigma(2, v).unwrap();
        assert!((s2 - Vec2::new(-1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert_eq!(jin_kohn_sigma(1, Vec2::ZERO).unwrap(), Vec2::ZERO);
        assert!(jin_kohn_sigma(3, v).is_err());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let v = Vec2::new(0.4, -0.8);
        let h = 1e-6;
        for j in 1..=2 {
            let jac = jin_kohn_jacobian(j, v).unwrap();
            let f = |v: Vec2| jin_kohn_sigma(j, v).unwrap();
            let d1 = (f(v + Vec2::new(h, 0.0)) - f(v - Vec2::new(h, 0.0))) * (0.5 / h);
            let d2 = (f(v + Vec2::new(0.0, h)) - f(v - Vec2::new(0.0, h))) * (0.5 / h);
            assert!((jac.a - d1.x).abs() < 1e-8);
            assert!((jac.c - d1.y).abs() < 1e-8);
            assert!((jac.b - d2.x).abs() < 1e-8);
            assert!((jac.d - d2.y).abs() < 1e-8);
        }
    }

    #[test]
    fn rotation_relation() {
        assert!(rotation_relation_residual(Vec2::new(1.0, 0.0)) < 1e-12);
        assert_eq!(rotation_relation_residual(Vec2::ZERO), 0.0);
        assert!(rotation_relation_residual(Vec2::new(0.3, -0.7)) < 1e-12);
        // stays tight on the |v| <= 2 ball
        for i in 0..64 {
            let t = 0.37 * i as f64;
            let v = Vec2::unit_at_angle(t) * (2.0 * ((i % 7) as f64 / 6.0));
            assert!(rotation_relation_residual(v) < 1e-12);
        }
    }

    #[test]
    fn p_matrix_hand_values() {
        let p0 = p_of_theta(0.0);
        let expect = Mat2::new(-2.0 / 3.0, 0.0, 0.0, -1.0 / 3.0);
        assert!((p0.entries - expect).norm() < 1e-15);

        let p = p_of_theta(std::f64::consts::FRAC_PI_2);
        let expect = Mat2::new(0.0, 2.0 / 3.0, -1.0 / 3.0, 0.0);
        assert!((p.entries - expect).norm() < 1e-15);
    }

    #[test]
    fn p_matrix_periodic() {
        let t = 1.234;
        let a = p_of_theta(t);
        let b = p_of_theta(t + std::f64::consts::TAU);
        assert!((a.entries - b.entries).norm() < 1e-13);
        assert_eq!(reduce_angle(std::f64::consts::TAU), 0.0);
    }

    #[test]
    fn p_rows_are_rotated_entropies() {
        for i in 0..97 {
            let t = std::f64::consts::TAU * i as f64 / 97.0;
            let m = p_matrix(t);
            let e = Vec2::unit_at_angle(t);
            assert!((m.row(0) - sigma1(e).perp()).norm() < 1e-14);
            assert!((m.row(1) - sigma2(e).perp()).norm() < 1e-14);
        }
    }

    #[test]
    fn p_derivatives_match_finite_differences() {
        let t = 0.83;
        let h = 1e-5;
        let fd1 = (p_matrix(t + h) - p_matrix(t - h)) * (0.5 / h);
        assert!((fd1 - p_matrix_d1(t)).norm() < 1e-8);
        let fd2 = (p_matrix(t + h) + p_matrix(t - h) + p_matrix(t) * -2.0) * (1.0 / (h * h));
        assert!((fd2 - p_matrix_d2(t)).norm() < 1e-4);
    }

    #[test]
    fn tangent_directions_are_degenerate() {
        // det P'(theta) = 0 identically: the family is not elliptic.
        for i in 0..32 {
            let t = std::f64::consts::TAU * i as f64 / 32.0;
            assert!(p_matrix_d1(t).det().abs() < 1e-14);
        }
    }

    #[test]
    fn row_major_roundtrip() {
        let k = p_of_theta(0.4);
        let back = KMatrix::from_row_major(k.row_major());
        assert_eq!(back.entries, k.entries);
        assert!(back.theta.is_none());
    }

    #[test]
    fn coercivity_scan_positive_and_monotone() {
        let c64 = coercivity_scan(64).unwrap();
        let c256 = coercivity_scan(256).unwrap();
        assert!(c64.c0 > 0.0);
        assert!(c256.c0 > 0.0);
        // 64 divides 256, so the coarse angle set is nested in the fine one
        assert!(c256.c0 <= c64.c0 + 1e-15);
        assert!(c64.c0.is_finite() && c256.c0.is_finite());
        assert!(coercivity_scan(4).is_err());
    }
}
