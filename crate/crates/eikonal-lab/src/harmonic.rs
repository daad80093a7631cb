//! Harmonic extension of circle functions to the closed unit disc, with
//! closed-form derivatives, and the pointwise quantities built from them.
//!
//! Each Fourier mode extends by r^|k| e^{ik theta}: z^k for k >= 0 and
//! conj(z)^|k| for k < 0. All derivatives are taken mode-wise in closed
//! form; no finite differences enter here, the third-order expressions
//! below would drown in stencil noise otherwise.

use num_complex::Complex64;

use crate::angular::AngularFunction;
use crate::error::{Error, Result};
use crate::vec2::Vec2;

const DISC_TOL: f64 = 1e-12;

/// Harmonic function on the closed disc, determined by its boundary trace.
#[derive(Clone, Debug)]
pub struct HarmonicFunction {
    boundary: AngularFunction,
}

/// Value and partial derivatives up to third order at a point.
#[derive(Clone, Copy, Debug, Default)]
pub struct Jet3 {
    pub p: Complex64,
    pub p1: Complex64,
    pub p2: Complex64,
    pub p11: Complex64,
    pub p12: Complex64,
    pub p22: Complex64,
    pub p111: Complex64,
    pub p112: Complex64,
    pub p122: Complex64,
    pub p222: Complex64,
}

fn falling(k: usize, m: usize) -> f64 {
    let mut acc = 1.0;
    for j in 0..m {
        acc *= (k - j) as f64;
    }
    acc
}

// i^b for b = 0..3
const I_POW: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

impl HarmonicFunction {
    pub fn new(boundary: AngularFunction) -> Self {
        HarmonicFunction { boundary }
    }

    /// Extension of the single mode e^{ik theta}.
    pub fn from_mode(k: i64) -> Self {
        HarmonicFunction::new(AngularFunction::mode(k))
    }

    pub fn boundary(&self) -> &AngularFunction {
        &self.boundary
    }

    fn check_in_disc(z: Vec2) -> Result<()> {
        let r = z.norm();
        if r > 1.0 + DISC_TOL {
            return Err(Error::OutsideDisc(r));
        }
        Ok(())
    }

    /// Value at a point of the closed disc.
    pub fn eval(&self, z: Vec2) -> Result<Complex64> {
        Self::check_in_disc(z)?;
        Ok(self.jet3_unchecked(z).p)
    }

    pub fn jet3(&self, z: Vec2) -> Result<Jet3> {
        Self::check_in_disc(z)?;
        Ok(self.jet3_unchecked(z))
    }

    pub fn jet3_unchecked(&self, z: Vec2) -> Jet3 {
        let k_max = self.boundary.k_max();
        let zc = Complex64::new(z.x, z.y);
        // zp[j] = z^j
        let mut zp = Vec::with_capacity(k_max + 1);
        let mut acc = Complex64::new(1.0, 0.0);
        for _ in 0..=k_max {
            zp.push(acc);
            acc *= zc;
        }

        let mut jet = Jet3::default();
        for (k, c) in self.boundary.modes() {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let n = k.unsigned_abs() as usize;
            if k >= 0 {
                // d1^a d2^b z^n = falling(n, a+b) i^b z^{n-a-b}
                let term = |a: usize, b: usize| -> Complex64 {
                    let m = a + b;
                    if n < m {
                        Complex64::new(0.0, 0.0)
                    } else {
                        c * falling(n, m) * I_POW[b] * zp[n - m]
                    }
                };
                jet.p += term(0, 0);
                jet.p1 += term(1, 0);
                jet.p2 += term(0, 1);
                jet.p11 += term(2, 0);
                jet.p12 += term(1, 1);
                jet.p22 += term(0, 2);
                jet.p111 += term(3, 0);
                jet.p112 += term(2, 1);
                jet.p122 += term(1, 2);
                jet.p222 += term(0, 3);
            } else {
                // d1^a d2^b conj(z)^n = falling(n, a+b) (-i)^b conj(z)^{n-a-b}
                let term = |a: usize, b: usize| -> Complex64 {
                    let m = a + b;
                    if n < m {
                        Complex64::new(0.0, 0.0)
                    } else {
                        c * falling(n, m) * I_POW[b].conj() * zp[n - m].conj()
                    }
                };
                jet.p += term(0, 0);
                jet.p1 += term(1, 0);
                jet.p2 += term(0, 1);
                jet.p11 += term(2, 0);
                jet.p12 += term(1, 1);
                jet.p22 += term(0, 2);
                jet.p111 += term(3, 0);
                jet.p112 += term(2, 1);
                jet.p122 += term(1, 2);
                jet.p222 += term(0, 3);
            }
        }
        jet
    }
}

/// Mode-wise harmonic extension evaluated at a point: sum c_k r^|k| e^{ik theta}.
pub fn harmonic_extend(psi: &AngularFunction, z: Vec2) -> Result<Complex64> {
    HarmonicFunction::new(psi.clone()).eval(z)
}

/// The scalar third-order expression attached to a harmonic function,
/// whose restriction to the circle realizes the Fourier multiplier
/// (|k|^3 - 2k^2 - |k| + 2)/2.
pub fn a_value(jet: &Jet3, z: Vec2) -> Complex64 {
    let z1 = z.x;
    let z2 = z.y;
    jet.p - z1 * jet.p1 - z2 * jet.p2
        + z1 * z2 * (jet.p12 - z2 * jet.p111 + z1 * jet.p112)
        + 0.5 * (z1 * z1 - z2 * z2) * (jet.p11 + z2 * jet.p112 + z1 * jet.p111)
}

/// Vector coefficient multiplying the gradient of (|w|^2 - 1) in the
/// harmonic entropy divergence identity.
pub fn b_value(jet: &Jet3, z: Vec2) -> (Complex64, Complex64) {
    let z1 = z.x;
    let z2 = z.y;
    let b1 = jet.p1 + 0.5 * z2 * jet.p12 - 0.5 * z1 * jet.p22;
    let b2 = jet.p2 - 0.5 * z2 * jet.p11 + 0.5 * z1 * jet.p12;
    (b1, b2)
}

/// Partials of the first component of `b_value` with respect to z,
/// (d1 B1, d2 B1); the remaining partials follow from harmonicity
/// (d1 B1 + d2 B2 = 0 and d2 B1 = d1 B2).
pub fn db1_value(jet: &Jet3, z: Vec2) -> (Complex64, Complex64) {
    let z1 = z.x;
    let z2 = z.y;
    let d1b1 = jet.p11 + 0.5 * z2 * jet.p112 - 0.5 * jet.p22 - 0.5 * z1 * jet.p122;
    let d2b1 = 1.5 * jet.p12 + 0.5 * z2 * jet.p122 - 0.5 * z1 * jet.p222;
    (d1b1, d2b1)
}

/// A-expression at a point of the closed disc (errors outside).
pub fn a_phi(phi: &HarmonicFunction, z: Vec2) -> Result<Complex64> {
    Ok(a_value(&phi.jet3(z)?, z))
}

/// B-expression at a point of the closed disc, as a real vector for a
/// real harmonic function; complex parts are returned as a pair.
pub fn b_phi(phi: &HarmonicFunction, z: Vec2) -> Result<(Complex64, Complex64)> {
    Ok(b_value(&phi.jet3(z)?, z))
}
