//! Functions on the unit circle stored as truncated Fourier series,
//! and the two multiplier operators acting on them.

use num_complex::Complex64;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// A function on the circle, psi(theta) = sum over |k| <= k_max of c_k e^{ik theta}.
///
/// Real-valued functions carry the conjugate symmetry c_{-k} = conj(c_k);
/// the `real` flag is derived from the coefficients, never trusted blindly.
#[derive(Clone, Debug)]
pub struct AngularFunction {
    /// Coefficients for k = -k_max ..= k_max, stored in that order.
    coeffs: Vec<Complex64>,
    k_max: usize,
}

pub const REAL_SYMMETRY_TOL: f64 = 1e-14;

impl AngularFunction {
    pub fn zero(k_max: usize) -> Self {
        AngularFunction {
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * k_max + 1],
            k_max,
        }
    }

    pub fn from_coeffs(k_max: usize, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), 2 * k_max + 1, "coefficient table size mismatch");
        AngularFunction { coeffs, k_max }
    }

    /// The single mode e^{ik theta}.
    pub fn mode(k: i64) -> Self {
        let k_max = k.unsigned_abs() as usize;
        let mut f = AngularFunction::zero(k_max);
        f.set(k, Complex64::new(1.0, 0.0));
        f
    }

    /// Real combination a cos(k theta) + b sin(k theta).
    pub fn real_harmonic(k: u32, a: f64, b: f64) -> Self {
        let mut f = AngularFunction::zero(k as usize);
        if k == 0 {
            f.set(0, Complex64::new(a, 0.0));
        } else {
            f.set(k as i64, Complex64::new(a / 2.0, -b / 2.0));
            f.set(-(k as i64), Complex64::new(a / 2.0, b / 2.0));
        }
        f
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.k_max {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + self.k_max as i64) as usize]
        }
    }

    pub fn set(&mut self, k: i64, c: Complex64) {
        assert!(k.unsigned_abs() as usize <= self.k_max, "mode outside truncation band");
        self.coeffs[(k + self.k_max as i64) as usize] = c;
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let k_max = self.k_max as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - k_max, c))
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        // Walk modes k = -k_max..=k_max with a running power of e^{i theta}.
        let rot = Complex64::from_polar(1.0, theta);
        let mut phase = Complex64::from_polar(1.0, -(self.k_max as f64) * theta);
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in &self.coeffs {
            acc += c * phase;
            phase *= rot;
        }
        acc
    }

    pub fn eval_real(&self, theta: f64) -> f64 {
        self.eval(theta).re
    }

    /// Whether the coefficients carry the conjugate symmetry of a real function.
    pub fn is_real(&self) -> bool {
        self.real_symmetry_defect() <= REAL_SYMMETRY_TOL
    }

    pub fn real_symmetry_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for k in 0..=self.k_max as i64 {
            defect = defect.max((self.coeff(-k) - self.coeff(k).conj()).norm());
        }
        defect
    }

    /// Mean of |psi|^2 over the circle; equals the coefficient l2 mass (Parseval).
    pub fn mean_square(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Angular derivative: c_k -> i k c_k.
    pub fn derivative(&self) -> Self {
        let mut out = self.clone();
        for k in -(self.k_max as i64)..=(self.k_max as i64) {
            out.set(k, Complex64::new(0.0, k as f64) * self.coeff(k));
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= s;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let k_max = self.k_max.max(other.k_max);
        let mut out = AngularFunction::zero(k_max);
        for k in -(k_max as i64)..=(k_max as i64) {
            out.set(k, self.coeff(k) + other.coeff(k));
        }
        out
    }

    /// Sampled sup of |psi| + |psi'| + |psi''| over the circle.
    pub fn c2_norm(&self, samples: usize) -> f64 {
        let d1 = self.derivative();
        let d2 = d1.derivative();
        let mut sup: f64 = 0.0;
        for i in 0..samples {
            let t = 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
            let v = self.eval(t).norm() + d1.eval(t).norm() + d2.eval(t).norm();
            sup = sup.max(v);
        }
        sup
    }

    /// Plain-text serialization, one line per mode: "k re(c_k) im(c_k)".
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (k, c) in self.modes() {
            writeln!(w, "{} {:.17e} {:.17e}", k, c.re, c.im)?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R, path: &str) -> Result<Self> {
        let mut entries: Vec<(i64, Complex64)> = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let parse_fail = |msg: &str| Error::Parse {
                path: path.to_string(),
                line: lineno + 1,
                msg: msg.to_string(),
            };
            let k: i64 = parts
                .next()
                .ok_or_else(|| parse_fail("missing mode index"))?
                .parse()
                .map_err(|_| parse_fail("bad mode index"))?;
            let re: f64 = parts
                .next()
                .ok_or_else(|| parse_fail("missing real part"))?
                .parse()
                .map_err(|_| parse_fail("bad real part"))?;
            let im: f64 = parts
                .next()
                .ok_or_else(|| parse_fail("missing imaginary part"))?
                .parse()
                .map_err(|_| parse_fail("bad imaginary part"))?;
            entries.push((k, Complex64::new(re, im)));
        }
        let k_max = entries.iter().map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        let mut f = AngularFunction::zero(k_max);
        for (k, c) in entries {
            f.set(k, c);
        }
        Ok(f)
    }
}

/// The multiplier coefficient (|k|^3 - 2k^2 - |k| + 2) / 2.
pub fn multiplier_coefficient(k: i64) -> f64 {
    let a = k.unsigned_abs() as f64;
    (a * a * a - 2.0 * a * a - a + 2.0) / 2.0
}

/// Coefficient-wise action c_k -> ((|k|^3 - 2k^2 - |k| + 2)/2) c_k.
/// Real input gives real output since the coefficient is even in k.
pub fn multiplier_a(psi: &AngularFunction) -> AngularFunction {
    let mut out = psi.clone();
    for k in -(psi.k_max() as i64)..=(psi.k_max() as i64) {
        out.set(k, psi.coeff(k) * multiplier_coefficient(k));
    }
    out
}

/// Splitting components: `multiplier_a0` is |k|^3, `multiplier_a1` is 2 - 2k^2 - |k|.
pub fn multiplier_a0(psi: &AngularFunction) -> AngularFunction {
    let mut out = psi.clone();
    for k in -(psi.k_max() as i64)..=(psi.k_max() as i64) {
        let a = k.unsigned_abs() as f64;
        out.set(k, psi.coeff(k) * (a * a * a));
    }
    out
}

pub fn multiplier_a1(psi: &AngularFunction) -> AngularFunction {
    let mut out = psi.clone();
    for k in -(psi.k_max() as i64)..=(psi.k_max() as i64) {
        let a = k.unsigned_abs() as f64;
        out.set(k, psi.coeff(k) * (2.0 - 2.0 * a * a - a));
    }
    out
}

/// Hilbert transform on the circle: c_0 -> 0, c_k -> -i sign(k) c_k.
pub fn hilbert_transform(psi: &AngularFunction) -> AngularFunction {
    let mut out = psi.clone();
    for k in -(psi.k_max() as i64)..=(psi.k_max() as i64) {
        let s = match k.cmp(&0) {
            std::cmp::Ordering::Greater => Complex64::new(0.0, -1.0),
            std::cmp::Ordering::Less => Complex64::new(0.0, 1.0),
            std::cmp::Ordering::Equal => Complex64::new(0.0, 0.0),
        };
        out.set(k, psi.coeff(k) * s);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_evaluation() {
        let f = AngularFunction::mode(3);
        let t = 0.7;
        let v = f.eval(t);
        assert!((v - Complex64::from_polar(1.0, 3.0 * t)).norm() < 1e-14);
    }

    #[test]
    fn real_harmonic_is_real() {
        let f = AngularFunction::real_harmonic(4, 0.3, -1.2);
        assert!(f.is_real());
        let t = 2.1;
        assert!((f.eval_real(t) - (0.3 * (4.0 * t).cos() - 1.2 * (4.0 * t).sin())).abs() < 1e-14);
        assert!(f.eval(t).im.abs() < 1e-15);
    }

    #[test]
    fn multiplier_band_values() {
        // (|k|^3 - 2k^2 - |k| + 2)/2 at k = 0..3: 1, 0, 0, 4.
        assert_eq!(multiplier_coefficient(0), 1.0);
        assert_eq!(multiplier_coefficient(1), 0.0);
        assert_eq!(multiplier_coefficient(2), 0.0);
        assert_eq!(multiplier_coefficient(3), 4.0);
        assert_eq!(multiplier_coefficient(-3), 4.0);
    }

    #[test]
    fn multiplier_kills_low_modes() {
        let psi = AngularFunction::mode(1);
        assert!(multiplier_a(&psi).mean_square() == 0.0);
        let psi = AngularFunction::mode(2);
        assert!(multiplier_a(&psi).mean_square() == 0.0);
        let psi = AngularFunction::mode(3);
        let out = multiplier_a(&psi);
        assert!((out.coeff(3) - Complex64::new(4.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hilbert_sin_to_minus_cos() {
        for k in 1..=8u32 {
            let sin_k = AngularFunction::real_harmonic(k, 0.0, 1.0);
            let h = hilbert_transform(&sin_k);
            for i in 0..64 {
                let t = 2.0 * std::f64::consts::PI * i as f64 / 64.0;
                assert!(
                    (h.eval_real(t) + (k as f64 * t).cos()).abs() < 1e-13,
                    "H sin(k t) should be -cos(k t)"
                );
                assert!(h.eval(t).im.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn hilbert_annihilates_mean_and_squares_to_minus_identity() {
        let mut psi = AngularFunction::zero(5);
        psi.set(0, Complex64::new(2.0, 0.0));
        psi.set(1, Complex64::new(0.5, -0.25));
        psi.set(-1, Complex64::new(0.5, 0.25));
        psi.set(5, Complex64::new(-0.1, 0.7));
        psi.set(-5, Complex64::new(-0.1, -0.7));
        let h = hilbert_transform(&psi);
        assert_eq!(h.coeff(0), Complex64::new(0.0, 0.0));
        let hh = hilbert_transform(&h);
        for k in -5i64..=5 {
            let expect = if k == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                -psi.coeff(k)
            };
            assert!((hh.coeff(k) - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn hilbert_of_hilbert_of_cos() {
        let cos1 = AngularFunction::real_harmonic(1, 1.0, 0.0);
        let hh = hilbert_transform(&hilbert_transform(&cos1));
        for i in 0..32 {
            let t = 2.0 * std::f64::consts::PI * i as f64 / 32.0;
            assert!((hh.eval_real(t) + t.cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn serialization_roundtrip() {
        let mut psi = AngularFunction::zero(3);
        psi.set(-3, Complex64::new(0.25, -1.5));
        psi.set(2, Complex64::new(-0.75, 0.125));
        let mut buf = Vec::new();
        psi.write_to(&mut buf).unwrap();
        let back = AngularFunction::read_from(buf.as_slice(), "<mem>").unwrap();
        assert_eq!(back.k_max(), 3);
        for k in -3i64..=3 {
            assert_eq!(back.coeff(k), psi.coeff(k));
        }
    }

    #[test]
    fn parse_error_reports_line() {
        let text = "0 1.0 0.0\n1 not-a-number 0.0\n";
        let err = AngularFunction::read_from(text.as_bytes(), "psi.txt").unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("psi.txt:2"), "got: {msg}");
    }
}
