//! Entropies on the closed unit disc: the cubic pair, harmonic entropies,
//! and cutoff extensions of circle entropies, with their derivative
//! structure.

use std::sync::Arc;

use crate::angular::AngularFunction;
use crate::error::{Error, Result};
use crate::harmonic::HarmonicFunction;
use crate::jin_kohn::{jin_kohn_jacobian, jin_kohn_sigma};
use crate::vec2::{Mat2, Vec2};

/// Radial cutoff profile: vanishes on [0, 1/2] and beyond 2, equals 1 at
/// r = 1, twice differentiable.
#[derive(Clone)]
pub struct CutoffProfile {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    d1: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    d2: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for CutoffProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CutoffProfile").finish_non_exhaustive()
    }
}

impl CutoffProfile {
    /// Default profile: the C^2 polynomial bump (1 - u^2)^3 on the support
    /// [1/2, 2], u = (r - 5/4)/(3/4), scaled so the value at r = 1 is
    /// exactly 1. The cube makes value, slope and curvature vanish at both
    /// ends of the support, so the splice with zero is C^2.
    pub fn standard() -> Self {
        const Q0: f64 = 512.0 / 729.0; // (1 - 1/9)^3
        const W: f64 = 0.75;
        let u = |r: f64| (r - 1.25) / W;
        let f = move |r: f64| {
            let u = u(r);
            if u.abs() >= 1.0 {
                0.0
            } else {
                let q = 1.0 - u * u;
                q * q * q / Q0
            }
        };
        let d1 = move |r: f64| {
            let u = u(r);
            if u.abs() >= 1.0 {
                0.0
            } else {
                let q = 1.0 - u * u;
                -6.0 * u * q * q / (Q0 * W)
            }
        };
        let d2 = move |r: f64| {
            let u = u(r);
            if u.abs() >= 1.0 {
                0.0
            } else {
                let q = 1.0 - u * u;
                (-6.0 * q * q + 24.0 * u * u * q) / (Q0 * W * W)
            }
        };
        CutoffProfile {
            f: Arc::new(f),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
        }
    }

    /// Inject a custom profile; the constraints are validated by sampling.
    pub fn new(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let profile = CutoffProfile {
            f: Arc::new(f),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        if (self.eval(1.0) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidCutoff(format!(
                "profile must equal 1 at r = 1, got {}",
                self.eval(1.0)
            )));
        }
        for i in 0..=200 {
            let r = 0.5 * i as f64 / 200.0;
            if self.eval(r).abs() > 1e-12 {
                return Err(Error::InvalidCutoff(format!("profile must vanish on [0, 1/2], nonzero at r = {r}")));
            }
        }
        for i in 0..=200 {
            let r = 2.0 + 2.0 * i as f64 / 200.0;
            if self.eval(r).abs() > 1e-12 {
                return Err(Error::InvalidCutoff(format!("profile must vanish beyond 2, nonzero at r = {r}")));
            }
        }
        Ok(())
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.f)(r)
    }

    pub fn deriv(&self, r: f64) -> f64 {
        (self.d1)(r)
    }

    pub fn second_deriv(&self, r: f64) -> f64 {
        (self.d2)(r)
    }
}

/// A circle entropy given by its two components as Fourier tables.
#[derive(Clone, Debug)]
pub struct CirclePair {
    pub c1: AngularFunction,
    pub c2: AngularFunction,
    d1: AngularFunction,
    d2: AngularFunction,
}

impl CirclePair {
    pub fn new(c1: AngularFunction, c2: AngularFunction) -> Self {
        let d1 = c1.derivative();
        let d2 = c2.derivative();
        CirclePair { c1, c2, d1, d2 }
    }

    pub fn value(&self, t: f64) -> Vec2 {
        Vec2::new(self.c1.eval_real(t), self.c2.eval_real(t))
    }

    pub fn tangent_deriv(&self, t: f64) -> Vec2 {
        Vec2::new(self.d1.eval_real(t), self.d2.eval_real(t))
    }

    /// Sampled sup of |Phi| + |Phi'| + |Phi''| along the circle.
    pub fn c2_norm(&self, samples: usize) -> f64 {
        let dd1 = self.d1.derivative();
        let dd2 = self.d2.derivative();
        let mut sup: f64 = 0.0;
        for i in 0..samples {
            let t = std::f64::consts::TAU * i as f64 / samples as f64;
            let v = self.value(t).norm()
                + self.tangent_deriv(t).norm()
                + Vec2::new(dd1.eval_real(t), dd2.eval_real(t)).norm();
            sup = sup.max(v);
        }
        sup
    }
}

/// The restriction of a cubic entropy to the circle, as a Fourier table.
pub fn jin_kohn_circle_pair(j: usize) -> Result<CirclePair> {
    match j {
        1 => {
            // ((2/3) sin^3 t, (2/3) cos^3 t)
            let c1 = AngularFunction::real_harmonic(1, 0.0, 0.5)
                .add(&AngularFunction::real_harmonic(3, 0.0, -1.0 / 6.0));
            let c2 = AngularFunction::real_harmonic(1, 0.5, 0.0)
                .add(&AngularFunction::real_harmonic(3, 1.0 / 6.0, 0.0));
            Ok(CirclePair::new(c1, c2))
        }
        2 => {
            // (-cos t (1 - (2/3) cos^2 t), sin t (1 - (2/3) sin^2 t))
            let c1 = AngularFunction::real_harmonic(1, -0.5, 0.0)
                .add(&AngularFunction::real_harmonic(3, 1.0 / 6.0, 0.0));
            let c2 = AngularFunction::real_harmonic(1, 0.0, 0.5)
                .add(&AngularFunction::real_harmonic(3, 0.0, 1.0 / 6.0));
            Ok(CirclePair::new(c1, c2))
        }
        _ => Err(Error::InvalidEntropyIndex(j)),
    }
}

/// An entropy on the closed disc with evaluators for the map and its
/// derivative; the cutoff kind additionally exposes its tangential and
/// radial projections.
#[derive(Clone, Debug)]
pub enum DiscEntropy {
    JinKohn1,
    JinKohn2,
    /// Built from a real harmonic function through
    /// Phi(z) = phi(z) z + ((iz) . grad phi(z)) iz.
    Harmonic(HarmonicFunction),
    Cutoff {
        pair: CirclePair,
        eta: CutoffProfile,
    },
}

/// Reported bounds for a cutoff extension, sampled on a polar grid.
#[derive(Clone, Copy, Debug)]
pub struct CutoffBounds {
    pub gamma_sup: f64,
    pub psi_sup: f64,
    /// Finite-difference sup of |D Psi|.
    pub d_psi_sup: f64,
    /// C^2 norm of the circle entropy the bounds are measured against.
    pub phi_c2: f64,
}

impl DiscEntropy {
    pub fn harmonic(phi: HarmonicFunction) -> Result<Self> {
        if !phi.boundary().is_real() {
            return Err(Error::InvalidCutoff(
                "harmonic entropy requires a real boundary function".into(),
            ));
        }
        Ok(DiscEntropy::Harmonic(phi))
    }

    pub fn eval(&self, z: Vec2) -> Result<Vec2> {
        match self {
            DiscEntropy::JinKohn1 => jin_kohn_sigma(1, z),
            DiscEntropy::JinKohn2 => jin_kohn_sigma(2, z),
            DiscEntropy::Harmonic(phi) => {
                let jet = phi.jet3(z)?;
                let p = jet.p.re;
                let q = -z.y * jet.p1.re + z.x * jet.p2.re;
                Ok(Vec2::new(z.x * p - z.y * q, z.y * p + z.x * q))
            }
            DiscEntropy::Cutoff { pair, eta } => {
                let r = z.norm();
                if r <= 0.5 {
                    return Ok(Vec2::ZERO);
                }
                let t = z.angle();
                Ok(eta.eval(r) * pair.value(t))
            }
        }
    }

    pub fn jacobian(&self, z: Vec2) -> Result<Mat2> {
        match self {
            DiscEntropy::JinKohn1 => jin_kohn_jacobian(1, z),
            DiscEntropy::JinKohn2 => jin_kohn_jacobian(2, z),
            DiscEntropy::Harmonic(phi) => {
                let jet = phi.jet3(z)?;
                let (p, p1, p2) = (jet.p.re, jet.p1.re, jet.p2.re);
                let (p11, p12, p22) = (jet.p11.re, jet.p12.re, jet.p22.re);
                let q = -z.y * p1 + z.x * p2;
                let q1 = -z.y * p11 + p2 + z.x * p12;
                let q2 = -p1 - z.y * p12 + z.x * p22;
                Ok(Mat2::new(
                    p + z.x * p1 - z.y * q1,
                    z.x * p2 - q - z.y * q2,
                    z.y * p1 + q + z.x * q1,
                    p + z.y * p2 + z.x * q2,
                ))
            }
            DiscEntropy::Cutoff { pair, eta } => {
                let r = z.norm();
                if r <= 0.5 {
                    return Ok(Mat2::default());
                }
                let t = z.angle();
                let g = pair.value(t);
                let gp = pair.tangent_deriv(t);
                let er = eta.eval(r);
                let der = eta.deriv(r);
                // d_k = eta'(r) z_k / r * G + eta(r) G' * d_k t,
                // with d1 t = -z2 / r^2, d2 t = z1 / r^2.
                let r2 = r * r;
                Ok(Mat2::new(
                    der * z.x / r * g.x + er * gp.x * (-z.y / r2),
                    der * z.y / r * g.x + er * gp.x * (z.x / r2),
                    der * z.x / r * g.y + er * gp.y * (-z.y / r2),
                    der * z.y / r * g.y + er * gp.y * (z.x / r2),
                ))
            }
        }
    }

    /// Value on the circle at angle t.
    pub fn circle_value(&self, t: f64) -> Vec2 {
        self.eval(Vec2::unit_at_angle(t)).expect("circle point is inside the closed disc")
    }

    /// Max over sampled angles of |e^{it} . (d/dt) Phi(e^{it})|; this is the
    /// defining property of an entropy and should vanish to round-off.
    pub fn entropy_condition_residual(&self, samples: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..samples {
            let t = std::f64::consts::TAU * i as f64 / samples as f64;
            let e = Vec2::unit_at_angle(t);
            let d = self.jacobian(e).expect("circle point").apply(e.perp());
            worst = worst.max(e.dot(d).abs());
        }
        worst
    }

    /// Sampled C^2 norm of the restriction to the circle. The second
    /// tangential derivative uses a centered difference of the analytic
    /// first derivative.
    pub fn c2_norm_on_circle(&self, samples: usize) -> f64 {
        let dt = std::f64::consts::TAU / samples as f64;
        let tangent = |t: f64| {
            let e = Vec2::unit_at_angle(t);
            self.jacobian(e).expect("circle point").apply(e.perp())
        };
        let mut sup: f64 = 0.0;
        for i in 0..samples {
            let t = dt * i as f64;
            let second = (tangent(t + dt) - tangent(t - dt)) * (0.5 / dt);
            let v = self.circle_value(t).norm() + tangent(t).norm() + second.norm();
            sup = sup.max(v);
        }
        sup
    }

    /// Tangential projection gamma of the derivative of a cutoff extension.
    pub fn gamma(&self, z: Vec2) -> Result<f64> {
        match self {
            DiscEntropy::Cutoff { .. } => {
                let r2 = z.norm_sq();
                if r2 <= 0.25 {
                    return Ok(0.0);
                }
                let d = self.jacobian(z)?;
                Ok(z.perp().dot(d.apply(z.perp())) / r2)
            }
            _ => Err(Error::InvalidCutoff("gamma is defined for cutoff extensions".into())),
        }
    }

    /// Radial factor Psi of the derivative of a cutoff extension:
    /// D Phi(z) = -2 Psi(z) (x) z + gamma(z) Id.
    pub fn psi_vec(&self, z: Vec2) -> Result<Vec2> {
        match self {
            DiscEntropy::Cutoff { .. } => {
                let r2 = z.norm_sq();
                if r2 <= 0.25 {
                    return Ok(Vec2::ZERO);
                }
                let d = self.jacobian(z)?;
                let gamma = z.perp().dot(d.apply(z.perp())) / r2;
                Ok((gamma * z - d.apply(z)) * (0.5 / r2))
            }
            _ => Err(Error::InvalidCutoff("psi is defined for cutoff extensions".into())),
        }
    }
}

/// Extend a circle entropy to the plane by the radial cutoff:
/// Phi(z) = eta(|z|) Phi(z/|z|). Returns the extension together with
/// sampled bounds on gamma, Psi and D Psi, which scale with the C^2 norm
/// of the circle entropy.
pub fn cutoff_extension(c1: AngularFunction, c2: AngularFunction, eta: CutoffProfile) -> Result<(DiscEntropy, CutoffBounds)> {
    eta.validate()?;
    if !c1.is_real() || !c2.is_real() {
        return Err(Error::InvalidCutoff("circle entropy components must be real".into()));
    }
    let pair = CirclePair::new(c1, c2);
    let phi_c2 = pair.c2_norm(1024);
    let entropy = DiscEntropy::Cutoff { pair, eta };

    let mut gamma_sup: f64 = 0.0;
    let mut psi_sup: f64 = 0.0;
    let mut d_psi_sup: f64 = 0.0;
    let fd = 1e-5;
    for ir in 0..40 {
        let r = 0.3 + 1.8 * ir as f64 / 39.0;
        for it in 0..64 {
            let t = std::f64::consts::TAU * it as f64 / 64.0;
            let z = Vec2::unit_at_angle(t) * r;
            gamma_sup = gamma_sup.max(entropy.gamma(z)?.abs());
            psi_sup = psi_sup.max(entropy.psi_vec(z)?.norm());
            let px = (entropy.psi_vec(z + Vec2::new(fd, 0.0))? - entropy.psi_vec(z - Vec2::new(fd, 0.0))?) * (0.5 / fd);
            let py = (entropy.psi_vec(z + Vec2::new(0.0, fd))? - entropy.psi_vec(z - Vec2::new(0.0, fd))?) * (0.5 / fd);
            d_psi_sup = d_psi_sup.max(Mat2::new(px.x, py.x, px.y, py.y).norm());
        }
    }
    Ok((
        entropy,
        CutoffBounds {
            gamma_sup,
            psi_sup,
            d_psi_sup,
            phi_c2,
        },
    ))
}
