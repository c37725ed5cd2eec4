//! Structured-beam vector potentials near the optical axis.
//!
//! Every beam is stored as a complex envelope `Ã(r)` and the physical field is
//! `A(r, t) = Re[Ã(r) e^{-iωt}]`. Near the axis all supported beams are sums of
//! monomials `c · wᵃ w̄ᵇ · e^{i q_z z} · v` with `w = x + iy`, which makes the
//! field and its exact gradient cheap to evaluate in Cartesian coordinates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::units::SPEED_OF_LIGHT;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];
pub type CVec3 = [Complex64; 3];
pub type CMat3 = [[Complex64; 3]; 3];

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BeamKind {
    VortexParallel,
    VortexAntiparallel,
    Azimuthal,
    Radial,
    Skyrmion,
    UniformCircular,
}

impl BeamKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "vortex-parallel" => BeamKind::VortexParallel,
            "vortex-antiparallel" => BeamKind::VortexAntiparallel,
            "azimuthal" | "avb" => BeamKind::Azimuthal,
            "radial" | "rvb" => BeamKind::Radial,
            "skyrmion" => BeamKind::Skyrmion,
            "uniform-circular" => BeamKind::UniformCircular,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            BeamKind::VortexParallel => "vortex-parallel",
            BeamKind::VortexAntiparallel => "vortex-antiparallel",
            BeamKind::Azimuthal => "azimuthal",
            BeamKind::Radial => "radial",
            BeamKind::Skyrmion => "skyrmion",
            BeamKind::UniformCircular => "uniform-circular",
        }
    }
}

/// Truncation order of the radial-beam profiles `F_0`, `F_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadialOrder {
    /// `F_0 = 1`, `F_1 = q⊥ρ`.
    First,
    /// `F_0 = 1 - (q⊥ρ)²/4`, `F_1 = q⊥ρ - (q⊥ρ)³/8`.
    Third,
}

/// What to do when a point lies outside the near-axis validity disc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValidityPolicy {
    Hard,
    Soft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec {
    pub kind: BeamKind,
    /// Vector-potential amplitude (a.u.).
    pub a0: f64,
    /// Angular frequency (a.u.).
    pub omega: f64,
    pub q_perp: f64,
    pub q_z: f64,
    /// Signed topological charge (vortex kinds).
    pub m: i32,
    /// Helicity ±1 (vortex and uniform kinds).
    pub sigma: i32,
    /// Skyrmion winding magnitudes and weights.
    pub m1: u32,
    pub m2: u32,
    pub alpha: f64,
    pub beta: f64,
    pub radial_order: RadialOrder,
    pub validity: ValidityPolicy,
    /// Near-axis validity radius; `None` means `25 / q_L`.
    pub validity_radius: Option<f64>,
}

/// Transverse/longitudinal wavenumbers for a focusing angle `α = atan(q⊥/q_z)`.
pub fn wavenumbers_from_angle(omega: f64, alpha: f64) -> (f64, f64) {
    let ql = omega / SPEED_OF_LIGHT;
    (ql * alpha.sin(), ql * alpha.cos())
}

/// Transverse/longitudinal wavenumbers for a waist `w_L = 1/q⊥`.
pub fn wavenumbers_from_waist(omega: f64, waist: f64) -> Result<(f64, f64)> {
    let ql = omega / SPEED_OF_LIGHT;
    let qp = 1.0 / waist;
    if !(waist > 0.0) || qp >= ql {
        return Err(Error::InvalidBeam(format!(
            "waist {waist:.4e} a.u. is below the diffraction limit 1/q_L = {:.4e} a.u.",
            1.0 / ql
        )));
    }
    Ok((qp, (ql * ql - qp * qp).sqrt()))
}

impl BeamSpec {
    fn base(kind: BeamKind, a0: f64, omega: f64, q_perp: f64, q_z: f64) -> Self {
        BeamSpec {
            kind,
            a0,
            omega,
            q_perp,
            q_z,
            m: 0,
            sigma: 1,
            m1: 0,
            m2: 0,
            alpha: 0.0,
            beta: 0.0,
            radial_order: RadialOrder::Third,
            validity: ValidityPolicy::Hard,
            validity_radius: None,
        }
    }

    /// Parallel-class vortex; the helicity follows the sign of `m`.
    pub fn vortex_parallel(a0: f64, omega: f64, focus: f64, m: i32) -> Self {
        let (qp, qz) = wavenumbers_from_angle(omega, focus);
        let mut b = Self::base(BeamKind::VortexParallel, a0, omega, qp, qz);
        b.m = m;
        b.sigma = m.signum();
        b
    }

    /// Antiparallel-class vortex; the helicity is opposite to the sign of `m`.
    pub fn vortex_antiparallel(a0: f64, omega: f64, focus: f64, m: i32) -> Self {
        let (qp, qz) = wavenumbers_from_angle(omega, focus);
        let mut b = Self::base(BeamKind::VortexAntiparallel, a0, omega, qp, qz);
        b.m = m;
        b.sigma = -m.signum();
        b
    }

    pub fn azimuthal(a0: f64, omega: f64, focus: f64) -> Self {
        let (qp, qz) = wavenumbers_from_angle(omega, focus);
        Self::base(BeamKind::Azimuthal, a0, omega, qp, qz)
    }

    pub fn radial(a0: f64, omega: f64, focus: f64) -> Self {
        let (qp, qz) = wavenumbers_from_angle(omega, focus);
        Self::base(BeamKind::Radial, a0, omega, qp, qz)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn skyrmion(a0: f64, omega: f64, focus: f64, m1: u32, m2: u32, alpha: f64, beta: f64) -> Self {
        let (qp, qz) = wavenumbers_from_angle(omega, focus);
        let mut b = Self::base(BeamKind::Skyrmion, a0, omega, qp, qz);
        b.m1 = m1;
        b.m2 = m2;
        b.alpha = alpha;
        b.beta = beta;
        b
    }

    pub fn uniform_circular(a0: f64, omega: f64, sigma: i32) -> Self {
        let ql = omega / SPEED_OF_LIGHT;
        let mut b = Self::base(BeamKind::UniformCircular, a0, omega, 0.0, ql);
        b.sigma = sigma;
        b
    }

    /// Replace the focusing by a waist `w_L = 1/q⊥`, keeping ω fixed.
    pub fn with_waist(mut self, waist: f64) -> Result<Self> {
        let (qp, qz) = wavenumbers_from_waist(self.omega, waist)?;
        self.q_perp = qp;
        self.q_z = qz;
        Ok(self)
    }

    pub fn with_validity(mut self, policy: ValidityPolicy, radius: Option<f64>) -> Self {
        self.validity = policy;
        self.validity_radius = radius;
        self
    }

    pub fn with_radial_order(mut self, order: RadialOrder) -> Self {
        self.radial_order = order;
        self
    }

    pub fn q_light(&self) -> f64 {
        self.omega / SPEED_OF_LIGHT
    }

    pub fn focus_angle(&self) -> f64 {
        self.q_perp.atan2(self.q_z)
    }

    pub fn validity_limit(&self) -> f64 {
        self.validity_radius.unwrap_or(25.0 / self.q_light())
    }

    /// Every violated invariant, as human-readable diagnostics.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut d = Vec::new();
        let finite = [self.a0, self.omega, self.q_perp, self.q_z, self.alpha, self.beta].iter().all(|v| v.is_finite());
        if !finite {
            d.push("beam parameters must be finite".to_string());
            return d;
        }
        if !(self.omega > 0.0) {
            d.push(format!("omega must be positive (got {})", self.omega));
        }
        if !(self.a0 >= 0.0) {
            d.push(format!("A0 must be non-negative (got {})", self.a0));
        }
        if !(self.q_z > 0.0) {
            d.push(format!("q_z must be positive (got {})", self.q_z));
        }
        let uniform = self.kind == BeamKind::UniformCircular;
        if uniform {
            if self.q_perp < 0.0 {
                d.push("q_perp must be non-negative".to_string());
            }
        } else if !(self.q_perp > 0.0) {
            d.push(format!("q_perp must be positive (got {})", self.q_perp));
        }
        if self.omega > 0.0 {
            let ql2 = (self.omega / SPEED_OF_LIGHT).powi(2);
            let rel = (self.q_perp.powi(2) + self.q_z.powi(2) - ql2).abs() / ql2;
            if rel > 1e-12 {
                d.push(format!(
                    "dispersion invariant violated: q_perp² + q_z² differs from ω²/c² by relative {rel:.3e}"
                ));
            }
        }
        match self.kind {
            BeamKind::VortexParallel | BeamKind::VortexAntiparallel => {
                if self.m == 0 {
                    d.push("vortex topological charge m must be non-zero".to_string());
                }
                if self.sigma.abs() != 1 {
                    d.push(format!("helicity sigma must be ±1 (got {})", self.sigma));
                } else if self.m != 0 {
                    let expect = if self.kind == BeamKind::VortexParallel { self.m.signum() } else { -self.m.signum() };
                    if self.sigma != expect {
                        let class = if self.kind == BeamKind::VortexParallel {
                            "parallel-class constraint sign(sigma) = sign(m)"
                        } else {
                            "antiparallel-class constraint sign(sigma) = -sign(m)"
                        };
                        d.push(format!("{class} violated (m = {}, sigma = {})", self.m, self.sigma));
                    }
                }
            }
            BeamKind::UniformCircular => {
                if self.sigma.abs() != 1 {
                    d.push(format!("helicity sigma must be ±1 (got {})", self.sigma));
                }
            }
            BeamKind::Skyrmion => {
                if self.m1 > 64 || self.m2 > 64 {
                    d.push("skyrmion winding numbers must be at most 64".to_string());
                }
            }
            BeamKind::Azimuthal | BeamKind::Radial => {}
        }
        if matches!(self.kind, BeamKind::VortexParallel | BeamKind::VortexAntiparallel) && self.m.unsigned_abs() > 64 {
            d.push("topological charge magnitude must be at most 64".to_string());
        }
        if let Some(r) = self.validity_radius {
            if !(r > 0.0) {
                d.push("validity radius must be positive".to_string());
            }
        }
        d
    }

    pub fn validate(&self) -> Result<()> {
        match self.diagnostics().into_iter().next() {
            None => Ok(()),
            Some(msg) => Err(Error::InvalidBeam(msg)),
        }
    }

    fn check_point(&self, r: &Vec3) -> Result<()> {
        if !r.iter().all(|v| v.is_finite()) {
            return Err(Error::input("evaluation point must be finite"));
        }
        let rho = r[0].hypot(r[1]);
        let limit = self.validity_limit();
        if rho > limit {
            match self.validity {
                ValidityPolicy::Hard => return Err(Error::OutsideValidity { rho, limit }),
                ValidityPolicy::Soft => {
                    log::debug!("point at rho = {rho:.3e} outside validity radius {limit:.3e}")
                }
            }
        }
        Ok(())
    }

    /// Monomial decomposition of the complex envelope.
    pub(crate) fn monomials(&self) -> Vec<Monomial> {
        let a0 = self.a0;
        let qp = self.q_perp;
        let ratio = if self.q_z > 0.0 { qp / self.q_z } else { 0.0 };
        let mut out = Vec::new();
        match self.kind {
            BeamKind::UniformCircular => {
                let s = self.sigma as f64;
                out.push(Monomial::new(a0.into(), 0, 0, [1.0.into(), I * s, ZERO]));
            }
            BeamKind::VortexParallel => push_parallel(&mut out, a0, qp, self.m),
            BeamKind::VortexAntiparallel => {
                let n = self.m.unsigned_abs();
                let (pre, positive) =
                    if self.m > 0 { (1.0, true) } else { (if n.is_multiple_of(2) { 1.0 } else { -1.0 }, false) };
                let c = a0 * pre * qp.powi(n as i32);
                // transverse part: e_{-1} for m > 0, e_{+1} for m < 0
                let tv = if positive { [1.0.into(), -I, ZERO] } else { [1.0.into(), I, ZERO] };
                let (a, b) = if positive { (n, 0) } else { (0, n) };
                out.push(Monomial::new(c.into(), a, b, tv));
                let cz = I * (a0 * pre * 2.0 * n as f64 * ratio * qp.powi(n as i32 - 1));
                let (a, b) = if positive { (n - 1, 0) } else { (0, n - 1) };
                out.push(Monomial::new(cz, a, b, [ZERO, ZERO, 1.0.into()]));
            }
            BeamKind::Azimuthal => {
                // A0 q⊥ ρ sin(q_z z - ωt) ê_φ
                let c = 0.5 * a0 * qp;
                out.push(Monomial::new(c.into(), 1, 0, [1.0.into(), -I, ZERO]));
                out.push(Monomial::new((-c).into(), 0, 1, [1.0.into(), I, ZERO]));
            }
            BeamKind::Radial => {
                // A0 [F1(ρ) cos(q_z z - ωt) ê_ρ - 2 (q⊥/q_z) F0(ρ) sin(q_z z - ωt) ê_z]
                let c = 0.5 * a0 * qp;
                out.push(Monomial::new(c.into(), 1, 0, [1.0.into(), -I, ZERO]));
                out.push(Monomial::new(c.into(), 0, 1, [1.0.into(), I, ZERO]));
                out.push(Monomial::new(I * (2.0 * a0 * ratio), 0, 0, [ZERO, ZERO, 1.0.into()]));
                if self.radial_order == RadialOrder::Third {
                    let c3 = -0.5 * a0 * qp.powi(3) / 8.0;
                    out.push(Monomial::new(c3.into(), 2, 1, [1.0.into(), -I, ZERO]));
                    out.push(Monomial::new(c3.into(), 1, 2, [1.0.into(), I, ZERO]));
                    let cz = I * (2.0 * a0 * ratio * (-qp * qp / 4.0));
                    out.push(Monomial::new(cz, 1, 1, [ZERO, ZERO, 1.0.into()]));
                }
            }
            BeamKind::Skyrmion => {
                let mut part = Vec::new();
                push_parallel(&mut part, a0, qp, self.m1 as i32);
                out.extend(part.into_iter().map(|t| t.scaled(self.alpha)));
                let mut part = Vec::new();
                push_parallel(&mut part, a0, qp, -(self.m2 as i32));
                out.extend(part.into_iter().map(|t| t.scaled(self.beta)));
            }
        }
        out
    }

    /// Complex envelope `Ã(r)` (already containing `e^{i q_z z}`).
    pub fn complex_envelope(&self, r: &Vec3) -> CVec3 {
        let ph = Complex64::from_polar(1.0, self.q_z * r[2]);
        let mut acc = [ZERO; 3];
        for t in self.monomials() {
            let v = t.value(r[0], r[1]) * ph;
            for j in 0..3 {
                acc[j] += v * t.vec[j];
            }
        }
        acc
    }

    /// Complex envelope of the gradient, `G_ij = ∂_i Ã_j`.
    pub fn complex_gradient(&self, r: &Vec3) -> CMat3 {
        let ph = Complex64::from_polar(1.0, self.q_z * r[2]);
        let mut g = [[ZERO; 3]; 3];
        for t in self.monomials() {
            let (dx, dy) = t.transverse_derivatives(r[0], r[1]);
            let v = t.value(r[0], r[1]);
            let d = [dx * ph, dy * ph, I * self.q_z * v * ph];
            for i in 0..3 {
                for j in 0..3 {
                    g[i][j] += d[i] * t.vec[j];
                }
            }
        }
        g
    }
}

fn push_parallel(out: &mut Vec<Monomial>, a0: f64, qp: f64, m: i32) {
    let n = m.unsigned_abs();
    if m >= 0 {
        let c = a0 * qp.powi(n as i32);
        out.push(Monomial::new(c.into(), n, 0, [1.0.into(), I, ZERO]));
    } else {
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        let c = sign * a0 * qp.powi(n as i32);
        out.push(Monomial::new(c.into(), 0, n, [1.0.into(), -I, ZERO]));
    }
}

/// `coef · wᵃ · w̄ᵇ · vec` with `w = x + iy`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Monomial {
    coef: Complex64,
    a: u32,
    b: u32,
    vec: CVec3,
}

impl Monomial {
    fn new(coef: Complex64, a: u32, b: u32, vec: CVec3) -> Self {
        Monomial { coef, a, b, vec }
    }

    fn scaled(mut self, s: f64) -> Self {
        self.coef *= s;
        self
    }

    fn value(&self, x: f64, y: f64) -> Complex64 {
        let w = Complex64::new(x, y);
        self.coef * w.powu(self.a) * w.conj().powu(self.b)
    }

    fn transverse_derivatives(&self, x: f64, y: f64) -> (Complex64, Complex64) {
        let w = Complex64::new(x, y);
        let wb = w.conj();
        let dw = if self.a > 0 { self.a as f64 * w.powu(self.a - 1) * wb.powu(self.b) } else { ZERO };
        let dwb = if self.b > 0 { self.b as f64 * w.powu(self.a) * wb.powu(self.b - 1) } else { ZERO };
        // ∂x = ∂w + ∂w̄, ∂y = i(∂w - ∂w̄)
        (self.coef * (dw + dwb), self.coef * I * (dw - dwb))
    }
}

fn real_part(c: &CVec3, phase: Complex64) -> Vec3 {
    [(c[0] * phase).re, (c[1] * phase).re, (c[2] * phase).re]
}

/// Physical vector potential `A(r, t)`.
pub fn eval_vector_potential(beam: &BeamSpec, r: &Vec3, t: f64) -> Result<Vec3> {
    beam.validate()?;
    beam.check_point(r)?;
    let e = Complex64::from_polar(1.0, -beam.omega * t);
    Ok(real_part(&beam.complex_envelope(r), e))
}

/// Analytic gradient `M_ij = ∂_{r_i} A_j`.
pub fn eval_gradient(beam: &BeamSpec, r: &Vec3, t: f64) -> Result<Mat3> {
    beam.validate()?;
    beam.check_point(r)?;
    let e = Complex64::from_polar(1.0, -beam.omega * t);
    let g = beam.complex_gradient(r);
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (g[i][j] * e).re;
        }
    }
    Ok(m)
}

/// `∇·A` evaluated from the analytic gradient.
pub fn check_divergence(beam: &BeamSpec, r: &Vec3, t: f64) -> Result<f64> {
    let m = eval_gradient(beam, r, t)?;
    Ok(m[0][0] + m[1][1] + m[2][2])
}

/// Atom in the focal plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomPosition {
    pub rho0: f64,
    pub phi0: f64,
}

impl AtomPosition {
    pub fn new(rho0: f64, phi0: f64) -> Result<Self> {
        if !(rho0 >= 0.0) || !rho0.is_finite() || !phi0.is_finite() {
            return Err(Error::input(format!("invalid atom position rho0={rho0}, phi0={phi0}")));
        }
        Ok(AtomPosition { rho0, phi0: crate::special::wrap_2pi(phi0) })
    }

    /// From Cartesian focal-plane coordinates, `φ0 = atan2(y0, x0)`.
    pub fn from_xy(x0: f64, y0: f64) -> Result<Self> {
        Self::new(x0.hypot(y0), y0.atan2(x0))
    }

    pub fn cartesian(&self) -> Vec3 {
        [self.rho0 * self.phi0.cos(), self.rho0 * self.phi0.sin(), 0.0]
    }
}

/// `amp · cos(freq t + phase)` with a vector amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VecSinusoid {
    pub amp: Vec3,
    pub freq: f64,
    pub phase: f64,
}

/// `amp · cos(freq t + phase)` with a matrix amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatSinusoid {
    pub amp: Mat3,
    pub freq: f64,
    pub phase: f64,
}

/// First-order expansion `A(r, t) ≈ A(r₀, t) + r·M(t)` around an atom, with
/// both pieces held as sums of sinusoids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalExpansion {
    pub omega: f64,
    pub a_terms: Vec<VecSinusoid>,
    pub m_terms: Vec<MatSinusoid>,
}

impl LocalExpansion {
    pub fn vector_potential(&self, t: f64) -> Vec3 {
        let mut a = [0.0; 3];
        for s in &self.a_terms {
            let c = (s.freq * t + s.phase).cos();
            for j in 0..3 {
                a[j] += s.amp[j] * c;
            }
        }
        a
    }

    pub fn gradient(&self, t: f64) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for s in &self.m_terms {
            let c = (s.freq * t + s.phase).cos();
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += s.amp[i][j] * c;
                }
            }
        }
        m
    }

    /// Cycle average of `A(r₀, t)²`.
    pub fn mean_square_potential(&self) -> f64 {
        // ⟨cos(ν t + a) cos(ν' t + b)⟩ = ½ cos(a - b) δ_{νν'} for ν, ν' > 0
        let mut acc = 0.0;
        for s in &self.a_terms {
            for u in &self.a_terms {
                if (s.freq - u.freq).abs() < 1e-14 * s.freq.abs().max(1.0) {
                    let dot: f64 = (0..3).map(|j| s.amp[j] * u.amp[j]).sum();
                    let w =
                        if s.freq == 0.0 { (s.phase.cos()) * (u.phase.cos()) } else { 0.5 * (s.phase - u.phase).cos() };
                    acc += dot * w;
                }
            }
        }
        acc
    }

    /// Complex amplitudes `(a, G)` of the single-harmonic field, such that
    /// `A(r₀,t) = Re[a e^{-iωt}]` and `M(t) = Re[G e^{-iωt}]`.
    pub fn harmonic_amplitudes(&self) -> (CVec3, CMat3) {
        let mut a = [ZERO; 3];
        let mut g = [[ZERO; 3]; 3];
        for s in &self.a_terms {
            // cos(ωt + φ) = Re[e^{-iφ} e^{-iωt}]
            let c = Complex64::from_polar(1.0, -s.phase);
            for j in 0..3 {
                a[j] += s.amp[j] * c;
            }
        }
        for s in &self.m_terms {
            let c = Complex64::from_polar(1.0, -s.phase);
            for i in 0..3 {
                for j in 0..3 {
                    g[i][j] += s.amp[i][j] * c;
                }
            }
        }
        (a, g)
    }
}

/// Closed-form local expansion of `beam` at `pos`.
pub fn local_expansion(beam: &BeamSpec, pos: &AtomPosition) -> Result<LocalExpansion> {
    beam.validate()?;
    let r0 = pos.cartesian();
    beam.check_point(&r0)?;
    let a = beam.complex_envelope(&r0);
    let g = beam.complex_gradient(&r0);
    let w = beam.omega;
    // Re[c e^{-iωt}] = Re c · cos ωt + Im c · cos(ωt - π/2)
    let mut a_terms = Vec::new();
    let re: Vec3 = [a[0].re, a[1].re, a[2].re];
    let im: Vec3 = [a[0].im, a[1].im, a[2].im];
    for (amp, phase) in [(re, 0.0), (im, -PI / 2.0)] {
        if amp.iter().any(|v| *v != 0.0) {
            a_terms.push(VecSinusoid { amp, freq: w, phase });
        }
    }
    let mut m_terms = Vec::new();
    let mut mre = [[0.0; 3]; 3];
    let mut mim = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            mre[i][j] = g[i][j].re;
            mim[i][j] = g[i][j].im;
        }
    }
    for (amp, phase) in [(mre, 0.0), (mim, -PI / 2.0)] {
        if amp.iter().flatten().any(|v| *v != 0.0) {
            m_terms.push(MatSinusoid { amp, freq: w, phase });
        }
    }
    Ok(LocalExpansion { omega: w, a_terms, m_terms })
}
