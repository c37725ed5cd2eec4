//! Attosecond streaking by a CW structured dressing field.
//!
//! The dressing is periodic, so with `P(t) = Σ_j P_j e^{−ijωt}` the
//! finite-pulse amplitude collapses onto the envelope transform `F`:
//! `T(E, Δt) = −i e^{iω_XΔt} Σ_j P_j e^{iν_jΔt} F(ν_j)` with
//! `ν_j = E + U_p − ω_X − E_i − jω`. Delay scans then cost one sum per delay.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::atom::XuvPolarization;
use crate::error::{Error, Result};
use crate::fields::{AtomPosition, BeamSpec};
use crate::ionization::{harmonic_series, Dressing, SpotProfile, Target};
use crate::special::{wrap_pi, GaussLegendre};
use crate::volkov::MomentumPoint;

/// Below this kinetic energy spectra are set to zero (continuum not resolvable).
const MIN_ENERGY: f64 = 0.01;

/// Short XUV pulse with envelope `cos²(ω_X t/(2n))` on `|t| ≤ nπ/ω_X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XuvPulse {
    pub omega: f64,
    pub cycles: u32,
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

impl XuvPulse {
    pub fn new(omega: f64, cycles: u32) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::input(format!("XUV photon energy must be positive (got {omega})")));
        }
        if cycles == 0 {
            return Err(Error::input("XUV pulse needs at least one cycle"));
        }
        Ok(XuvPulse { omega, cycles })
    }

    pub fn half_duration(&self) -> f64 {
        self.cycles as f64 * PI / self.omega
    }

    pub fn envelope(&self, t: f64) -> f64 {
        if t.abs() > self.half_duration() {
            0.0
        } else {
            (self.omega * t / (2.0 * self.cycles as f64)).cos().powi(2)
        }
    }

    /// `F(ν) = ∫ f(t) e^{iνt} dt` (real, the envelope is even).
    pub fn envelope_transform(&self, nu: f64) -> f64 {
        let h = self.half_duration();
        let k = PI / h;
        h * sinc(nu * h) + 0.5 * h * (sinc((nu - k) * h) + sinc((nu + k) * h))
    }

    /// Half-width of the main lobe of `F` (its first zero).
    pub fn main_lobe(&self) -> f64 {
        2.0 * self.omega / self.cycles as f64
    }
}

/// Which emitter azimuth feeds a detector at `φ_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum Emission {
    /// `φ0 = φ_p`.
    Radial,
    /// One emitter azimuth for every detector direction.
    Fixed { phi0: f64 },
}

impl Emission {
    fn phi0(&self, phi_p: f64) -> f64 {
        match *self {
            Emission::Radial => phi_p,
            Emission::Fixed { phi0 } => phi0,
        }
    }
}

/// Energy at which the bound–continuum dipoles are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DipoleEnergy {
    /// Line centre `ω_X + E_i` for every final energy (flat dipole across the XUV bandwidth).
    #[default]
    Central,
    /// Each final energy's own dipole.
    Resolved,
}

/// `|T(E)|²` on an energy grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub density: Vec<f64>,
}

/// Uniform grid `center ± half_width` with `points` nodes.
pub fn energy_grid(center: f64, half_width: f64, points: usize) -> Result<Vec<f64>> {
    if points < 3 || !(half_width > 0.0) || !center.is_finite() {
        return Err(Error::input("energy grid needs ≥ 3 points and a positive width"));
    }
    let h = 2.0 * half_width / (points - 1) as f64;
    Ok((0..points).map(|i| center - half_width + i as f64 * h).collect())
}

/// Fourier terms of one emitter at one final energy: `(ν_j, P_j F(ν_j))`.
#[derive(Debug, Clone, Default)]
struct EnergySeries {
    nu: Vec<f64>,
    weight: Vec<Complex64>,
}

impl EnergySeries {
    fn amplitude(&self, delay: f64) -> Complex64 {
        self.nu.iter().zip(&self.weight).map(|(nu, w)| w * Complex64::from_polar(1.0, nu * delay)).sum()
    }
}

fn emitter_series(
    target: &Target,
    beam: &BeamSpec,
    pulse: &XuvPulse,
    pos: &AtomPosition,
    phi_p: f64,
    energies: &[f64],
    dipole: DipoleEnergy,
) -> Result<Vec<EnergySeries>> {
    let dress = Dressing::new(beam, pos)?;
    let pol = XuvPolarization::LinearRadial { phi0: pos.phi0 };
    let up = dress.ponderomotive();
    let e_i = target.e_i();
    let theta = 0.5 * PI;
    let central = pulse.omega + e_i;
    if dipole == DipoleEnergy::Central && central < MIN_ENERGY {
        return Err(Error::input("XUV photon does not reach the continuum"));
    }
    energies
        .iter()
        .map(|&e| {
            if e < MIN_ENERGY {
                return Ok(EnergySeries::default());
            }
            let table = match dipole {
                DipoleEnergy::Central => target.dipoles(central, pol)?,
                DipoleEnergy::Resolved => target.dipoles(e, pol)?,
            };
            let p = MomentumPoint::from_energy(e, theta, phi_p)?.vector();
            let (d0, d1) = table.at(theta, phi_p);
            let (n, coef) = harmonic_series(&dress, &p, d0, &d1);
            let mut s = EnergySeries::default();
            for (idx, c) in coef.into_iter().enumerate() {
                let j = idx as f64 - n as f64;
                let nu = e + up - pulse.omega - e_i - j * dress.omega;
                let f = pulse.envelope_transform(nu);
                if c.norm() * f.abs() > 0.0 {
                    s.nu.push(nu);
                    s.weight.push(c * f);
                }
            }
            Ok(s)
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
/// Photoelectron spectrum at `θ_p = π/2`, azimuth `φ_p`, for one emitter and
/// XUV delay `Δt`; the XUV is linearly polarized along `ρ̂(φ0)` of the emitter.
pub fn streaked_spectrum(
    target: &Target,
    beam: &BeamSpec,
    pulse: &XuvPulse,
    pos: &AtomPosition,
    phi_p: f64,
    delay: f64,
    energies: &[f64],
    dipole: DipoleEnergy,
) -> Result<Spectrum> {
    let series = emitter_series(target, beam, pulse, pos, phi_p, energies, dipole)?;
    Ok(Spectrum {
        energies: energies.to_vec(),
        density: series.iter().map(|s| s.amplitude(delay).norm_sqr()).collect(),
    })
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

/// Center of energy: first moment of the spectrum over its grid.
pub fn extract_coe(spec: &Spectrum) -> Result<f64> {
    if spec.energies.len() != spec.density.len() || spec.energies.len() < 2 {
        return Err(Error::input("spectrum grid and density differ in length"));
    }
    let norm = trapezoid(&spec.energies, &spec.density);
    if !(norm > 0.0) {
        return Err(Error::input("spectrum has zero norm"));
    }
    let moment: Vec<f64> = spec.energies.iter().zip(&spec.density).map(|(e, d)| e * d).collect();
    Ok(trapezoid(&spec.energies, &moment) / norm)
}

/// Location of the spectral maximum, refined by a parabola through the top three nodes.
pub fn extract_peak(spec: &Spectrum) -> Result<f64> {
    let d = &spec.density;
    if d.len() != spec.energies.len() || d.is_empty() {
        return Err(Error::input("spectrum grid and density differ in length"));
    }
    let (k, &top) = d.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
    if !(top > 0.0) {
        return Err(Error::input("spectrum has zero norm"));
    }
    if k == 0 || k + 1 == d.len() {
        return Ok(spec.energies[k]);
    }
    let (a, b, c) = (d[k - 1], d[k], d[k + 1]);
    let den = a - 2.0 * b + c;
    let shift = if den.abs() > 0.0 { 0.5 * (a - c) / den } else { 0.0 };
    let h = 0.5 * (spec.energies[k + 1] - spec.energies[k - 1]);
    Ok(spec.energies[k] + shift * h)
}

/// Delay scan for one detector azimuth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreakingScan {
    pub phi_p: f64,
    pub delays: Vec<f64>,
    pub coe: Vec<f64>,
    pub coe_peak: Vec<f64>,
    pub profile: SpotProfile,
    /// Profile-weighted mean emitter radius, see [`StreakSetup::emission_radius`].
    pub emission_radius: f64,
}

/// Everything about the XUV side of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreakSetup {
    pub pulse: XuvPulse,
    pub profile: SpotProfile,
    pub emission: Emission,
    pub energies: Vec<f64>,
    /// Gauss–Legendre nodes across `[0, 4w]`.
    pub radial_nodes: usize,
    #[serde(default)]
    pub dipole: DipoleEnergy,
}

impl StreakSetup {
    fn radial_quadrature(&self) -> Result<Vec<(f64, f64)>> {
        self.profile.validate()?;
        if self.radial_nodes == 0 {
            return Err(Error::input("radial quadrature needs at least one node"));
        }
        let (x, w) = GaussLegendre::new(self.radial_nodes).mapped(0.0, self.profile.cutoff());
        Ok(x.into_iter().zip(w).map(|(r, w)| (r, w * r * self.profile.value(r).powi(2))).collect())
    }

    /// `∫ρ f ρdρ / ∫f ρdρ`, the radius a reconstruction is attributed to.
    pub fn emission_radius(&self) -> Result<f64> {
        self.profile.validate()?;
        let gl = GaussLegendre::new(48);
        let c = self.profile.cutoff();
        let f = |r: f64| r * self.profile.value(r);
        Ok(gl.integrate(0.0, c, |r| r * f(r)) / gl.integrate(0.0, c, f))
    }
}

/// Spot-averaged COE scans, one per detector azimuth. Emitters at different
/// radii add incoherently with weight `ρ0 f(ρ0)²`.
pub fn spot_weighted_scan(
    target: &Target,
    beam: &BeamSpec,
    setup: &StreakSetup,
    phis: &[f64],
    delays: &[f64],
) -> Result<Vec<StreakingScan>> {
    if phis.is_empty() || delays.is_empty() {
        return Err(Error::input("streaking scan needs azimuth and delay samples"));
    }
    let quad = setup.radial_quadrature()?;
    let emission_radius = setup.emission_radius()?;
    phis.par_iter()
        .map(|&phi_p| {
            let phi0 = setup.emission.phi0(phi_p);
            let emitters = quad
                .iter()
                .map(|&(r, w)| {
                    let pos = AtomPosition::new(r, phi0)?;
                    Ok((w, emitter_series(target, beam, &setup.pulse, &pos, phi_p, &setup.energies, setup.dipole)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut coe = Vec::with_capacity(delays.len());
            let mut coe_peak = Vec::with_capacity(delays.len());
            for &dt in delays {
                let mut density = vec![0.0; setup.energies.len()];
                for (w, series) in &emitters {
                    for (d, s) in density.iter_mut().zip(series) {
                        *d += w * s.amplitude(dt).norm_sqr();
                    }
                }
                let spec = Spectrum { energies: setup.energies.clone(), density };
                coe.push(extract_coe(&spec)?);
                coe_peak.push(extract_peak(&spec)?);
            }
            Ok(StreakingScan { phi_p, delays: delays.to_vec(), coe, coe_peak, profile: setup.profile, emission_radius })
        })
        .collect()
}

/// `y ≈ offset + cos·cos(ωt) + sin·sin(ωt)` in the least-squares sense.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicFit {
    pub offset: f64,
    pub cos: f64,
    pub sin: f64,
    pub rms_residual: f64,
}

pub fn fit_harmonic(t: &[f64], y: &[f64], omega: f64) -> Result<HarmonicFit> {
    if t.len() != y.len() || t.len() < 3 {
        return Err(Error::input("harmonic fit needs ≥ 3 paired samples"));
    }
    let basis = |x: f64| [1.0, (omega * x).cos(), (omega * x).sin()];
    let mut m = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for (&x, &v) in t.iter().zip(y) {
        let b = basis(x);
        for i in 0..3 {
            r[i] += b[i] * v;
            for j in 0..3 {
                m[i][j] += b[i] * b[j];
            }
        }
    }
    let c = solve3(m, r).ok_or_else(|| Error::input("delay samples do not resolve the dressing period"))?;
    let ss: f64 = t
        .iter()
        .zip(y)
        .map(|(&x, &v)| {
            let b = basis(x);
            (v - c[0] * b[0] - c[1] * b[1] - c[2] * b[2]).powi(2)
        })
        .sum();
    Ok(HarmonicFit { offset: c[0], cos: c[1], sin: c[2], rms_residual: (ss / t.len() as f64).sqrt() })
}

fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> Option<[f64; 3]> {
    let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in 0..3 {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..3 {
                    m[row][k] -= f * m[col][k];
                }
                r[row] -= f * r[col];
            }
        }
    }
    Some([r[0] / m[0][0], r[1] / m[1][1], r[2] / m[2][2]])
}

/// Inferred local field along the detector direction at one azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AzimuthSample {
    pub phi_p: f64,
    /// `|ã|` of `A∥(t) = Re[ã e^{−iωt}]`.
    pub amplitude: f64,
    /// `arg ã`; `None` when the modulation is below the fit noise.
    pub phase: Option<f64>,
    /// `A∥` at the fixed delay.
    pub field_at_delay: f64,
    pub rms_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub omega: f64,
    pub p_tilde: f64,
    pub delay: f64,
    pub emission_radius: f64,
    pub samples: Vec<AzimuthSample>,
}

/// Invert the classical streaking relation `δE ≈ −p̃ A∥(Δt)` per azimuth.
pub fn reconstruct_field(scans: &[StreakingScan], omega: f64, p_tilde: f64, delay: f64) -> Result<Reconstruction> {
    if scans.len() < 8 {
        return Err(Error::input(format!("reconstruction needs ≥ 8 azimuths (got {})", scans.len())));
    }
    if !(p_tilde > 0.0) || !(omega > 0.0) {
        return Err(Error::input("reconstruction needs positive p̃ and ω"));
    }
    let mut samples = Vec::with_capacity(scans.len());
    for s in scans {
        let fit = fit_harmonic(&s.delays, &s.coe, omega)?;
        let a = Complex64::new(-fit.cos, -fit.sin) / p_tilde;
        let resolved = a.norm() * p_tilde > 3.0 * fit.rms_residual && a.norm() > 1e-14;
        samples.push(AzimuthSample {
            phi_p: s.phi_p,
            amplitude: a.norm(),
            phase: resolved.then(|| a.arg()),
            field_at_delay: (a * Complex64::from_polar(1.0, -omega * delay)).re,
            rms_residual: fit.rms_residual,
        });
    }
    samples.sort_by(|a, b| a.phi_p.total_cmp(&b.phi_p));
    let emission_radius = scans.iter().map(|s| s.emission_radius).sum::<f64>() / scans.len() as f64;
    Ok(Reconstruction { omega, p_tilde, delay, emission_radius, samples })
}

impl Reconstruction {
    /// Complex `ã(φ)` by periodic linear interpolation between samples.
    pub fn interpolate(&self, phi: f64) -> Complex64 {
        let s = &self.samples;
        let val = |a: &AzimuthSample| Complex64::from_polar(a.amplitude, a.phase.unwrap_or(0.0));
        if s.len() == 1 {
            return val(&s[0]);
        }
        let phi = phi.rem_euclid(2.0 * PI);
        let base = s[0].phi_p;
        let rel = |x: f64| (x - base).rem_euclid(2.0 * PI);
        let x = rel(phi);
        let n = s.len();
        for k in 0..n {
            let x0 = rel(s[k].phi_p);
            let x1 = if k + 1 < n { rel(s[k + 1].phi_p) } else { 2.0 * PI };
            if x >= x0 && x <= x1 {
                let u = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
                return val(&s[k]) * (1.0 - u) + val(&s[(k + 1) % n]) * u;
            }
        }
        val(&s[0])
    }
}

/// `ρ̂·Ã` of the beam at `(ρ, φ, z = 0)`.
pub fn radial_component(beam: &BeamSpec, rho: f64, phi: f64) -> Complex64 {
    let a = beam.complex_envelope(&[rho * phi.cos(), rho * phi.sin(), 0.0]);
    a[0] * phi.cos() + a[1] * phi.sin()
}

/// Mean offset `arg Σ e^{i(a−b)}` between two phase lists.
pub fn circular_offset(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| Complex64::from_polar(1.0, x - y)).sum::<Complex64>().arg()
}

/// RMS of the wrapped phase difference after removing the mean offset.
pub fn circular_rms(a: &[f64], b: &[f64]) -> f64 {
    let off = circular_offset(a, b);
    let n = a.len().min(b.len()).max(1);
    let ss: f64 = a.iter().zip(b).map(|(x, y)| wrap_pi(x - y - off).powi(2)).sum();
    (ss / n as f64).sqrt()
}

/// Pearson correlation; `None` if either series is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len().min(b.len());
    if n < 2 {
        return None;
    }
    let ma = a[..n].iter().sum::<f64>() / n as f64;
    let mb = b[..n].iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (x, y) = (a[i] - ma, b[i] - mb);
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    (saa > 0.0 && sbb > 0.0).then(|| sab / (saa * sbb).sqrt())
}
