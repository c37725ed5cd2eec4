//! Laser-assisted XUV photoionization with structured-light Volkov final states.
//!
//! For a CW dressing field the time integrand
//! `P(t) = e^{iS_osc(t)} [D₀ − i(A − K)(t)·D₁]` is periodic, so the amplitude
//! splits into discrete sidebands `E_n = ω_X + E_i + nω − U_p` with weights
//! `C_n = (1/T)∫₀ᵀ P(t) e^{inωt} dt`. `D₀ = ⟨ψ⁻_p|r·ε|i⟩` and
//! `D₁ = ⟨ψ⁻_p|r (r·ε)|i⟩` come from the first-order expansion of the
//! plane-wave shift `e^{i(A−K)·r}`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use crate::atom::{
    continuum_threshold, contract_channels, second_order_channels, solve_bound_1s, solve_continuum, xuv_matrix_element,
    BoundState, Channel, ContinuumWave, Potential, RadialGrid, XuvPolarization,
};
use crate::error::{Error, Result};
use crate::fields::{local_expansion, AtomPosition, BeamSpec, CMat3, CVec3, Vec3};
use crate::io::RadialCache;
use crate::special::{bessel_j_upto, lm_index, GaussLegendre, SphereQuadrature};
use crate::volkov::MomentumPoint;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// XUV field in rotating-wave form `H_X e^{−iω_X t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XuvSpec {
    pub omega: f64,
    pub polarization: XuvPolarization,
}

/// Dipole matrix elements at one photoelectron energy.
#[derive(Debug, Clone)]
pub struct DipoleTable {
    pub energy: f64,
    pub cont: ContinuumWave,
    d0: Vec<Channel>,
    d1: [Vec<Channel>; 3],
}

impl DipoleTable {
    /// `(D₀, D₁)` for emission direction `(θ, φ)`.
    pub fn at(&self, theta: f64, phi: f64) -> (Complex64, [Complex64; 3]) {
        let d0 = contract_channels(&self.cont, &self.d0, theta, phi);
        let d1 = [
            contract_channels(&self.cont, &self.d1[0], theta, phi),
            contract_channels(&self.cont, &self.d1[1], theta, phi),
            contract_channels(&self.cont, &self.d1[2], theta, phi),
        ];
        (d0, d1)
    }

    pub fn dipole_channels(&self) -> &[Channel] {
        &self.d0
    }
}

/// Energy bits and polarization key.
type DipoleKey = (u64, [u64; 3]);

/// Atom plus a memo of dipole tables keyed by (energy, polarization).
pub struct Target {
    pub potential: Potential,
    pub grid: Arc<RadialGrid>,
    pub bound: BoundState,
    cache: Mutex<HashMap<DipoleKey, Arc<DipoleTable>>>,
    radial: Option<Mutex<RadialCache>>,
}

impl std::fmt::Debug for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Target")
            .field("potential", &self.potential)
            .field("points", &self.grid.len())
            .field("e_i", &self.bound.energy)
            .finish()
    }
}

fn pol_key(p: &XuvPolarization) -> [u64; 3] {
    match *p {
        XuvPolarization::Circular { sigma } => [0, sigma as i64 as u64, 0],
        XuvPolarization::LinearZ => [1, 0, 0],
        XuvPolarization::LinearRadial { phi0 } => [2, phi0.to_bits(), 0],
    }
}

impl Target {
    pub fn new(potential: Potential, grid: Arc<RadialGrid>) -> Result<Self> {
        let bound = solve_bound_1s(&potential, grid.clone())?;
        Ok(Target { potential, grid, bound, cache: Mutex::new(HashMap::new()), radial: None })
    }

    /// Reuse and record continuum solutions in `cache`. Each wave costs
    /// `3 × grid points × 8` bytes, so only enable this for bounded runs.
    pub fn with_radial_cache(mut self, cache: RadialCache) -> Self {
        self.radial = Some(Mutex::new(cache));
        self
    }

    pub fn radial_cache(&self) -> Option<RadialCache> {
        self.radial.as_ref().map(|c| c.lock().expect("radial cache poisoned").clone())
    }

    /// Helium model atom on the standard grid.
    pub fn helium() -> Result<Self> {
        Self::new(Potential::TongLinHelium, Arc::new(RadialGrid::standard()))
    }

    /// Initial-state energy `E_i` (negative).
    pub fn e_i(&self) -> f64 {
        self.bound.energy
    }

    pub fn dipoles(&self, energy: f64, pol: XuvPolarization) -> Result<Arc<DipoleTable>> {
        let key = (energy.to_bits(), pol_key(&pol));
        if let Some(t) = self.cache.lock().expect("dipole cache poisoned").get(&key) {
            return Ok(t.clone());
        }
        let cached = self
            .radial
            .as_ref()
            .and_then(|c| c.lock().expect("radial cache poisoned").wave(&self.potential, &self.grid, energy, 2));
        let cont = match cached {
            Some(w) => w,
            None => {
                let w = solve_continuum(&self.potential, self.grid.clone(), energy, 2)?;
                if let Some(c) = &self.radial {
                    c.lock().expect("radial cache poisoned").insert_wave(&w);
                }
                w
            }
        };
        let d0 = xuv_matrix_element(&self.bound, &cont, pol)?;
        let d1 = second_order_channels(&self.bound, &cont, pol)?;
        let table = Arc::new(DipoleTable { energy, cont, d0, d1 });
        let mut cache = self.cache.lock().expect("dipole cache poisoned");
        if cache.len() > 4096 {
            cache.clear();
        }
        cache.insert(key, table.clone());
        Ok(table)
    }
}

/// Single-harmonic dressing at one atom: `A = Re[a e^{−iωt}]`, `M = Re[G e^{−iωt}]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dressing {
    pub omega: f64,
    pub a: CVec3,
    pub g: CMat3,
    pub include_ma: bool,
}

impl Dressing {
    pub fn new(beam: &BeamSpec, pos: &AtomPosition) -> Result<Self> {
        let exp = local_expansion(beam, pos)?;
        let (a, g) = exp.harmonic_amplitudes();
        Ok(Dressing { omega: beam.omega, a, g, include_ma: false })
    }

    pub fn none(omega: f64) -> Self {
        Dressing { omega, a: [ZERO; 3], g: [[ZERO; 3]; 3], include_ma: false }
    }

    /// Ponderomotive energy `½⟨A²⟩`.
    pub fn ponderomotive(&self) -> f64 {
        0.25 * self.a.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    fn g_dot(&self, v: &[Complex64; 3]) -> CVec3 {
        let mut o = [ZERO; 3];
        for i in 0..3 {
            for j in 0..3 {
                o[i] += self.g[i][j] * v[j];
            }
        }
        o
    }

    /// Complex amplitudes `(C₁, C₂)` of `S_osc = Re[C₁e^{−iωt}] + Re[C₂e^{−2iωt}]`.
    pub fn phase_coefficients(&self, p: &Vec3) -> (Complex64, Complex64) {
        let w = self.omega;
        let pc = [p[0].into(), p[1].into(), p[2].into()];
        let pa: Complex64 = (0..3).map(|j| self.a[j] * p[j]).sum();
        let gp = self.g_dot(&pc);
        let pgp: Complex64 = (0..3).map(|i| gp[i] * p[i]).sum();
        let c1 = I * pa / w + pgp / (w * w);
        let c2 = if self.include_ma {
            let ga = self.g_dot(&self.a);
            (0..3).map(|i| ga[i] * p[i]).sum::<Complex64>() / (8.0 * w * w)
        } else {
            ZERO
        };
        (c1, c2)
    }

    /// `(b₁, b₂)` with `A − K = Re[b₁e^{−iωt}] + Re[b₂e^{−2iωt}]`.
    pub fn shift_coefficients(&self, p: &Vec3) -> (CVec3, CVec3) {
        let w = self.omega;
        let pc = [p[0].into(), p[1].into(), p[2].into()];
        let gp = self.g_dot(&pc);
        let ga = self.g_dot(&self.a);
        let mut b1 = [ZERO; 3];
        let mut b2 = [ZERO; 3];
        for i in 0..3 {
            b1[i] = self.a[i] - I * gp[i] / w;
            b2[i] = -I * ga[i] / (4.0 * w);
        }
        (b1, b2)
    }

    /// Oscillatory phase and `A − K` at time `t`.
    pub fn sample(&self, p: &Vec3, t: f64) -> (f64, Vec3) {
        let (c1, c2) = self.phase_coefficients(p);
        let (b1, b2) = self.shift_coefficients(p);
        let e1 = Complex64::from_polar(1.0, -self.omega * t);
        let e2 = e1 * e1;
        let s = (c1 * e1).re + (c2 * e2).re;
        let mut v = [0.0; 3];
        for i in 0..3 {
            v[i] = (b1[i] * e1).re + (b2[i] * e2).re;
        }
        (s, v)
    }
}

fn dotc(a: &CVec3, b: &[Complex64; 3]) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Fourier coefficients (of `e^{−ijωt}`, `j = −N..=N`) of `e^{iX cos(kωt − χ)}`
/// on the fundamental-frequency comb.
fn jacobi_anger(c: Complex64, harmonic: usize, nmax: usize) -> Vec<Complex64> {
    let x = c.norm();
    let chi = c.arg();
    let len = 2 * nmax + 1;
    let mut out = vec![ZERO; len];
    let jmax = nmax / harmonic;
    let bess = bessel_j_upto(jmax, x);
    for j in -(jmax as i64)..=(jmax as i64) {
        let aj = j.unsigned_abs() as usize;
        let mut b = bess[aj];
        if j < 0 && aj % 2 == 1 {
            b = -b;
        }
        let coef = I.powi(j as i32) * b * Complex64::from_polar(1.0, j as f64 * chi);
        let idx = (j * harmonic as i64 + nmax as i64) as usize;
        out[idx] = coef;
    }
    out
}

fn convolve(a: &[Complex64], b: &[Complex64], nmax: usize) -> Vec<Complex64> {
    let len = 2 * nmax + 1;
    let mut out = vec![ZERO; len];
    for (i, x) in a.iter().enumerate() {
        if x.norm_sqr() == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            let k = i as i64 + j as i64 - nmax as i64;
            if k >= 0 && (k as usize) < len {
                out[k as usize] += x * y;
            }
        }
    }
    out
}

fn comb_size(c1: Complex64, c2: Complex64, n: i32) -> usize {
    let x = c1.norm() + 2.0 * c2.norm();
    n.unsigned_abs() as usize + 12 + (x + 6.0 * x.cbrt()) as usize
}

/// Sideband weight `C_n` by the (generalized) Jacobi–Anger expansion.
pub fn sideband_coefficient(dress: &Dressing, p: &Vec3, d0: Complex64, d1: &[Complex64; 3], n: i32) -> Complex64 {
    let (c1, c2) = dress.phase_coefficients(p);
    let (b1, b2) = dress.shift_coefficients(p);
    let nmax = comb_size(c1, c2, n);
    let mut phase = jacobi_anger(c1, 1, nmax);
    if c2.norm() > 0.0 {
        phase = convolve(&phase, &jacobi_anger(c2, 2, nmax), nmax);
    }
    // bracket D₀ − i(A−K)·D₁ on the comb k = −2..=2
    let half = |b: &CVec3, conj: bool| {
        let v: CVec3 = if conj { [b[0].conj(), b[1].conj(), b[2].conj()] } else { *b };
        -0.5 * I * dotc(&v, d1)
    };
    let bracket =
        [(-2i32, half(&b2, true)), (-1, half(&b1, true)), (0, d0), (1, half(&b1, false)), (2, half(&b2, false))];
    let mut acc = ZERO;
    for (k, bk) in bracket {
        let j = n - k;
        let idx = j as i64 + nmax as i64;
        if idx >= 0 && (idx as usize) < phase.len() {
            acc += phase[idx as usize] * bk;
        }
    }
    acc
}

/// Full Fourier series of `P(t)`: entry `j + N` is the coefficient of
/// `e^{−ijωt}` for `j = −N..=N`; returns `(N, coefficients)`.
pub fn harmonic_series(dress: &Dressing, p: &Vec3, d0: Complex64, d1: &[Complex64; 3]) -> (usize, Vec<Complex64>) {
    let (c1, c2) = dress.phase_coefficients(p);
    let (b1, b2) = dress.shift_coefficients(p);
    let nmax = comb_size(c1, c2, 0);
    let wide = nmax + 2;
    let mut phase = jacobi_anger(c1, 1, wide);
    if c2.norm() > 0.0 {
        phase = convolve(&phase, &jacobi_anger(c2, 2, wide), wide);
    }
    let half = |b: &CVec3, conj: bool| {
        let v: CVec3 = if conj { [b[0].conj(), b[1].conj(), b[2].conj()] } else { *b };
        -0.5 * I * dotc(&v, d1)
    };
    let bracket = [half(&b2, true), half(&b1, true), d0, half(&b1, false), half(&b2, false)];
    let mut out = vec![ZERO; 2 * nmax + 1];
    for (idx, o) in out.iter_mut().enumerate() {
        let j = idx as i64 - nmax as i64;
        for (kk, bk) in bracket.iter().enumerate() {
            let src = j - (kk as i64 - 2) + wide as i64;
            *o += phase[src as usize] * bk;
        }
    }
    (nmax, out)
}

/// Same quantity by sampling `P(t)` over one period (validation path).
pub fn sideband_coefficient_sampled(
    dress: &Dressing,
    p: &Vec3,
    d0: Complex64,
    d1: &[Complex64; 3],
    n: i32,
    samples: usize,
) -> Complex64 {
    let period = 2.0 * PI / dress.omega;
    let dt = period / samples as f64;
    let mut acc = ZERO;
    for k in 0..samples {
        let t = k as f64 * dt;
        let (s, v) = dress.sample(p, t);
        let bracket = d0 - I * (v[0] * d1[0] + v[1] * d1[1] + v[2] * d1[2]);
        acc += Complex64::from_polar(1.0, s + n as f64 * dress.omega * t) * bracket;
    }
    acc / samples as f64
}

/// Kinetic energy of sideband `n`; `None` if the channel is closed.
pub fn sideband_energy(dress: &Dressing, xuv: &XuvSpec, e_i: f64, n: i32) -> Option<f64> {
    let e = xuv.omega + e_i + n as f64 * dress.omega - dress.ponderomotive();
    (e > 0.0).then_some(e)
}

/// CW sideband amplitude for one emission direction.
pub fn sideband_amplitude(
    target: &Target,
    dress: &Dressing,
    xuv: &XuvSpec,
    n: i32,
    theta: f64,
    phi: f64,
) -> Result<Complex64> {
    let e = sideband_energy(dress, xuv, target.e_i(), n)
        .ok_or_else(|| Error::input(format!("sideband {n} is energetically closed")))?;
    let table = target.dipoles(e, xuv.polarization)?;
    let pt = MomentumPoint::from_energy(e, theta, phi)?;
    let (d0, d1) = table.at(theta, phi);
    Ok(sideband_coefficient(dress, &pt.vector(), d0, &d1, n))
}

/// `φ`-integrated sideband yield `∫dφ |C_n(θ, φ)|²` at each `θ`.
pub fn polar_distribution(
    target: &Target,
    dress: &Dressing,
    xuv: &XuvSpec,
    n: i32,
    thetas: &[f64],
    nphi: usize,
) -> Result<Vec<f64>> {
    let nphi = nphi.max(1);
    thetas
        .iter()
        .map(|&th| {
            let mut s = 0.0;
            for j in 0..nphi {
                let phi = 2.0 * PI * j as f64 / nphi as f64;
                s += sideband_amplitude(target, dress, xuv, n, th, phi)?.norm_sqr();
            }
            Ok(s * 2.0 * PI / nphi as f64)
        })
        .collect()
}

/// Forward-hemisphere polar centroid `θ̄ = ∫θ Y sinθ dθ / ∫Y sinθ dθ` over
/// `θ ∈ [0, π/2]`, and the hemisphere yield `∫Y sinθ dθ`.
pub fn polar_centroid(
    target: &Target,
    dress: &Dressing,
    xuv: &XuvSpec,
    n: i32,
    ntheta: usize,
    nphi: usize,
) -> Result<(f64, f64)> {
    let (x, w) = GaussLegendre::new(ntheta.max(2)).mapped(0.0, 0.5 * PI);
    let y = polar_distribution(target, dress, xuv, n, &x, nphi)?;
    let mut norm = 0.0;
    let mut first = 0.0;
    for ((th, wk), yk) in x.iter().zip(&w).zip(&y) {
        let v = wk * th.sin() * yk;
        norm += v;
        first += th * v;
    }
    if !(norm > 0.0) {
        return Err(Error::input(format!("sideband {n} carries no yield")));
    }
    Ok((first / norm, norm))
}

/// Complex amplitudes over a momentum grid: energies × sphere nodes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AmplitudeGrid {
    pub energies: Vec<f64>,
    /// Quadrature weight of each energy slice (1 for a discrete CW line).
    pub energy_weights: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_weights: Vec<f64>,
    pub nphi: usize,
    /// `values[e][i_theta * nphi + i_phi]`.
    pub values: Vec<Vec<Complex64>>,
    pub meta: serde_json::Value,
}

impl AmplitudeGrid {
    pub fn sphere(&self) -> SphereQuadrature {
        SphereQuadrature { theta: self.theta.clone(), theta_weights: self.theta_weights.clone(), nphi: self.nphi }
    }

    pub fn validate(&self) -> Result<()> {
        let inc = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
        if !inc(&self.energies) {
            return Err(Error::input("energy axis must be strictly increasing"));
        }
        if !(inc(&self.theta) || self.theta.windows(2).all(|w| w[1] < w[0])) {
            return Err(Error::input("theta axis must be strictly monotone"));
        }
        if self.values.len() != self.energies.len()
            || self.values.iter().any(|v| v.len() != self.theta.len() * self.nphi)
        {
            return Err(Error::input("amplitude array does not match the grid"));
        }
        if self.values.iter().flatten().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::input("non-finite amplitude"));
        }
        Ok(())
    }

    /// Rows `(E, θ, φ, re, im, |A|²)` in deterministic order.
    pub fn rows(&self) -> Vec<[f64; 6]> {
        let mut out = Vec::new();
        let sphere = self.sphere();
        for (e, vals) in self.energies.iter().zip(&self.values) {
            for (it, th) in self.theta.iter().enumerate() {
                for ip in 0..self.nphi {
                    let v = vals[it * self.nphi + ip];
                    out.push([*e, *th, sphere.phi(ip), v.re, v.im, v.norm_sqr()]);
                }
            }
        }
        out
    }
}

/// Sideband `n` amplitudes on a sphere rule resolving `l ≤ lmax`.
pub fn sideband_sphere(target: &Target, dress: &Dressing, xuv: &XuvSpec, n: i32, lmax: usize) -> Result<AmplitudeGrid> {
    let e = sideband_energy(dress, xuv, target.e_i(), n)
        .ok_or_else(|| Error::input(format!("sideband {n} is energetically closed")))?;
    let table = target.dipoles(e, xuv.polarization)?;
    let quad = SphereQuadrature::for_lmax(lmax);
    let nodes = quad.nodes();
    let p = (2.0 * e).sqrt();
    let values: Vec<Complex64> = nodes
        .par_iter()
        .map(|&(th, ph, _)| {
            let (d0, d1) = table.at(th, ph);
            let pv = [p * th.sin() * ph.cos(), p * th.sin() * ph.sin(), p * th.cos()];
            sideband_coefficient(dress, &pv, d0, &d1, n)
        })
        .collect();
    Ok(AmplitudeGrid {
        energies: vec![e],
        energy_weights: vec![1.0],
        theta: quad.theta.clone(),
        theta_weights: quad.theta_weights.clone(),
        nphi: quad.nphi,
        values: vec![values],
        meta: serde_json::json!({ "sideband": n, "mode": "cw" }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandWindow {
    pub n: i32,
    pub center: f64,
    pub half_width: f64,
}

impl SidebandWindow {
    /// Window around `E_n = ω_X + nω + E_i` with half-width `ε`.
    pub fn new(n: i32, omega_x: f64, omega_l: f64, e_i: f64, half_width: f64) -> Result<Self> {
        let center = omega_x + n as f64 * omega_l + e_i;
        if !(half_width > 0.0) || center - half_width <= 0.0 {
            return Err(Error::input(format!(
                "sideband window {n} at {center:.4} ± {half_width:.4} reaches non-positive energies"
            )));
        }
        if half_width >= 0.5 * omega_l {
            return Err(Error::input("adjacent sideband windows would overlap"));
        }
        Ok(SidebandWindow { n, center, half_width })
    }

    pub fn contains(&self, e: f64) -> bool {
        (e - self.center).abs() <= self.half_width
    }
}

/// Partial-wave content of a sideband wave packet.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Wavepacket {
    pub lmax: usize,
    /// `(energy weight, c_lm)` per energy slice.
    pub slices: Vec<(f64, Vec<Complex64>)>,
    /// `Σ w ∫|A|² dΩ` before truncation to `lmax`.
    pub total: f64,
}

impl Wavepacket {
    pub fn norm(&self) -> f64 {
        self.slices.iter().map(|(w, c)| w * c.iter().map(|x| x.norm_sqr()).sum::<f64>()).sum()
    }

    /// Fraction of `∫|A|²` captured by `l ≤ lmax`.
    pub fn captured(&self) -> f64 {
        if self.total > 0.0 {
            self.norm() / self.total
        } else {
            1.0
        }
    }

    /// `|c_lm|²` summed over slices.
    pub fn channel_weight(&self, l: usize, m: i32) -> f64 {
        if l > self.lmax || m.unsigned_abs() as usize > l {
            return 0.0;
        }
        let i = lm_index(l, m);
        self.slices.iter().map(|(w, c)| w * c[i].norm_sqr()).sum()
    }
}

/// Restrict `grid` to `win` and project onto partial waves `l ≤ lmax`.
pub fn sideband_project(grid: &AmplitudeGrid, win: &SidebandWindow, lmax: usize) -> Result<Wavepacket> {
    grid.validate()?;
    let quad = grid.sphere();
    let nodes = quad.nodes();
    let mut slices = Vec::new();
    let mut total = 0.0;
    let mut any = false;
    for ((e, w), vals) in grid.energies.iter().zip(&grid.energy_weights).zip(&grid.values) {
        let inside = win.contains(*e) || grid.meta.get("mode").and_then(|m| m.as_str()) == Some("cw");
        if !inside {
            continue;
        }
        any = true;
        total += w * nodes.iter().zip(vals).map(|((_, _, q), v)| q * v.norm_sqr()).sum::<f64>();
        slices.push((*w, quad.project(lmax, vals)));
    }
    if !any {
        return Err(Error::input(format!("no grid energy inside sideband window {}", win.n)));
    }
    Ok(Wavepacket { lmax, slices, total })
}

/// `⟨L_z⟩ = Σ m|c_lm|² / Σ|c_lm|²` in units of ħ.
pub fn expected_lz(wp: &Wavepacket) -> Result<f64> {
    let norm = wp.norm();
    if !(norm > 0.0) {
        return Err(Error::input("wave packet has zero norm"));
    }
    let mut acc = 0.0;
    for (w, c) in &wp.slices {
        for l in 0..=wp.lmax {
            for m in -(l as i32)..=(l as i32) {
                acc += w * m as f64 * c[lm_index(l, m)].norm_sqr();
            }
        }
    }
    Ok(acc / norm)
}

/// CW sideband ⟨L_z⟩ with `l_max` raised until 99.9 % of the yield is captured.
pub fn sideband_lz(
    target: &Target,
    dress: &Dressing,
    xuv: &XuvSpec,
    n: i32,
    lmax_start: usize,
) -> Result<(f64, Wavepacket)> {
    sideband_lz_to(target, dress, xuv, n, lmax_start, 0.999)
}

/// [`sideband_lz`] with an explicit norm-capture threshold.
pub fn sideband_lz_to(
    target: &Target,
    dress: &Dressing,
    xuv: &XuvSpec,
    n: i32,
    lmax_start: usize,
    capture: f64,
) -> Result<(f64, Wavepacket)> {
    let mut lmax = lmax_start.max(4);
    loop {
        let grid = sideband_sphere(target, dress, xuv, n, lmax + 4)?;
        let e = grid.energies[0];
        let win = SidebandWindow { n, center: e, half_width: f64::MIN_POSITIVE };
        let wp = sideband_project(&grid, &win, lmax)?;
        if wp.captured() >= capture {
            return Ok((expected_lz(&wp)?, wp));
        }
        if lmax >= 160 {
            return Err(Error::no_convergence(
                "partial-wave projection",
                format!("captured {:.5} of the yield at l_max = {lmax}", wp.captured()),
            ));
        }
        lmax = (lmax * 3) / 2;
    }
}

/// Transverse XUV spot profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpotProfile {
    /// `f(ρ0) = exp(−(ρ0/(2w))²)`.
    Gaussian { width: f64 },
    /// `E(ρ0) = (ρ0/w) exp(−ρ0²/w²)`.
    RvbDonut { width: f64 },
}

impl SpotProfile {
    pub fn width(&self) -> f64 {
        match *self {
            SpotProfile::Gaussian { width } | SpotProfile::RvbDonut { width } => width,
        }
    }

    pub fn value(&self, rho0: f64) -> f64 {
        match *self {
            SpotProfile::Gaussian { width } => (-(rho0 / (2.0 * width)).powi(2)).exp(),
            SpotProfile::RvbDonut { width } => rho0 / width * (-(rho0 / width).powi(2)).exp(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.width();
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::input(format!("spot width must be positive (got {w})")));
        }
        Ok(())
    }

    /// Radial cut-off of the spot integral.
    pub fn cutoff(&self) -> f64 {
        4.0 * self.width()
    }
}

/// Spot-averaged yield `∫ρ0 dρ0 ∫dφ0 f(ρ0)² Y(ρ0, φ0)` of a single-atom
/// yield `Y`. Radial GL panels are doubled until the relative change drops
/// below `1e-4`.
pub fn spot_integral<F>(profile: &SpotProfile, n_phi0: usize, yield_at: F) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    spot_integral_to(profile, profile.cutoff(), n_phi0, yield_at)
}

/// As [`spot_integral`] but truncated at `rmax`, which should sit on any
/// discontinuity of the yield (a channel closing).
pub fn spot_integral_to<F>(profile: &SpotProfile, rmax: f64, n_phi0: usize, yield_at: F) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    profile.validate()?;
    if !(rmax > 0.0) {
        return Err(Error::input(format!("spot cut-off must be positive (got {rmax})")));
    }
    let gl = GaussLegendre::new(12);
    let n_phi0 = n_phi0.max(1);
    let eval = |panels: usize| -> Result<f64> {
        let h = rmax / panels as f64;
        let mut nodes = Vec::new();
        for k in 0..panels {
            let (x, w) = gl.mapped(k as f64 * h, (k + 1) as f64 * h);
            nodes.extend(x.into_iter().zip(w));
        }
        let parts: Result<Vec<f64>> = nodes
            .par_iter()
            .map(|&(r, w)| {
                let f = profile.value(r);
                let mut s = 0.0;
                for j in 0..n_phi0 {
                    let phi0 = 2.0 * PI * j as f64 / n_phi0 as f64;
                    s += yield_at(r, phi0)?;
                }
                Ok(w * r * f * f * s * 2.0 * PI / n_phi0 as f64)
            })
            .collect();
        Ok(parts?.iter().sum())
    };
    let mut panels = 2;
    let mut prev = eval(panels)?;
    for _ in 0..6 {
        panels *= 2;
        let cur = eval(panels)?;
        if (cur - prev).abs() <= 1e-4 * cur.abs().max(f64::MIN_POSITIVE) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::no_convergence("spot average", format!("last estimate {prev:.6e}")))
}

/// Spot-averaged CW sideband yield `W` in direction `(θ, φ)`.
#[allow(clippy::too_many_arguments)]
pub fn spot_average(
    target: &Target,
    beam: &BeamSpec,
    xuv: &XuvSpec,
    profile: &SpotProfile,
    n: i32,
    theta: f64,
    phi: f64,
    n_phi0: usize,
) -> Result<f64> {
    let rmax = open_radius(target, beam, xuv, n, n_phi0, profile.cutoff())?;
    if rmax <= 0.0 {
        return Ok(0.0);
    }
    spot_integral_to(profile, rmax, n_phi0, |rho0, phi0| {
        let pos = AtomPosition::new(rho0, phi0)?;
        let dress = Dressing::new(beam, &pos)?;
        let xuv_local = match xuv.polarization {
            XuvPolarization::LinearRadial { .. } => {
                XuvSpec { omega: xuv.omega, polarization: XuvPolarization::LinearRadial { phi0 } }
            }
            _ => *xuv,
        };
        match sideband_amplitude(target, &dress, &xuv_local, n, theta, phi) {
            Ok(a) => Ok(a.norm_sqr()),
            // closed channel
            Err(Error::InvalidInput(_)) => Ok(0.0),
            // barely open channel: negligible weight, continuum not resolvable
            Err(Error::NonConvergence { what: "continuum matching", detail }) => {
                log::warn!("skipping spot node at rho0 = {rho0:.4e}: {detail}");
                Ok(0.0)
            }
            Err(e) => Err(e),
        }
    })
}

/// Lowest photoelectron energy the continuum solver is asked for inside a
/// spot average; atoms where the sideband sits closer to threshold are dropped.
pub const SPOT_ENERGY_FLOOR: f64 = 0.01;

/// Largest radius `≤ rmax` out to which sideband `n` stays above both
/// [`SPOT_ENERGY_FLOOR`] and the grid's continuum threshold for every sampled `φ0`.
fn open_radius(target: &Target, beam: &BeamSpec, xuv: &XuvSpec, n: i32, n_phi0: usize, rmax: f64) -> Result<f64> {
    let n_phi0 = n_phi0.max(1);
    let floor = SPOT_ENERGY_FLOOR.max(continuum_threshold(&target.potential, &target.grid, 2));
    let open = |rho: f64| -> Result<bool> {
        for j in 0..n_phi0 {
            let pos = AtomPosition::new(rho, 2.0 * PI * j as f64 / n_phi0 as f64)?;
            let d = Dressing::new(beam, &pos)?;
            if sideband_energy(&d, xuv, target.e_i(), n).is_none_or(|e| e < floor) {
                return Ok(false);
            }
        }
        Ok(true)
    };
    if !open(0.0)? {
        return Ok(0.0);
    }
    let steps = 256;
    let mut lo = 0.0;
    for k in 1..=steps {
        let r = rmax * k as f64 / steps as f64;
        if !open(r)? {
            let mut hi = r;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if open(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            log::debug!("sideband {n} closes at rho0 = {lo:.6e}");
            return Ok(lo);
        }
        lo = r;
    }
    Ok(rmax)
}

/// `D = (W₊ − W₋)/(W₊ + W₋)`.
pub fn orbital_dichroism(w_plus: f64, w_minus: f64) -> Result<f64> {
    let s = w_plus + w_minus;
    if !(s > 0.0) || w_plus < 0.0 || w_minus < 0.0 {
        return Err(Error::input("dichroism needs non-negative yields with positive sum"));
    }
    Ok((w_plus - w_minus) / s)
}

/// Finite-duration amplitude
/// `−i ∫ dt f(t−Δt) e^{−iω_X(t−Δt)} e^{−iE_i t} e^{iS(t)} [D₀ − i(A−K)·D₁]`
/// by composite Gauss–Legendre over the envelope support.
#[allow(clippy::too_many_arguments)]
pub fn pulsed_amplitude<F: Fn(f64) -> f64>(
    dress: &Dressing,
    p: &Vec3,
    d0: Complex64,
    d1: &[Complex64; 3],
    omega_x: f64,
    e_i: f64,
    envelope: F,
    support: (f64, f64),
    delay: f64,
) -> Complex64 {
    let e_p = 0.5 * (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    let secular = e_p + dress.ponderomotive();
    let (t0, t1) = (support.0 + delay, support.1 + delay);
    let gl = GaussLegendre::new(16);
    // resolve the fastest of the detuning and the dressing oscillations
    let span = t1 - t0;
    let rate = (secular - omega_x - e_i).abs() + 3.0 * dress.omega + 1.0 / span.max(1e-300);
    let panels = ((span * rate / (2.0 * PI)) * 2.0).ceil().max(8.0) as usize;
    let h = span / panels as f64;
    let mut acc = ZERO;
    for k in 0..panels {
        let (ts, ws) = gl.mapped(t0 + k as f64 * h, t0 + (k + 1) as f64 * h);
        for (t, w) in ts.into_iter().zip(ws) {
            let f = envelope(t - delay);
            if f == 0.0 {
                continue;
            }
            let (s, v) = dress.sample(p, t);
            let bracket = d0 - I * (v[0] * d1[0] + v[1] * d1[1] + v[2] * d1[2]);
            let ph = secular * t + s - omega_x * (t - delay) - e_i * t;
            acc += w * f * Complex64::from_polar(1.0, ph) * bracket;
        }
    }
    -I * acc
}
