//! Single-active-electron atomic structure: model potentials, the bound
//! valence orbital, energy-normalized continuum partial waves and XUV dipole
//! matrix elements.
//!
//! Radial equations are solved with Numerov's method on a logarithmic grid
//! `r = e^x`, where `u(r) = r^{1/2} v(x)` turns the radial equation into
//! `v'' = [2r²(V − E) + (l + ½)²] v` without a first-derivative term.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::CVec3;
use crate::special::{coulomb_fg_asymptotic, coulomb_phase, lm_index, SphereQuadrature};

/// Helium parameters of the empirical single-active-electron potential of
/// Tong and Lin, J. Phys. B 38, 2593 (2005), Table 1.
pub mod tong_lin_he {
    pub const ZC: f64 = 1.0;
    pub const A1: f64 = 1.231;
    pub const A2: f64 = 0.662;
    pub const A3: f64 = -1.325;
    pub const A4: f64 = 1.236;
    pub const A5: f64 = -0.231;
    pub const A6: f64 = 0.480;
}

/// First ionization potential of helium, eV.
pub const HE_IONIZATION_EV: f64 = 24.587;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
#[derive(Default)]
pub enum Potential {
    #[default]
    TongLinHelium,
    Coulomb {
        z: f64,
    },
    Free,
}

/// Helium model potential `V(r)` (a.u.).
pub fn model_potential(r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::input(format!("radius must be positive (got {r})")));
    }
    Ok(Potential::TongLinHelium.value(r))
}

impl Potential {
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            Potential::TongLinHelium => {
                use tong_lin_he::*;
                -(ZC + A1 * (-A2 * r).exp() + A3 * r * (-A4 * r).exp() + A5 * (-A6 * r).exp()) / r
            }
            Potential::Coulomb { z } => -z / r,
            Potential::Free => 0.0,
        }
    }

    /// Effective charge seen at `r → 0`.
    pub fn core_charge(&self) -> f64 {
        match *self {
            Potential::TongLinHelium => {
                use tong_lin_he::*;
                ZC + A1 + A5
            }
            Potential::Coulomb { z } => z,
            Potential::Free => 0.0,
        }
    }

    /// Charge seen at `r → ∞`.
    pub fn asymptotic_charge(&self) -> f64 {
        match *self {
            Potential::TongLinHelium => tong_lin_he::ZC,
            Potential::Coulomb { z } => z,
            Potential::Free => 0.0,
        }
    }

    /// Stable identifier used to key cached radial solutions.
    pub fn id(&self) -> String {
        match *self {
            Potential::TongLinHelium => "tong-lin-he".to_string(),
            Potential::Coulomb { z } => format!("coulomb:{z:.17e}"),
            Potential::Free => "free".to_string(),
        }
    }
}

/// Logarithmic radial grid `r_i = exp(x0 + i h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub x0: f64,
    pub h: f64,
    pub r: Vec<f64>,
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, h: f64) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min && h > 0.0) || !r_max.is_finite() {
            return Err(Error::input(format!("invalid radial grid r_min={r_min}, r_max={r_max}, h={h}")));
        }
        let x0 = r_min.ln();
        let n = ((r_max.ln() - x0) / h).ceil() as usize + 1;
        if n > 5_000_000 {
            return Err(Error::input("radial grid too large"));
        }
        let r = (0..n).map(|i| (x0 + i as f64 * h).exp()).collect();
        Ok(RadialGrid { x0, h, r })
    }

    /// `r ∈ [1e-6, 500]` a.u. with step `5e-4` in `ln r`.
    pub fn standard() -> Self {
        Self::new(1e-6, 500.0, 5e-4).expect("standard grid parameters are valid")
    }

    /// Coarser grid for quick runs and tests.
    pub fn coarse() -> Self {
        Self::new(1e-5, 160.0, 1.5e-3).expect("coarse grid parameters are valid")
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap_or(&0.0)
    }

    pub fn hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.x0.to_le_bytes());
        h.update(self.h.to_le_bytes());
        h.update((self.r.len() as u64).to_le_bytes());
        h.finalize().into()
    }

    /// `∫ f(r) dr` for samples on the grid (Simpson in `x`, `dr = r dx`).
    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        let n = self.r.len();
        if n < 3 {
            return 0.0;
        }
        let mut s = 0.0;
        let last = if (n - 1).is_multiple_of(2) { n - 1 } else { n - 2 };
        for i in 0..=last {
            let w = if i == 0 || i == last {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            s += w * f(i) * self.r[i];
        }
        s *= self.h / 3.0;
        if last != n - 1 {
            // trailing interval by trapezoid
            s += 0.5 * self.h * (f(n - 2) * self.r[n - 2] + f(n - 1) * self.r[n - 1]);
        }
        s
    }
}

fn q_function(grid: &RadialGrid, pot: &Potential, l: usize, e: f64) -> Vec<f64> {
    let c = (l as f64 + 0.5).powi(2);
    grid.r.iter().map(|&r| 2.0 * r * r * (pot.value(r) - e) + c).collect()
}

/// Outward Numerov for `v'' = Q v` up to index `end` (inclusive).
fn numerov_outward(h: f64, q: &[f64], v0: f64, v1: f64, end: usize) -> Vec<f64> {
    let h12 = h * h / 12.0;
    let mut v = vec![0.0; q.len()];
    v[0] = v0;
    v[1] = v1;
    for n in 1..end {
        let a = 1.0 - h12 * q[n + 1];
        let b = 2.0 * (1.0 + 5.0 * h12 * q[n]) * v[n];
        let c = (1.0 - h12 * q[n - 1]) * v[n - 1];
        v[n + 1] = (b - c) / a;
    }
    v
}

fn regular_start(grid: &RadialGrid, pot: &Potential, l: usize) -> (f64, f64) {
    let z = pot.core_charge();
    let s = l as f64 + 0.5;
    let f = |r: f64| r.powf(s) * (1.0 - z * r / (l as f64 + 1.0));
    (f(grid.r[0]), f(grid.r[1]))
}

#[derive(Debug, Clone)]
pub struct BoundState {
    pub energy: f64,
    pub l: usize,
    /// `u(r)` on the grid, normalized to `∫u² dr = 1`.
    pub u: Vec<f64>,
    pub grid: Arc<RadialGrid>,
    pub potential: Potential,
}

/// Lowest `l = 0` eigenstate of `pot`.
pub fn solve_bound_1s(pot: &Potential, grid: Arc<RadialGrid>) -> Result<BoundState> {
    solve_bound(pot, grid, 0, 0)
}

/// Bound state with `l` and `nodes` radial nodes by node-count bisection.
pub fn solve_bound(pot: &Potential, grid: Arc<RadialGrid>, l: usize, nodes: usize) -> Result<BoundState> {
    if matches!(pot, Potential::Free) {
        return Err(Error::input("the free potential has no bound states"));
    }
    // restrict shooting to r ≤ 80 a.u.; deeper tails underflow anyway
    let end = grid.r.iter().position(|&r| r > 80.0).unwrap_or(grid.len()) - 1;
    let (v0, v1) = regular_start(&grid, pot, l);
    let count = |e: f64| -> usize {
        let q = q_function(&grid, pot, l, e);
        let v = numerov_outward(grid.h, &q, v0, v1, end);
        v[..=end].windows(2).filter(|w| w[0] * w[1] < 0.0 || (w[1] == 0.0 && w[0] != 0.0)).count()
    };
    let z = pot.core_charge().max(pot.asymptotic_charge());
    let mut lo = -z * z;
    let mut hi = -1e-6;
    if count(lo) > nodes || count(hi) <= nodes {
        return Err(Error::no_convergence("bound state", format!("no eigenvalue bracket for l={l}, nodes={nodes}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count(mid) > nodes {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-14 * mid.abs() {
            break;
        }
    }
    let e = 0.5 * (lo + hi);
    let q = q_function(&grid, pot, l, e);
    let out = numerov_outward(grid.h, &q, v0, v1, end);
    // inward solution from `end`, glued at the outer classical turning point
    let h12 = grid.h * grid.h / 12.0;
    let mut inw = vec![0.0; end + 1];
    inw[end] = 0.0;
    inw[end - 1] = 1e-200;
    let turn = (1..end)
        .rev()
        .find(|&i| grid.r[i] * grid.r[i] * 2.0 * (pot.value(grid.r[i]) - e) < 0.0)
        .unwrap_or(end / 2)
        .max(2);
    for n in (turn..end).rev() {
        let a = 1.0 - h12 * q[n - 1];
        let b = 2.0 * (1.0 + 5.0 * h12 * q[n]) * inw[n];
        let c = (1.0 - h12 * q[n + 1]) * inw[n + 1];
        inw[n - 1] = (b - c) / a;
        if inw[n - 1].abs() > 1e200 {
            for x in inw[n - 1..].iter_mut() {
                *x *= 1e-200;
            }
        }
    }
    let scale = out[turn] / inw[turn];
    let mut u = vec![0.0; grid.len()];
    for i in 0..=end {
        let v = if i <= turn { out[i] } else { inw[i] * scale };
        u[i] = v * grid.r[i].sqrt();
    }
    let norm = grid.integrate(|i| u[i] * u[i]).sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::no_convergence("bound state", "normalization failed".to_string()));
    }
    // positive near the origin
    let sign = if u[1] < 0.0 { -1.0 } else { 1.0 };
    for x in u.iter_mut() {
        *x *= sign / norm;
    }
    Ok(BoundState { energy: e, l, u, grid, potential: *pot })
}

/// Continuum partial waves `u_{E,l}`, energy-normalized:
/// `u → sqrt(2/(πk)) sin(kr − η ln 2kr − lπ/2 + δ_l)` with `δ_l` the total
/// phase (Coulomb plus short-range).
#[derive(Debug, Clone)]
pub struct ContinuumWave {
    pub energy: f64,
    pub k: f64,
    pub eta: f64,
    pub l_max: usize,
    pub u: Vec<Vec<f64>>,
    /// Total phase shifts `σ_l + δ̂_l`.
    pub delta: Vec<f64>,
    /// Short-range parts `δ̂_l` relative to the asymptotic Coulomb functions.
    pub short_range: Vec<f64>,
    pub grid: Arc<RadialGrid>,
    pub potential: Potential,
}

impl ContinuumWave {
    /// Incoming-wave coefficient `i^l e^{−iδ_l}` of the `ψ⁻` expansion.
    pub fn incoming_coefficient(&self, l: usize) -> Complex64 {
        Complex64::i().powu(l as u32) * Complex64::from_polar(1.0, -self.delta[l])
    }
}

/// Matching radius for partial wave `l`; the Numerov phase error grows like
/// r⁴ on a logarithmic grid, so match as close in as the asymptotic series allows.
fn matching_radius(l: usize, k: f64, eta: f64) -> f64 {
    ((2.0 * (l as f64 + eta.abs()) + 30.0) / k).max(60.0)
}

/// Lowest energy [`solve_continuum`] can match up to `l_max` on `grid`.
pub fn continuum_threshold(pot: &Potential, grid: &RadialGrid, l_max: usize) -> f64 {
    // r_match + π/(2k) ≤ r_max, solved for x = 1/k
    let r = grid.r_max();
    let z = pot.asymptotic_charge().abs();
    let b = 2.0 * l_max as f64 + 30.0 + 0.5 * PI;
    let x_far = if z > 0.0 { (-b + (b * b + 8.0 * z * r).sqrt()) / (4.0 * z) } else { r / b };
    let x_near = (r - 60.0).max(0.0) / (0.5 * PI);
    let x = x_far.min(x_near);
    if x > 0.0 {
        // a hair above the boundary so the strict test in the solver passes
        0.5 / (x * x) * (1.0 + 1e-9)
    } else {
        f64::INFINITY
    }
}

pub fn solve_continuum(pot: &Potential, grid: Arc<RadialGrid>, e: f64, l_max: usize) -> Result<ContinuumWave> {
    if !(e > 0.0) || !e.is_finite() {
        return Err(Error::input(format!("continuum energy must be positive (got {e})")));
    }
    if grid.r_max() < 100.0 {
        return Err(Error::input("continuum matching needs r_max ≥ 100 a.u."));
    }
    let k = (2.0 * e).sqrt();
    let eta = -pot.asymptotic_charge() / k;
    let n = grid.len();
    let norm = (2.0 / (PI * k)).sqrt();
    let mut us = Vec::with_capacity(l_max + 1);
    let mut delta = Vec::with_capacity(l_max + 1);
    let mut short = Vec::with_capacity(l_max + 1);
    for l in 0..=l_max {
        let quarter = 0.5 * PI / k;
        let r_match = matching_radius(l, k, eta);
        if r_match + quarter > grid.r_max() {
            return Err(Error::no_convergence(
                "continuum matching",
                format!("grid too short to match l = {l} at E = {e:.4}"),
            ));
        }
        let i1 = grid.r.iter().position(|&r| r >= r_match).unwrap_or(n - 2);
        let i2 = grid.r.iter().position(|&r| r >= grid.r[i1] + quarter).unwrap_or(n - 1);
        let (r1, r2) = (grid.r[i1], grid.r[i2]);
        let q = q_function(&grid, pot, l, e);
        let (v0, v1) = regular_start(&grid, pot, l);
        let mut v = numerov_outward(grid.h, &q, v0, v1, n - 1);
        // rescale to avoid under/overflow for large l
        let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !(vmax > 0.0) || !vmax.is_finite() {
            return Err(Error::no_convergence("continuum", format!("integration failed for l = {l}")));
        }
        for x in v.iter_mut() {
            *x /= vmax;
        }
        let u1 = v[i1] * r1.sqrt();
        let u2 = v[i2] * r2.sqrt();
        let (f1, g1) = coulomb_fg_asymptotic(l, eta, k * r1);
        let (f2, g2) = coulomb_fg_asymptotic(l, eta, k * r2);
        let dh = (u1 * f2 - u2 * f1).atan2(u2 * g1 - u1 * g2);
        let (s, c) = dh.sin_cos();
        let amp_den = c * f1 + s * g1;
        let amp_den2 = c * f2 + s * g2;
        let amp = if amp_den.abs() > amp_den2.abs() { u1 / amp_den } else { u2 / amp_den2 };
        let scale = norm / amp;
        let u: Vec<f64> = v.iter().zip(&grid.r).map(|(v, r)| v * r.sqrt() * scale).collect();
        // keep δ̂ in (−π/2, π/2] by absorbing signs into the normalization
        let (dh, u) = if dh > PI / 2.0 {
            (dh - PI, u.into_iter().map(|x| -x).collect())
        } else if dh <= -PI / 2.0 {
            (dh + PI, u.into_iter().map(|x| -x).collect())
        } else {
            (dh, u)
        };
        short.push(dh);
        delta.push(coulomb_phase(l, eta) + dh);
        us.push(u);
    }
    Ok(ContinuumWave { energy: e, k, eta, l_max, u: us, delta, short_range: short, grid, potential: *pot })
}

/// `∫ u_b(r) r^power u_{E,l}(r) dr`.
pub fn radial_integral(bound: &BoundState, cont: &ContinuumWave, l: usize, power: i32) -> Result<f64> {
    if l > cont.l_max {
        return Err(Error::input(format!("channel l = {l} exceeds l_max = {}", cont.l_max)));
    }
    if !Arc::ptr_eq(&bound.grid, &cont.grid) && *bound.grid != *cont.grid {
        return Err(Error::input("bound and continuum states live on different grids"));
    }
    let g = &bound.grid;
    let u = &cont.u[l];
    Ok(g.integrate(|i| bound.u[i] * g.r[i].powi(power) * u[i]))
}

/// XUV polarization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum XuvPolarization {
    Circular {
        sigma: i32,
    },
    LinearZ,
    /// Along `ê_ρ(φ0)`, i.e. `(cos φ0, sin φ0, 0)`.
    LinearRadial {
        phi0: f64,
    },
}

impl XuvPolarization {
    pub fn vector(&self) -> CVec3 {
        let z = Complex64::new(0.0, 0.0);
        match *self {
            XuvPolarization::Circular { sigma } => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                [s.into(), Complex64::new(0.0, sigma as f64 * s), z]
            }
            XuvPolarization::LinearZ => [z, z, 1.0.into()],
            XuvPolarization::LinearRadial { phi0 } => [phi0.cos().into(), phi0.sin().into(), z],
        }
    }
}

/// One partial-wave channel of a transition amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub l: usize,
    pub m: i32,
    pub amplitude: Complex64,
}

/// Angular coefficients `∫ Y*_lm(r̂) g(r̂) Y_00 dΩ`, `l ≤ lmax`.
fn angular_projection(lmax: usize, g: impl Fn(&[f64; 3]) -> Complex64) -> Vec<Complex64> {
    let quad = SphereQuadrature::for_lmax(lmax + 2);
    let y00 = 1.0 / (4.0 * PI).sqrt();
    let vals: Vec<Complex64> = quad
        .nodes()
        .into_iter()
        .map(|(t, p, _)| {
            let n = [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
            g(&n) * y00
        })
        .collect();
    let mut c = quad.project(lmax, &vals);
    for x in c.iter_mut() {
        if x.norm() < 1e-14 {
            *x = Complex64::new(0.0, 0.0);
        }
    }
    c
}

/// Channels of `⟨u_{E,l} Y_lm| r·ε |1s⟩` (dipole operator, no `ψ⁻` phases).
pub fn xuv_matrix_element(bound: &BoundState, cont: &ContinuumWave, pol: XuvPolarization) -> Result<Vec<Channel>> {
    if bound.l != 0 {
        return Err(Error::input("dipole channels are tabulated for an s initial state only"));
    }
    if cont.l_max < 1 {
        return Err(Error::input("continuum must include l = 1"));
    }
    let eps = pol.vector();
    let ang = angular_projection(1, |n| eps[0] * n[0] + eps[1] * n[1] + eps[2] * n[2]);
    let r1 = radial_integral(bound, cont, 1, 1)?;
    let mut out = Vec::new();
    for m in -1..=1 {
        let c = ang[lm_index(1, m)];
        if c.norm() > 0.0 {
            out.push(Channel { l: 1, m, amplitude: c * r1 });
        }
    }
    Ok(out)
}

/// Channels of `⟨u_{E,l} Y_lm| r_j (r·ε) |1s⟩` for `j = x, y, z` (l = 0, 2).
pub fn second_order_channels(
    bound: &BoundState,
    cont: &ContinuumWave,
    pol: XuvPolarization,
) -> Result<[Vec<Channel>; 3]> {
    if cont.l_max < 2 {
        return Err(Error::input("continuum must include l = 2"));
    }
    let eps = pol.vector();
    let r2 = [radial_integral(bound, cont, 0, 2)?, 0.0, radial_integral(bound, cont, 2, 2)?];
    let mut out: [Vec<Channel>; 3] = Default::default();
    for (j, slot) in out.iter_mut().enumerate() {
        let ang = angular_projection(2, |n| n[j] * (eps[0] * n[0] + eps[1] * n[1] + eps[2] * n[2]));
        for l in [0usize, 2] {
            for m in -(l as i32)..=(l as i32) {
                let c = ang[lm_index(l, m)];
                if c.norm() > 0.0 {
                    slot.push(Channel { l, m, amplitude: c * r2[l] });
                }
            }
        }
    }
    Ok(out)
}

/// Contract channels with the outgoing `ψ⁻_p` angular factors:
/// `Σ (−i)^l e^{iδ_l} Y_lm(p̂) · amplitude`.
pub fn contract_channels(cont: &ContinuumWave, channels: &[Channel], theta: f64, phi: f64) -> Complex64 {
    let lmax = channels.iter().map(|c| c.l).max().unwrap_or(0);
    let y = crate::special::spherical_harmonics_upto(lmax, theta, phi);
    channels.iter().map(|c| cont.incoming_coefficient(c.l).conj() * y[lm_index(c.l, c.m)] * c.amplitude).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_limits() {
        let r = 60.0;
        assert!((r * model_potential(r).unwrap() + 1.0).abs() < 1e-12);
        assert!(model_potential(0.0).is_err());
        assert!((Potential::TongLinHelium.core_charge() - 2.0).abs() < 1e-12);
        assert_eq!(Potential::Coulomb { z: 1.0 }.value(2.0), -0.5);
    }

    #[test]
    fn hydrogen_ground_state() {
        let grid = Arc::new(RadialGrid::coarse());
        let b = solve_bound_1s(&Potential::Coulomb { z: 1.0 }, grid.clone()).unwrap();
        assert!((b.energy + 0.5).abs() < 1e-6, "{}", b.energy);
        let n = grid.integrate(|i| b.u[i] * b.u[i]);
        assert!((n - 1.0).abs() < 1e-8);
        // u = 2 r e^{-r}
        let i = grid.r.iter().position(|&r| r > 1.0).unwrap();
        let r = grid.r[i];
        assert!((b.u[i] - 2.0 * r * (-r).exp()).abs() < 1e-5);
    }

    #[test]
    fn free_waves_have_zero_shift() {
        let grid = Arc::new(RadialGrid::coarse());
        let c = solve_continuum(&Potential::Free, grid, 0.3, 4).unwrap();
        for d in &c.delta {
            assert!(d.abs() < 1e-5, "{d}");
        }
    }
}
