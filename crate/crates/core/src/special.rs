//! Special functions and quadrature rules used across the crate.
//!
//! Everything here is plain `f64`/[`Complex64`] numerics: Gauss-Legendre
//! nodes, integer-order Bessel functions, the Coulomb phase, asymptotic
//! Coulomb wave functions and complex spherical harmonics.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, refined by Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(mid + half * x)).sum::<f64>() * half
    }

    /// Composite rule: `panels` equal sub-intervals of `[a, b]`.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + k as f64 * h;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        (self.nodes.iter().map(|x| mid + half * x).collect(), self.weights.iter().map(|w| w * half).collect())
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Bessel functions `J_0(x) ..= J_nmax(x)` by Miller's backward recurrence.
pub fn bessel_j_upto(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let start = {
        let base = nmax.max(ax as usize) as f64;
        let m = (base + 20.0 + 10.0 * base.sqrt()) as usize;
        m + (m % 2)
    };
    let mut jp1 = 0.0;
    let mut j = 1e-300;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let jm1 = 2.0 * k as f64 / ax * j - jp1;
        jp1 = j;
        j = jm1;
        let idx = k - 1;
        if idx <= nmax {
            out[idx] = j;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * j;
        }
        // Rescale to dodge overflow.
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    norm += j;
    for v in out.iter_mut() {
        *v /= norm;
    }
    if x < 0.0 {
        for (n, v) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// `J_n(x)` for any integer order.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let table = bessel_j_upto(n.unsigned_abs() as usize, x);
    let v = table[n.unsigned_abs() as usize];
    if n < 0 && n % 2 != 0 {
        -v
    } else {
        v
    }
}

/// `ln Γ(z)` for `Re z > 0` via Stirling's series after upward shifting.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    let shift = 16usize;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut w = z;
    for _ in 0..shift {
        acc += w.ln();
        w += 1.0;
    }
    let inv = 1.0 / w;
    let inv2 = inv * inv;
    let series =
        inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
    (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series - acc
}

/// Coulomb phase `σ_l(η) = arg Γ(l + 1 + iη)` (not reduced modulo 2π).
pub fn coulomb_phase(l: usize, eta: f64) -> f64 {
    ln_gamma_complex(Complex64::new(l as f64 + 1.0, eta)).im
}

/// Regular and irregular Coulomb functions `(F_l, G_l)` at large `ρ` from the
/// asymptotic series of `H⁺ = G + iF`. Accurate once `ρ ≫ l, |η|`.
pub fn coulomb_fg_asymptotic(l: usize, eta: f64, rho: f64) -> (f64, f64) {
    let lf = l as f64;
    let theta = rho - eta * (2.0 * rho).ln() - lf * PI / 2.0 + coulomb_phase(l, eta);
    let a = Complex64::new(1.0 + lf, eta);
    let b = Complex64::new(-lf, eta);
    let denom = Complex64::new(0.0, 2.0 * rho);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut last = f64::INFINITY;
    for k in 0..200 {
        let kf = k as f64;
        term = term * (a + kf) * (b + kf) / ((kf + 1.0) * denom);
        let mag = term.norm();
        if mag > last && kf > 2.0 * (lf + eta.abs()) + 2.0 {
            // asymptotic series started to diverge
            break;
        }
        sum += term;
        last = mag;
        if mag < 1e-17 * sum.norm() {
            break;
        }
    }
    let h = Complex64::from_polar(1.0, theta) * sum;
    (h.im, h.re)
}

/// Normalized associated Legendre values `P̄_l^m(x)` for `0 ≤ m ≤ l ≤ lmax`,
/// such that `Y_lm = P̄_l^m(cosθ) e^{imφ}` (Condon-Shortley phase included).
pub fn normalized_legendre(lmax: usize, x: f64) -> Vec<Vec<f64>> {
    let mut p = vec![vec![0.0; lmax + 1]; lmax + 1];
    let s = (1.0 - x * x).max(0.0).sqrt();
    p[0][0] = (1.0 / (4.0 * PI)).sqrt();
    for m in 1..=lmax {
        let mf = m as f64;
        p[m][m] = -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[m - 1][m - 1];
    }
    for m in 0..lmax {
        p[m + 1][m] = (2.0 * m as f64 + 3.0).sqrt() * x * p[m][m];
    }
    for m in 0..=lmax {
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            p[l][m] = a * (x * p[l - 1][m] - b * p[l - 2][m]);
        }
    }
    p
}

/// Complex spherical harmonic `Y_lm(θ, φ)`.
pub fn spherical_harmonic(l: usize, m: i32, theta: f64, phi: f64) -> Complex64 {
    let am = m.unsigned_abs() as usize;
    if am > l {
        return Complex64::new(0.0, 0.0);
    }
    let p = normalized_legendre(l, theta.cos());
    let y = p[l][am] * Complex64::from_polar(1.0, am as f64 * phi);
    if m < 0 {
        let sign = if am.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * y.conj()
    } else {
        y
    }
}

/// All `Y_lm(θ, φ)` for `l ≤ lmax`, indexed by [`lm_index`].
pub fn spherical_harmonics_upto(lmax: usize, theta: f64, phi: f64) -> Vec<Complex64> {
    let p = normalized_legendre(lmax, theta.cos());
    let mut out = vec![Complex64::new(0.0, 0.0); (lmax + 1) * (lmax + 1)];
    for l in 0..=lmax {
        for m in 0..=l {
            let y = p[l][m] * Complex64::from_polar(1.0, m as f64 * phi);
            out[lm_index(l, m as i32)] = y;
            if m > 0 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                out[lm_index(l, -(m as i32))] = sign * y.conj();
            }
        }
    }
    out
}

/// Product rule on the unit sphere: Gauss-Legendre in `cos θ`, uniform in `φ`.
/// Exact for spherical harmonic products up to degree `2n - 1` in θ and
/// `nphi - 1` in φ.
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    pub theta: Vec<f64>,
    pub theta_weights: Vec<f64>,
    pub nphi: usize,
}

impl SphereQuadrature {
    /// Rule resolving all `Y_lm` products with `l ≤ lmax`.
    pub fn for_lmax(lmax: usize) -> Self {
        let gl = GaussLegendre::new(lmax + 2);
        SphereQuadrature {
            theta: gl.nodes.iter().map(|x| x.acos()).collect(),
            theta_weights: gl.weights.clone(),
            nphi: 2 * lmax + 3,
        }
    }

    pub fn phi(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.nphi as f64
    }

    /// Every node `(θ, φ, weight)`.
    pub fn nodes(&self) -> Vec<(f64, f64, f64)> {
        let dphi = 2.0 * PI / self.nphi as f64;
        let mut out = Vec::with_capacity(self.theta.len() * self.nphi);
        for (t, w) in self.theta.iter().zip(&self.theta_weights) {
            for j in 0..self.nphi {
                out.push((*t, self.phi(j), w * dphi));
            }
        }
        out
    }

    /// Coefficients `c_lm = ∫ f(Ω) Y*_lm(Ω) dΩ` for `l ≤ lmax`, given `f` at
    /// [`Self::nodes`] in order.
    pub fn project(&self, lmax: usize, values: &[Complex64]) -> Vec<Complex64> {
        let mut c = vec![Complex64::new(0.0, 0.0); (lmax + 1) * (lmax + 1)];
        for ((t, ph, w), f) in self.nodes().into_iter().zip(values) {
            let y = spherical_harmonics_upto(lmax, t, ph);
            for (ci, yi) in c.iter_mut().zip(&y) {
                *ci += w * f * yi.conj();
            }
        }
        c
    }
}

/// Flat index of `(l, m)` in `l`-major order.
pub fn lm_index(l: usize, m: i32) -> usize {
    (l * l) + (m + l as i32) as usize
}

/// Wrap an angle into `[0, 2π)`.
pub fn wrap_2pi(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y >= 2.0 * PI {
        0.0
    } else {
        y
    }
}

/// Wrap an angle into `(-π, π]`.
pub fn wrap_pi(x: f64) -> f64 {
    let y = wrap_2pi(x);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(8);
        let v = gl.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-9);
        assert!((gl.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn bessel_values_against_tabulated() {
        // A&S table 9.1
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-14);
        assert!((bessel_j(2, 10.0) - 0.254_630_313_685_120_9).abs() < 1e-13);
        assert!((bessel_j(-3, 2.5) + bessel_j(3, 2.5)).abs() < 1e-15);
        assert!((bessel_j(5, -2.0) + bessel_j(5, 2.0)).abs() < 1e-15);
    }

    #[test]
    fn bessel_generating_identity() {
        for &x in &[0.3, 4.0, 25.0] {
            let j = bessel_j_upto(80, x);
            let s: f64 = j[0] * j[0] + 2.0 * j[1..].iter().map(|v| v * v).sum::<f64>();
            assert!((s - 1.0).abs() < 1e-13, "x={x} s={s}");
        }
    }

    #[test]
    fn ln_gamma_real_axis() {
        let v = ln_gamma_complex(Complex64::new(5.0, 0.0));
        assert!((v.re - 24f64.ln()).abs() < 1e-13);
        let h = ln_gamma_complex(Complex64::new(0.5, 0.0));
        assert!((h.re - PI.sqrt().ln()).abs() < 1e-13);
    }

    #[test]
    fn coulomb_phase_recursion() {
        let eta = -1.7;
        for l in 1..6 {
            let d = coulomb_phase(l, eta) - coulomb_phase(l - 1, eta);
            assert!((wrap_pi(d - (eta / l as f64).atan())).abs() < 1e-12);
        }
    }

    #[test]
    fn coulomb_asymptotic_free_limit() {
        let rho = 40.0;
        let (f, g) = coulomb_fg_asymptotic(1, 0.0, rho);
        assert!((f - (rho.sin() / rho - rho.cos())).abs() < 1e-13);
        assert!((g - (rho.cos() / rho + rho.sin())).abs() < 1e-13);
        // Wronskian F'G - FG' = 1 checked by central differences
        let h = 1e-4;
        let (f1, g1) = coulomb_fg_asymptotic(3, -1.4, 60.0 + h);
        let (f0, g0) = coulomb_fg_asymptotic(3, -1.4, 60.0 - h);
        let (f, g) = coulomb_fg_asymptotic(3, -1.4, 60.0);
        let w = (f1 - f0) / (2.0 * h) * g - f * (g1 - g0) / (2.0 * h);
        assert!((w - 1.0).abs() < 1e-7);
    }

    #[test]
    fn spherical_harmonics_orthonormal() {
        let gl = GaussLegendre::new(20);
        let nphi = 40;
        let lmax = 4;
        let n = (lmax + 1) * (lmax + 1);
        let mut gram = vec![Complex64::new(0.0, 0.0); n * n];
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            for k in 0..nphi {
                let phi = 2.0 * PI * k as f64 / nphi as f64;
                let y = spherical_harmonics_upto(lmax, x.acos(), phi);
                let dw = w * 2.0 * PI / nphi as f64;
                for a in 0..n {
                    for b in 0..n {
                        gram[a * n + b] += y[a].conj() * y[b] * dw;
                    }
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                let target = if a == b { 1.0 } else { 0.0 };
                assert!((gram[a * n + b] - target).norm() < 1e-12);
            }
        }
        let y = spherical_harmonic(1, 1, 0.7, 0.3);
        let expect = -(3.0 / (8.0 * PI)).sqrt() * 0.7f64.sin() * Complex64::from_polar(1.0, 0.3);
        assert!((y - expect).norm() < 1e-14);
    }
}
