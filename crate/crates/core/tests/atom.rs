use num_complex::Complex64;
use slvw_core::atom::*;
use slvw_core::units::HARTREE_EV;
use std::f64::consts::PI;
use std::sync::Arc;

const H: Potential = Potential::Coulomb { z: 1.0 };

/// `arg Γ(1 + l + iη)` by Stirling's series after shifting the argument up by 30.
fn coulomb_phase_oracle(l: usize, eta: f64) -> f64 {
    let n = 30;
    let z = Complex64::new((1 + l + n) as f64, eta);
    let ln_g = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * z) - 1.0 / (360.0 * z.powi(3))
        + 1.0 / (1260.0 * z.powi(5));
    let shift: f64 = (1 + l..1 + l + n).map(|s| (eta / s as f64).atan()).sum();
    ln_g.im - shift
}

/// Gauss hypergeometric series, used only where it converges fast.
fn hyp2f1_series(a: Complex64, b: f64, c: f64, x: Complex64) -> Complex64 {
    let (mut term, mut sum) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
    for k in 0..400 {
        let kf = k as f64;
        term = term * (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * x;
        sum += term;
    }
    sum
}

/// `₂F₁(a, c+1; c; x) = (1 − x)^{−a−1} (1 − x + a x / c)`.
fn hyp2f1_shifted(a: Complex64, c: f64, x: Complex64) -> Complex64 {
    (1.0 - x).powc(-a - 1.0) * (1.0 - x + a * x / c)
}

/// `∫ u_1s r u_{E,1} dr` for hydrogen with energy-normalized `u_{E,1}`.
fn hydrogen_dipole_oracle(e: f64) -> f64 {
    let k = (2.0 * e).sqrt();
    let eta = -1.0 / k;
    // |Γ(2 + iη)|² = (1 + η²) πη / sinh(πη)
    let g2 = (1.0 + eta * eta) * PI * eta / (PI * eta).sinh();
    let c1 = 2.0 * (-PI * eta / 2.0).exp() * g2.sqrt() / 6.0;
    // F_1 = C_1 ρ² e^{−iρ} M(2 − iη, 4, 2iρ); Laplace transform of r⁴ e^{−r} F_1(kr)
    let lam = Complex64::new(1.0, k);
    let x = Complex64::new(0.0, 2.0 * k) / lam;
    let a = Complex64::new(2.0, -eta);
    let integral = 2.0 * c1 * k * k * 24.0 * lam.powi(-5) * hyp2f1_shifted(a, 4.0, x);
    assert!(integral.im.abs() < 1e-10 * integral.re.abs());
    (2.0 / (PI * k)).sqrt() * integral.re
}

fn riccati_bessel(l: usize, x: f64) -> f64 {
    // x j_l(x) by upward recurrence, fine for x > l
    let (mut a, mut b) = (x.sin(), x.sin() / x - x.cos());
    if l == 0 {
        return a;
    }
    for n in 1..l {
        let c = (2 * n + 1) as f64 / x * b - a;
        a = b;
        b = c;
    }
    b
}

fn coarse() -> Arc<RadialGrid> {
    Arc::new(RadialGrid::coarse())
}

#[test]
fn helium_potential_shape() {
    let mut prev = f64::NEG_INFINITY;
    for k in 0..=4990 {
        let r = 0.1 + 0.01 * k as f64;
        let v = model_potential(r).unwrap();
        assert!(v > prev, "not increasing at r = {r}");
        prev = v;
    }
    for r in [80.0, 200.0, 1000.0] {
        assert!((r * model_potential(r).unwrap() + 1.0).abs() < 1e-12);
    }
    assert!(model_potential(-1.0).is_err());
    assert_eq!(H.value(4.0), -0.25);
}

#[test]
fn helium_ground_state_energy() {
    let grid = Arc::new(RadialGrid::standard());
    let b = solve_bound_1s(&Potential::TongLinHelium, grid.clone()).unwrap();
    let target = -HE_IONIZATION_EV / HARTREE_EV;
    assert!(((b.energy - target) / target).abs() < 5e-3, "E = {} eV", b.energy * HARTREE_EV);
    assert!((grid.integrate(|i| b.u[i] * b.u[i]) - 1.0).abs() < 1e-8);
    let nodes = b.u.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    assert_eq!(nodes, 0);
}

#[test]
fn hydrogen_eigenvalues() {
    let grid = coarse();
    let b = solve_bound_1s(&H, grid.clone()).unwrap();
    assert!((b.energy + 0.5).abs() < 1e-6);
    let b2 = solve_bound(&H, grid.clone(), 0, 1).unwrap();
    assert!((b2.energy + 0.125).abs() < 1e-6);
    let p = solve_bound(&H, grid.clone(), 1, 0).unwrap();
    assert!((p.energy + 0.125).abs() < 1e-6);
    // 2p: u = r² e^{−r/2} / √24
    for i in (0..grid.len()).step_by(977) {
        let r = grid.r[i];
        assert!((p.u[i] - r * r * (-r / 2.0).exp() / 24f64.sqrt()).abs() < 1e-5);
    }
}

#[test]
fn coulomb_phases_match_the_analytic_value() {
    let grid = Arc::new(RadialGrid::standard());
    for e in [0.1f64, 0.5, 1.3] {
        let c = solve_continuum(&H, grid.clone(), e, 6).unwrap();
        let eta = -1.0 / (2.0 * e).sqrt();
        for l in 0..=6 {
            let d = c.delta[l] - coulomb_phase_oracle(l, eta);
            let d = (d + PI).rem_euclid(2.0 * PI) - PI;
            assert!(d.abs() < 1e-6, "E={e} l={l}: {d:e}");
        }
    }
}

#[test]
fn free_waves_are_riccati_bessel() {
    let grid = Arc::new(RadialGrid::standard());
    let e: f64 = 0.7;
    let k = (2.0 * e).sqrt();
    let c = solve_continuum(&Potential::Free, grid.clone(), e, 4).unwrap();
    let norm = (2.0 / (PI * k)).sqrt();
    for l in 0..=4 {
        assert!(c.delta[l].abs() < 1e-6);
        for i in (0..grid.len()).step_by(911) {
            let r = grid.r[i];
            // beyond r ≈ 100 the log grid gets too sparse per wavelength
            if k * r < l as f64 + 1.0 || r > 100.0 {
                continue;
            }
            assert!((c.u[l][i] - norm * riccati_bessel(l, k * r)).abs() < 1e-5 * norm, "l={l} r={r}");
        }
    }
}

#[test]
fn helium_short_range_shifts_fall_with_l() {
    let c = solve_continuum(&Potential::TongLinHelium, coarse(), 0.2, 10).unwrap();
    for w in c.short_range[..=5].windows(2) {
        assert!(w[1] < w[0]);
    }
    assert!(c.short_range[5].abs() < 1e-2);
    // the slowly decaying repulsive tail term takes over beyond l = 6
    assert!(c.short_range[6..].iter().all(|d| d.abs() < 1e-3));
    assert!(c.delta.iter().all(|d| d.is_finite()));
}

#[test]
fn phase_shifts_converge_under_grid_refinement() {
    let shift = |h: f64| {
        let g = Arc::new(RadialGrid::new(1e-6, 500.0, h).unwrap());
        solve_continuum(&Potential::TongLinHelium, g, 0.8, 3).unwrap().short_range
    };
    let (a, b, c) = (shift(1e-3), shift(5e-4), shift(2.5e-4));
    for l in 0..=3 {
        // fourth-order convergence, then Richardson estimates from both pairs agree
        let ratio = (a[l] - b[l]) / (b[l] - c[l]);
        assert!((12.0..20.0).contains(&ratio), "l={l}: ratio {ratio}");
        let (r1, r2) = (b[l] + (b[l] - a[l]) / 15.0, c[l] + (c[l] - b[l]) / 15.0);
        assert!((r1 - r2).abs() < 1e-6 * r2.abs(), "l={l}: {r1} vs {r2}");
    }
}

#[test]
fn hypergeometric_reduction_agrees_with_series() {
    let a = Complex64::new(2.0, 0.8);
    for x in [Complex64::new(0.1, 0.2), Complex64::new(-0.3, 0.25)] {
        assert!((hyp2f1_series(a, 5.0, 4.0, x) - hyp2f1_shifted(a, 4.0, x)).norm() < 1e-13);
    }
}

#[test]
fn hydrogen_dipole_matches_closed_form() {
    let grid = Arc::new(RadialGrid::standard());
    let b = solve_bound_1s(&H, grid.clone()).unwrap();
    for e in [0.5, 0.2, 1.5] {
        let c = solve_continuum(&H, grid.clone(), e, 2).unwrap();
        let d = radial_integral(&b, &c, 1, 1).unwrap();
        let oracle = hydrogen_dipole_oracle(e);
        assert!((d.abs() / oracle.abs() - 1.0).abs() < 1e-4, "E={e}: {d} vs {oracle}");
    }
}

#[test]
fn bound_and_continuum_are_orthogonal() {
    let grid = Arc::new(RadialGrid::standard());
    for pot in [H, Potential::TongLinHelium] {
        let b = solve_bound_1s(&pot, grid.clone()).unwrap();
        for e in [0.3, 1.0, 2.2] {
            let c = solve_continuum(&pot, grid.clone(), e, 0).unwrap();
            assert!(radial_integral(&b, &c, 0, 0).unwrap().abs() < 1e-6);
        }
    }
}

#[test]
fn dipole_channels_follow_the_polarization() {
    let grid = coarse();
    let b = solve_bound_1s(&Potential::TongLinHelium, grid.clone()).unwrap();
    let c = solve_continuum(&Potential::TongLinHelium, grid.clone(), 1.2, 4).unwrap();
    let only = |pol, m: i32| {
        let ch = xuv_matrix_element(&b, &c, pol).unwrap();
        assert_eq!(ch.len(), 1);
        assert_eq!((ch[0].l, ch[0].m), (1, m));
    };
    only(XuvPolarization::Circular { sigma: 1 }, 1);
    only(XuvPolarization::Circular { sigma: -1 }, -1);
    only(XuvPolarization::LinearZ, 0);

    let phi0 = 0.7;
    let ch = xuv_matrix_element(&b, &c, XuvPolarization::LinearRadial { phi0 }).unwrap();
    assert!(ch.iter().all(|c| c.l == 1 && c.m != 0) && ch.len() == 2);
    let (p, n) = (ch.iter().find(|c| c.m == 1).unwrap(), ch.iter().find(|c| c.m == -1).unwrap());
    let ratio = p.amplitude / n.amplitude;
    assert!((ratio + Complex64::from_polar(1.0, -2.0 * phi0)).norm() < 1e-12);

    // Angular pattern ε·n̂ regardless of harmonic phase conventions.
    let r1 = radial_integral(&b, &c, 1, 1).unwrap();
    let y00 = 1.0 / (4.0 * PI).sqrt();
    let radial = Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, c.delta[1]) * r1 * y00;
    for pol in
        [XuvPolarization::Circular { sigma: 1 }, XuvPolarization::LinearZ, XuvPolarization::LinearRadial { phi0 }]
    {
        let ch = xuv_matrix_element(&b, &c, pol).unwrap();
        let eps = pol.vector();
        for (th, ph) in [(0.3f64, 0.2f64), (1.2, 2.0), (2.5, 4.4)] {
            let nv = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
            let expect: Complex64 = (0..3).map(|j| eps[j] * nv[j]).sum::<Complex64>() * radial;
            assert!((contract_channels(&c, &ch, th, ph) - expect).norm() < 1e-10 * radial.norm());
        }
    }
}

#[test]
fn no_dipole_path_to_d_waves_from_s() {
    let grid = coarse();
    let b = solve_bound_1s(&H, grid.clone()).unwrap();
    let c = solve_continuum(&H, grid, 0.6, 3).unwrap();
    for pol in
        [XuvPolarization::Circular { sigma: 1 }, XuvPolarization::LinearZ, XuvPolarization::LinearRadial { phi0: 2.0 }]
    {
        assert!(xuv_matrix_element(&b, &c, pol).unwrap().iter().all(|ch| ch.l == 1));
    }
}

#[test]
fn invalid_requests_are_errors() {
    let grid = coarse();
    assert!(solve_continuum(&H, grid.clone(), -0.1, 2).is_err());
    assert!(solve_bound_1s(&Potential::Free, grid.clone()).is_err());
    let short = Arc::new(RadialGrid::new(1e-4, 50.0, 1e-3).unwrap());
    assert!(solve_continuum(&H, short, 0.5, 2).is_err());
    let b = solve_bound_1s(&H, grid.clone()).unwrap();
    let c = solve_continuum(&H, grid, 0.5, 1).unwrap();
    assert!(radial_integral(&b, &c, 3, 1).is_err());
}

#[test]
fn continuum_threshold_is_the_matching_limit() {
    for (pot, grid) in [
        (Potential::TongLinHelium, RadialGrid::coarse()),
        (H, RadialGrid::standard()),
        (Potential::Free, RadialGrid::coarse()),
    ] {
        let grid = Arc::new(grid);
        let e = continuum_threshold(&pot, &grid, 2);
        assert!(solve_continuum(&pot, grid.clone(), 1.001 * e, 2).is_ok(), "{pot:?} {e}");
        assert!(solve_continuum(&pot, grid.clone(), 0.999 * e, 2).is_err(), "{pot:?} {e}");
    }
}
