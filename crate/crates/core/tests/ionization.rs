use num_complex::Complex64;
use proptest::prelude::*;
use slvw_core::atom::{Potential, RadialGrid, XuvPolarization};
use slvw_core::fields::ValidityPolicy;
use slvw_core::io::RadialCache;
use slvw_core::ionization::*;
use slvw_core::special::GaussLegendre;
use slvw_core::units::SPEED_OF_LIGHT;
use slvw_core::{AtomPosition, BeamSpec, MomentumPoint};
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

const W: f64 = 0.057;
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn helium() -> &'static Target {
    static T: OnceLock<Target> = OnceLock::new();
    T.get_or_init(|| Target::new(Potential::TongLinHelium, Arc::new(RadialGrid::coarse())).unwrap())
}

fn circular() -> XuvSpec {
    XuvSpec { omega: 1.1, polarization: XuvPolarization::Circular { sigma: 1 } }
}

fn soft(b: BeamSpec) -> BeamSpec {
    b.with_validity(ValidityPolicy::Soft, None)
}

/// Two-colour SFA with the plane-wave Volkov state to first order in 1/c:
/// phase `(1 + p_z/c) p·∫A`, kinematic momentum `p + A + ẑ (p·A)/c`.
fn plane_wave_sfa(a0: f64, p: &[f64; 3], d0: Complex64, d1: &[Complex64; 3], n: i32) -> Complex64 {
    let samples = 1024;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..samples {
        let t = 2.0 * PI / W * k as f64 / samples as f64;
        let (s, c) = (W * t).sin_cos();
        let a = [a0 * c, a0 * s, 0.0];
        let int_a = [a0 * s / W, -a0 * c / W, 0.0];
        let pa = p[0] * a[0] + p[1] * a[1];
        let phase = (1.0 + p[2] / SPEED_OF_LIGHT) * (p[0] * int_a[0] + p[1] * int_a[1]);
        let shift = [a[0], a[1], pa / SPEED_OF_LIGHT];
        let bracket = d0 - I * (shift[0] * d1[0] + shift[1] * d1[1] + shift[2] * d1[2]);
        acc += Complex64::from_polar(1.0, phase + n as f64 * W * t) * bracket;
    }
    acc / samples as f64
}

#[test]
fn uniform_dressing_matches_plane_wave_sfa() {
    let target = helium();
    let a0 = 0.05;
    let beam = BeamSpec::uniform_circular(a0, W, 1);
    let dress = Dressing::new(&beam, &AtomPosition::new(0.0, 0.0).unwrap()).unwrap();
    let xuv = circular();
    for (th, ph) in [(0.4, 0.3), (PI / 2.0, 1.0), (2.2, 4.0)] {
        let mut lib = vec![];
        let mut oracle = vec![];
        for n in -2..=2 {
            let e = sideband_energy(&dress, &xuv, target.e_i(), n).unwrap();
            let (d0, d1) = target.dipoles(e, xuv.polarization).unwrap().at(th, ph);
            let p = MomentumPoint::from_energy(e, th, ph).unwrap().vector();
            lib.push(sideband_amplitude(target, &dress, &xuv, n, th, ph).unwrap());
            oracle.push(plane_wave_sfa(a0, &p, d0, &d1, n));
        }
        for n in 0..5 {
            let (r, o) = (lib[n] / lib[2], oracle[n] / oracle[2]);
            assert!((r - o).norm() < 1e-6 * o.norm(), "θ={th} SB {}: {r} vs {o}", n as i32 - 2);
        }
    }
}

#[test]
fn no_dressing_leaves_the_bare_line() {
    let target = helium();
    let xuv = circular();
    let dress = Dressing::none(W);
    let e = sideband_energy(&dress, &xuv, target.e_i(), 0).unwrap();
    assert_eq!(e, xuv.omega + target.e_i());
    let (d0, _) = target.dipoles(e, xuv.polarization).unwrap().at(1.0, 0.5);
    assert!((sideband_amplitude(target, &dress, &xuv, 0, 1.0, 0.5).unwrap() - d0).norm() < 1e-15);
    assert_eq!(sideband_amplitude(target, &dress, &xuv, 1, 1.0, 0.5).unwrap().norm(), 0.0);

    // finite pulse: |A(E)| is the envelope spectrum centred on ω_X + E_i
    let d1 = [Complex64::new(0.0, 0.0); 3];
    let tau = 20.0 * 2.0 * PI / xuv.omega;
    let env = |t: f64| if t.abs() < tau / 2.0 { (PI * t / tau).cos().powi(2) } else { 0.0 };
    let centre = xuv.omega + target.e_i();
    let prob = |e: f64| {
        let p = MomentumPoint::from_energy(e, 1.0, 0.0).unwrap().vector();
        pulsed_amplitude(
            &dress,
            &p,
            Complex64::new(1.0, 0.0),
            &d1,
            xuv.omega,
            target.e_i(),
            env,
            (-tau / 2.0, tau / 2.0),
            0.0,
        )
        .norm_sqr()
    };
    let de = 1e-3;
    let (l, c, r) = (prob(centre - de), prob(centre), prob(centre + de));
    assert!(c > l && c > r);
    let vertex = centre + 0.5 * de * (l - r) / (l - 2.0 * c + r);
    assert!((vertex - centre).abs() < 1e-8, "{vertex} vs {centre}");
}

#[test]
fn pulsed_sidebands_sit_one_photon_apart() {
    let target = helium();
    let xuv = circular();
    let beam = BeamSpec::uniform_circular(0.02, W, 1);
    let dress = Dressing::new(&beam, &AtomPosition::new(0.0, 0.0).unwrap()).unwrap();
    let tau = 30.0 * 2.0 * PI / W;
    let env = |t: f64| if t.abs() < tau / 2.0 { (PI * t / tau).cos().powi(2) } else { 0.0 };
    let (th, ph) = (PI / 2.0, 0.0);
    let e0 = xuv.omega + target.e_i();
    let table = target.dipoles(e0, xuv.polarization).unwrap();
    let (d0, d1) = table.at(th, ph);
    let prob = |e: f64| {
        let p = MomentumPoint::from_energy(e, th, ph).unwrap().vector();
        pulsed_amplitude(&dress, &p, d0, &d1, xuv.omega, target.e_i(), env, (-tau / 2.0, tau / 2.0), 0.0).norm_sqr()
    };
    for n in -1..=1 {
        let expect = sideband_energy(&dress, &xuv, target.e_i(), n).unwrap();
        // coarse scan ±ω/3, then parabola through the best three points
        let h = W / 120.0;
        let es: Vec<f64> = (-40..=40).map(|k| expect + k as f64 * h).collect();
        let ys: Vec<f64> = es.iter().map(|&e| prob(e)).collect();
        let k = (1..ys.len() - 1).max_by(|&a, &b| ys[a].total_cmp(&ys[b])).unwrap();
        let vertex = es[k] + 0.5 * h * (ys[k - 1] - ys[k + 1]) / (ys[k - 1] - 2.0 * ys[k] + ys[k + 1]);
        assert!((vertex - expect).abs() < h, "SB {n}: {vertex} vs {expect}");
    }
}

#[test]
fn harmonic_series_is_the_sideband_comb() {
    let beam = soft(BeamSpec::skyrmion(0.02, W, 0.3, 3, 1, 7.0, 1.0));
    let mut dress = Dressing::new(&beam, &AtomPosition::new(2.0 / beam.q_perp, 0.9).unwrap()).unwrap();
    dress.include_ma = true;
    let p = [0.4, -0.8, 0.6];
    let d0 = Complex64::new(0.3, -0.2);
    let d1 = [Complex64::new(0.1, 0.0), Complex64::new(0.0, 0.2), Complex64::new(-0.1, 0.05)];
    let (nmax, series) = harmonic_series(&dress, &p, d0, &d1);
    let mut power = 0.0;
    for (k, c) in series.iter().enumerate() {
        let n = k as i32 - nmax as i32;
        assert!((c - sideband_coefficient(&dress, &p, d0, &d1, n)).norm() < 1e-14);
        power += c.norm_sqr();
    }
    // Parseval against direct time sampling of |P(t)|²
    let m = 2048;
    let mut direct = 0.0;
    for k in 0..m {
        let (s, v) = dress.sample(&p, 2.0 * PI / W * k as f64 / m as f64);
        let b = d0 - I * (v[0] * d1[0] + v[1] * d1[1] + v[2] * d1[2]);
        direct += (Complex64::from_polar(1.0, s) * b).norm_sqr() / m as f64;
    }
    assert!((power - direct).abs() < 1e-12 * direct);
}

#[test]
fn vortex_on_axis_selection_rules() {
    let target = helium();
    let xuv = circular();
    let par = BeamSpec::vortex_parallel(0.05, W, 0.4, 1);
    let axis = AtomPosition::new(0.0, 0.0).unwrap();
    let (lz, wp) = sideband_lz(target, &Dressing::new(&par, &axis).unwrap(), &xuv, 1, 6).unwrap();
    assert!((lz - 3.0).abs() < 1e-9, "{lz}");
    assert!(wp.channel_weight(3, 3) / wp.norm() > 1.0 - 1e-9);

    let anti = BeamSpec::vortex_antiparallel(0.05, W, 0.4, -1);
    let (lz, wp) = sideband_lz(target, &Dressing::new(&anti, &axis).unwrap(), &xuv, 1, 6).unwrap();
    assert!((lz - 1.0).abs() < 1e-9, "{lz}");
    let m1: f64 = (1..=wp.lmax).map(|l| wp.channel_weight(l, 1)).sum();
    assert!(m1 / wp.norm() > 1.0 - 1e-9);

    // sideband 0 keeps the XUV's own angular momentum
    let (lz, _) = sideband_lz(target, &Dressing::new(&par, &axis).unwrap(), &xuv, 0, 6).unwrap();
    assert!((lz - 1.0).abs() < 1e-6);
}

#[test]
fn far_from_axis_transfer_is_spin_only() {
    let target = helium();
    let xuv = circular();
    for beam in
        [soft(BeamSpec::vortex_parallel(0.005, W, 0.49, 1)), soft(BeamSpec::vortex_antiparallel(0.005, W, 0.49, -1))]
    {
        let pos = AtomPosition::new(40.0 / beam.q_perp, 0.3).unwrap();
        let (lz, _) = sideband_lz(target, &Dressing::new(&beam, &pos).unwrap(), &xuv, 1, 12).unwrap();
        assert!((lz - 2.0).abs() < 2e-3, "{:?}: {lz}", beam.kind);
    }
}

#[test]
fn single_atom_vortex_yields_rotate_with_the_atom() {
    let target = helium();
    let xuv = circular();
    for beam in
        [soft(BeamSpec::vortex_parallel(0.02, W, 0.4, 2)), soft(BeamSpec::vortex_antiparallel(0.02, W, 0.4, -1))]
    {
        let rho = 1.5 / beam.q_perp;
        let d0 = Dressing::new(&beam, &AtomPosition::new(rho, 0.0).unwrap()).unwrap();
        for phi0 in [0.8, 3.5] {
            let d = Dressing::new(&beam, &AtomPosition::new(rho, phi0).unwrap()).unwrap();
            for n in [-1, 1] {
                for (th, ph) in [(0.7, 0.2), (1.9, 5.0)] {
                    let a = sideband_amplitude(target, &d, &xuv, n, th, ph + phi0).unwrap().norm_sqr();
                    let b = sideband_amplitude(target, &d0, &xuv, n, th, ph).unwrap().norm_sqr();
                    assert!((a - b).abs() < 1e-10 * b, "{:?} n={n}: {a} vs {b}", beam.kind);
                }
            }
        }
    }
}

#[test]
fn spot_average_of_a_vector_beam_is_rotation_invariant() {
    let target = helium();
    let beam = BeamSpec::radial(0.01, W, 0.4);
    let xuv = XuvSpec { omega: 1.1, polarization: XuvPolarization::LinearZ };
    let spot = SpotProfile::Gaussian { width: 0.5 / beam.q_perp };
    let n_phi0 = 8;
    let delta = 2.0 * PI * 3.0 / n_phi0 as f64;
    let a = spot_average(target, &beam, &xuv, &spot, 1, 1.1, 0.4, n_phi0).unwrap();
    let b = spot_average(target, &beam, &xuv, &spot, 1, 1.1, 0.4 + delta, n_phi0).unwrap();
    assert!(a > 0.0);
    assert!((a - b).abs() < 1e-9 * a, "{a} vs {b}");
}

#[test]
fn narrow_spot_recovers_the_axis_yield() {
    let target = helium();
    let beam = BeamSpec::vortex_parallel(0.02, W, 0.4, 1);
    let xuv = circular();
    // the off-axis A-term interferes as a first harmonic in φ0, cancelled by 8 nodes
    let w = 1e-5 / beam.q_perp;
    let spot = SpotProfile::Gaussian { width: w };
    let avg = spot_average(target, &beam, &xuv, &spot, 1, 1.2, 0.0, 8).unwrap();
    let axis = Dressing::new(&beam, &AtomPosition::new(0.0, 0.0).unwrap()).unwrap();
    let y0 = sideband_amplitude(target, &axis, &xuv, 1, 1.2, 0.0).unwrap().norm_sqr();
    // ∫ 2πρ e^{−ρ²/(2w²)} dρ = 2π w² over the 4w cut-off
    let area = 2.0 * PI * w * w * (1.0 - (-8.0f64).exp());
    assert!((avg / (area * y0) - 1.0).abs() < 1e-4, "{}", avg / (area * y0));
}

#[test]
fn pulsed_wavepacket_norm_matches_quadrature() {
    let target = helium();
    let xuv = circular();
    let beam = BeamSpec::vortex_parallel(0.02, W, 0.4, 1);
    let dress = Dressing::new(&beam, &AtomPosition::new(0.8 / beam.q_perp, 0.0).unwrap()).unwrap();
    let tau = 8.0 * 2.0 * PI / W;
    let env = |t: f64| if t.abs() < tau / 2.0 { (PI * t / tau).cos().powi(2) } else { 0.0 };
    let win = SidebandWindow::new(1, xuv.omega, W, target.e_i(), W / 4.0).unwrap();
    let (es, ws) = GaussLegendre::new(6).mapped(win.center - win.half_width, win.center + win.half_width);
    let lmax = 8;
    let quad = slvw_core::special::SphereQuadrature::for_lmax(lmax + 4);
    let nodes = quad.nodes();
    let values: Vec<Vec<Complex64>> = es
        .iter()
        .map(|&e| {
            let table = target.dipoles(e, xuv.polarization).unwrap();
            nodes
                .iter()
                .map(|&(th, ph, _)| {
                    let (d0, d1) = table.at(th, ph);
                    let p = MomentumPoint::from_energy(e, th, ph).unwrap().vector();
                    pulsed_amplitude(&dress, &p, d0, &d1, xuv.omega, target.e_i(), env, (-tau / 2.0, tau / 2.0), 0.0)
                })
                .collect()
        })
        .collect();
    let grid = AmplitudeGrid {
        energies: es.clone(),
        energy_weights: ws.clone(),
        theta: quad.theta.clone(),
        theta_weights: quad.theta_weights.clone(),
        nphi: quad.nphi,
        values: values.clone(),
        meta: serde_json::json!({ "mode": "pulsed" }),
    };
    let wp = sideband_project(&grid, &win, lmax).unwrap();
    let direct: f64 = values
        .iter()
        .zip(&ws)
        .map(|(v, w)| w * v.iter().zip(&nodes).map(|(a, n)| n.2 * a.norm_sqr()).sum::<f64>())
        .sum();
    assert!(direct > 0.0);
    assert!((wp.norm() / direct - 1.0).abs() < 1e-6, "{}", wp.norm() / direct);
    assert!((wp.total - direct).abs() < 1e-12 * direct);
    let lz = expected_lz(&wp).unwrap();
    assert!(lz > 1.0 && lz < 3.0);

    let mut empty = grid.clone();
    for v in empty.values.iter_mut() {
        v.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
    }
    let wp0 = sideband_project(&empty, &win, lmax).unwrap();
    assert_eq!(wp0.norm(), 0.0);
    assert!(expected_lz(&wp0).is_err());
    let far = SidebandWindow::new(3, xuv.omega, W, target.e_i(), W / 4.0).unwrap();
    assert!(sideband_project(&grid, &far, lmax).is_err());
}

#[test]
fn cw_projection_uses_the_single_line() {
    let target = helium();
    let beam = BeamSpec::vortex_parallel(0.02, W, 0.4, 1);
    let dress = Dressing::new(&beam, &AtomPosition::new(0.5 / beam.q_perp, 0.0).unwrap()).unwrap();
    let grid = sideband_sphere(target, &dress, &circular(), 1, 10).unwrap();
    assert_eq!(grid.energies.len(), 1);
    let win = SidebandWindow::new(1, 1.1, W, target.e_i(), 1e-3).unwrap();
    let wp = sideband_project(&grid, &win, 8).unwrap();
    assert_eq!(wp.slices.len(), 1);
    assert!(wp.captured() > 0.999);
}

#[test]
fn radial_cache_is_reused_across_targets() {
    let grid = Arc::new(RadialGrid::coarse());
    let a = Target::new(Potential::TongLinHelium, grid.clone()).unwrap().with_radial_cache(RadialCache::new());
    let pol = XuvPolarization::LinearZ;
    let ta = a.dipoles(0.9, pol).unwrap();
    let cache = a.radial_cache().unwrap();
    assert!(!cache.is_empty());
    let size = cache.len();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("radial.bin");
    cache.save(&path).unwrap();
    let b = Target::new(Potential::TongLinHelium, grid).unwrap().with_radial_cache(RadialCache::load(&path).unwrap());
    let tb = b.dipoles(0.9, pol).unwrap();
    assert_eq!(b.radial_cache().unwrap().len(), size);
    assert_eq!(ta.cont.delta, tb.cont.delta);
    assert_eq!(ta.at(0.4, 1.0), tb.at(0.4, 1.0));
    b.dipoles(1.3, pol).unwrap();
    assert!(b.radial_cache().unwrap().len() > size);
}

fn random_dressing(kind: usize, s: f64, phi0: f64) -> Dressing {
    let b = match kind {
        0 => BeamSpec::vortex_parallel(0.02, W, 0.4, 2),
        1 => BeamSpec::vortex_antiparallel(0.02, W, 0.4, 1),
        2 => BeamSpec::azimuthal(0.02, W, 0.4),
        3 => BeamSpec::radial(0.02, W, 0.4),
        _ => BeamSpec::skyrmion(0.0005, W, 0.4, 3, 1, 7.0, 1.0),
    };
    let b = soft(b);
    Dressing::new(&b, &AtomPosition::new(s / b.q_perp, phi0).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lz_is_bounded_by_the_channels_present(kind in 0usize..5, s in 0.0f64..3.0, phi0 in 0.0f64..(2.0 * PI), n in -1i32..=1) {
        let target = helium();
        let (lz, wp) = sideband_lz(target, &random_dressing(kind, s, phi0), &circular(), n, 6).unwrap();
        let mut mmax = 0;
        for l in 0..=wp.lmax {
            for m in -(l as i32)..=(l as i32) {
                if wp.channel_weight(l, m) > 1e-14 * wp.norm() {
                    mmax = mmax.max(m.abs());
                }
            }
        }
        prop_assert!(lz.is_finite() && lz.abs() <= mmax as f64 + 1e-12);
    }
}

proptest! {
    #[test]
    fn dichroism_stays_in_range(a in 0.0f64..1e3, b in 0.0f64..1e3) {
        prop_assume!(a + b > 0.0);
        let d = orbital_dichroism(a, b).unwrap();
        prop_assert!((-1.0..=1.0).contains(&d));
        prop_assert!((orbital_dichroism(b, a).unwrap() + d).abs() < 1e-15);
    }

    #[test]
    fn sideband_weights_are_linear_in_the_dipoles(kind in 0usize..5, s in 0.0f64..3.0, scale in 0.1f64..10.0, n in -3i32..=3) {
        let d = random_dressing(kind, s, 0.4);
        let p = [0.3, 0.9, -0.5];
        let d0 = Complex64::new(0.2, 0.7);
        let d1 = [Complex64::new(0.1, -0.3), Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.2)];
        let d1s = d1.map(|x| x * scale);
        let a = sideband_coefficient(&d, &p, d0, &d1, n);
        let b = sideband_coefficient(&d, &p, d0 * scale, &d1s, n);
        prop_assert!((b - a * scale).norm() <= 1e-12 * (a.norm() * scale).max(1e-300));
    }
}
