use rayon::prelude::*;
use slvw_core::atom::RadialGrid;
use slvw_core::config::{Experiment, ResolvedXuv, Study};
use slvw_core::fields::{check_divergence, eval_gradient, eval_vector_potential, BeamKind, Vec3};
use slvw_core::io::{self, Gate, RadialCache};
use slvw_core::ionization::{
    orbital_dichroism, polar_centroid, polar_distribution, sideband_amplitude, sideband_lz_to, spot_average, Dressing,
    SpotProfile, Target, XuvSpec,
};
use slvw_core::streaking::{
    circular_rms, energy_grid, pearson, radial_component, reconstruct_field, spot_weighted_scan, streaked_spectrum,
    Emission, StreakSetup, StreakingScan, XuvPulse,
};
use slvw_core::{AtomPosition, BeamSpec, Error, Result};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

#[derive(Default)]
pub struct Outcome {
    pub files: Vec<(String, Vec<u8>)>,
    pub gates: Vec<Gate>,
    pub warnings: Vec<String>,
    pub summary: String,
}

impl Outcome {
    fn table<const N: usize>(&mut self, name: &str, header: &[&str; N], rows: &[[f64; N]]) -> Result<()> {
        let mut buf = Vec::new();
        io::write_table(&mut buf, header, rows)?;
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    fn gate(&mut self, name: String, value: f64, tolerance: f64) {
        let passed = value.is_finite() && value <= tolerance;
        self.gates.push(Gate { name, value, tolerance, passed });
    }
}

pub fn run(exp: &Experiment, scans: Option<&Path>) -> Result<Outcome> {
    match exp.study {
        Study::FieldsAudit => fields_audit(exp),
        Study::OamTransfer => with_target(exp, |t| oam_transfer(exp, t)),
        Study::Dichroism => with_target(exp, |t| dichroism(exp, t)),
        Study::RvbSpectra => with_target(exp, |t| rvb_spectra(exp, t)),
        Study::Streak => with_target(exp, |t| streak(exp, t)),
        Study::Reconstruct => with_target(exp, |t| reconstruct(exp, t, scans)),
    }
}

fn with_target(exp: &Experiment, f: impl FnOnce(&Target) -> Result<Outcome>) -> Result<Outcome> {
    let grid = Arc::new(if exp.coarse_grid { RadialGrid::coarse() } else { RadialGrid::standard() });
    let mut target = Target::new(exp.potential, grid)?;
    if let Some(path) = &exp.cache {
        let cache = if path.exists() { RadialCache::load(path)? } else { RadialCache::new() };
        target = target.with_radial_cache(cache);
    }
    let out = f(&target)?;
    if let (Some(path), Some(cache)) = (&exp.cache, target.radial_cache()) {
        cache.save(path)?;
    }
    Ok(out)
}

fn xuv_spec(exp: &Experiment) -> Result<(&ResolvedXuv, XuvSpec)> {
    let x = exp.xuv.as_ref().ok_or_else(|| Error::InvalidInput("missing [xuv] block".into()))?;
    Ok((x, XuvSpec { omega: x.omega, polarization: x.polarization }))
}

fn frac(x: f64) -> f64 {
    x - x.floor()
}

fn fields_audit(exp: &Experiment) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    writeln!(out.summary, "{:<20} {:>14} {:>14}", "beam", "max |div A|", "max grad err").ok();
    for (bi, nb) in exp.beams.iter().enumerate() {
        let b = &nb.spec;
        let ql = b.q_light();
        let q = if b.q_perp > 0.0 { b.q_perp } else { ql };
        let radius = (3.0 / q).min(b.validity_limit());
        let scale = (b.a0 * ql).max(f64::MIN_POSITIVE);
        let h = 1e-4 / ql;
        let (mut max_div, mut max_grad) = (0.0f64, 0.0f64);
        for k in 0..exp.grids.audit_points {
            // low-discrepancy fill of the validity disc
            let kf = k as f64 + 0.5;
            let rho = radius * frac(kf * 0.754_877_666_246_692_7).sqrt();
            let phi = 2.0 * PI * frac(kf * 0.569_840_290_998_053_2);
            let z = (frac(kf * 0.618_033_988_749_894_8) - 0.5) / ql;
            let t = 2.0 * PI * frac(kf * 0.414_213_562_373_095) / b.omega;
            let r: Vec3 = [rho * phi.cos(), rho * phi.sin(), z];
            let div = check_divergence(b, &r, t)?.abs() / scale;
            let g = eval_gradient(b, &r, t)?;
            let mut err = 0.0f64;
            for i in 0..3 {
                let mut rp = r;
                let mut rm = r;
                rp[i] += h;
                rm[i] -= h;
                let ap = eval_vector_potential(b, &rp, t)?;
                let am = eval_vector_potential(b, &rm, t)?;
                for j in 0..3 {
                    err = err.max((g[i][j] - (ap[j] - am[j]) / (2.0 * h)).abs());
                }
            }
            let grad = err / scale;
            max_div = max_div.max(div);
            max_grad = max_grad.max(grad);
            rows.push([bi as f64, r[0], r[1], r[2], t, div, grad]);
        }
        writeln!(out.summary, "{:<20} {:>14.3e} {:>14.3e}", nb.label, max_div, max_grad).ok();
        out.gate(format!("{}: divergence", nb.label), max_div, exp.tolerance.divergence);
        out.gate(format!("{}: gradient", nb.label), max_grad, exp.tolerance.gradient);
    }
    out.table(
        "fields-audit.csv",
        &["beam_index", "x_au", "y_au", "z_au", "t_au", "divergence_rel", "gradient_rel"],
        &rows,
    )?;
    Ok(out)
}

fn oam_transfer(exp: &Experiment, target: &Target) -> Result<Outcome> {
    let (_, xuv) = xuv_spec(exp)?;
    let mut out = Outcome::default();
    let mut jobs = Vec::new();
    for bi in 0..exp.beams.len() {
        for &rho in &exp.rho[bi] {
            for &n in &exp.grids.sidebands {
                jobs.push((bi, rho, n));
            }
        }
    }
    let results = jobs
        .par_iter()
        .map(|&(bi, rho, n)| {
            let b = &exp.beams[bi].spec;
            let dress = Dressing::new(b, &AtomPosition::new(rho, 0.0)?)?;
            let (lz, wp) = sideband_lz_to(target, &dress, &xuv, n, exp.l_max, exp.tolerance.lz_capture)?;
            Ok([bi as f64, b.m as f64, b.sigma as f64, rho, rho * b.q_perp, n as f64, lz, wp.captured()])
        })
        .collect::<Result<Vec<_>>>()?;
    writeln!(out.summary, "{:<20} {:>10} {:>4} {:>10}", "beam", "q⊥ρ0", "n", "<L_z>").ok();
    for r in &results {
        writeln!(out.summary, "{:<20} {:>10.4} {:>4} {:>10.5}", exp.beams[r[0] as usize].label, r[4], r[5], r[6]).ok();
    }
    out.table(
        "oam-transfer.csv",
        &["beam_index", "m", "sigma", "rho_au", "qperp_rho", "sideband", "lz", "captured"],
        &results,
    )?;
    Ok(out)
}

/// Antiparallel partner: same helicity and focus, opposite OAM.
fn partner(b: &BeamSpec) -> BeamSpec {
    BeamSpec { kind: BeamKind::VortexAntiparallel, m: -b.m, ..b.clone() }
}

fn dichroism(exp: &Experiment, target: &Target) -> Result<Outcome> {
    let (_, xuv) = xuv_spec(exp)?;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    writeln!(out.summary, "{:<12} {:>4} {:>10} {:>10} {:>10}", "beam", "n", "q⊥w_X", "θ (deg)", "D").ok();
    for (bi, nb) in exp.beams.iter().enumerate() {
        let (bp, bm) = (&nb.spec, partner(&nb.spec));
        for &w in &exp.spot_widths[bi] {
            let profile = SpotProfile::Gaussian { width: w };
            for &n in &exp.grids.sidebands {
                let vals = exp
                    .theta
                    .par_iter()
                    .map(|&th| {
                        let wp = spot_average(target, bp, &xuv, &profile, n, th, 0.0, exp.grids.phi0_nodes)?;
                        let wm = spot_average(target, &bm, &xuv, &profile, n, th, 0.0, exp.grids.phi0_nodes)?;
                        let d = if wp + wm > 0.0 { orbital_dichroism(wp, wm)? } else { 0.0 };
                        Ok([bi as f64, bp.m as f64, n as f64, w, w * bp.q_perp, th, wp, wm, d])
                    })
                    .collect::<Result<Vec<_>>>()?;
                for r in &vals {
                    writeln!(
                        out.summary,
                        "{:<12} {:>4} {:>10.3} {:>10.2} {:>10.5}",
                        nb.label,
                        n,
                        r[4],
                        r[5].to_degrees(),
                        r[8]
                    )
                    .ok();
                }
                rows.extend(vals);
            }
        }
    }
    out.table(
        "dichroism.csv",
        &[
            "beam_index",
            "m",
            "sideband",
            "width_au",
            "qperp_width",
            "theta_rad",
            "w_parallel",
            "w_antiparallel",
            "dichroism",
        ],
        &rows,
    )?;
    Ok(out)
}

fn rvb_spectra(exp: &Experiment, target: &Target) -> Result<Outcome> {
    let (_, xuv) = xuv_spec(exp)?;
    let mut out = Outcome::default();
    let mut yields = Vec::new();
    let mut polar = Vec::new();
    let g = &exp.grids;
    let thetas: Vec<f64> = (0..g.theta_nodes).map(|k| PI * (k as f64 + 0.5) / g.theta_nodes as f64).collect();
    writeln!(
        out.summary,
        "{:>10} {:>12} {:>4} {:>12} {:>12} {:>10}",
        "waist_um", "rho_au", "n", "W(θ=0)", "W(π/2)", "θ̄ (rad)"
    )
    .ok();
    for (bi, nb) in exp.beams.iter().enumerate() {
        let beams: Vec<(f64, BeamSpec)> = if exp.waists.is_empty() {
            vec![(1.0 / nb.spec.q_perp, nb.spec.clone())]
        } else {
            exp.waists.iter().map(|&w| Ok((w, nb.spec.clone().with_waist(w)?))).collect::<Result<_>>()?
        };
        for (w, b) in &beams {
            for &rho in &exp.positions[bi] {
                let dress = Dressing::new(b, &AtomPosition::new(rho, 0.0)?)?;
                for &n in &g.sidebands {
                    let axis = sideband_amplitude(target, &dress, &xuv, n, 0.0, 0.0)?.norm_sqr();
                    let plane = sideband_amplitude(target, &dress, &xuv, n, 0.5 * PI, 0.0)?.norm_sqr();
                    let (centroid, hemi) = polar_centroid(target, &dress, &xuv, n, g.theta_nodes, g.phi_nodes)?;
                    let dist = polar_distribution(target, &dress, &xuv, n, &thetas, g.phi_nodes)?;
                    for (th, y) in thetas.iter().zip(dist) {
                        polar.push([*w, rho, n as f64, *th, y]);
                    }
                    writeln!(
                        out.summary,
                        "{:>10.3} {:>12.1} {:>4} {:>12.4e} {:>12.4e} {:>10.4}",
                        w * slvw_core::units::BOHR_M * 1e6,
                        rho,
                        n,
                        axis,
                        plane,
                        centroid
                    )
                    .ok();
                    yields.push([*w, rho, n as f64, axis, plane, centroid, hemi]);
                }
            }
        }
    }
    out.table(
        "rvb-yields.csv",
        &["waist_au", "rho_au", "sideband", "yield_axis", "yield_plane", "centroid_theta_rad", "hemisphere_yield"],
        &yields,
    )?;
    out.table("rvb-polar.csv", &["waist_au", "rho_au", "sideband", "theta_rad", "yield"], &polar)?;
    Ok(out)
}

struct StreakPlan {
    setup: StreakSetup,
    phis: Vec<f64>,
    delays: Vec<f64>,
}

fn streak_plan(exp: &Experiment, target: &Target) -> Result<StreakPlan> {
    let (x, _) = xuv_spec(exp)?;
    let profile = x.spot.ok_or_else(|| Error::InvalidInput("xuv.spot is required for streaking".into()))?;
    let pulse = XuvPulse::new(x.omega, x.cycles)?;
    let center = x.omega + target.e_i();
    let half = exp.energy_half_width.unwrap_or(2.0 * pulse.main_lobe());
    let setup = StreakSetup {
        pulse,
        profile,
        emission: Emission::Radial,
        energies: energy_grid(center, half, exp.grids.energy_points)?,
        radial_nodes: exp.grids.radial_nodes,
        dipole: x.dipole,
    };
    let g = &exp.grids;
    let wl = exp.beams[0].spec.omega;
    let phis = (0..g.azimuths).map(|k| 2.0 * PI * k as f64 / g.azimuths as f64).collect();
    let nd = g.delays_per_cycle * g.delay_cycles;
    let delays = (0..nd).map(|k| 2.0 * PI / wl * k as f64 / g.delays_per_cycle as f64).collect();
    Ok(StreakPlan { setup, phis, delays })
}

fn streak(exp: &Experiment, target: &Target) -> Result<Outcome> {
    let plan = streak_plan(exp, target)?;
    let beam = &exp.beams[0].spec;
    let scans = spot_weighted_scan(target, beam, &plan.setup, &plan.phis, &plan.delays)?;
    let mut out = Outcome::default();
    let mut buf = Vec::new();
    io::write_streak_csv(&mut buf, &scans)?;
    out.files.push(("streak.csv".into(), buf));
    let rbar = plan.setup.emission_radius()?;
    let pos = AtomPosition::new(rbar, 0.0)?;
    let spectra = plan
        .delays
        .par_iter()
        .map(|&dt| {
            streaked_spectrum(target, beam, &plan.setup.pulse, &pos, 0.0, dt, &plan.setup.energies, plan.setup.dipole)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (dt, s) in plan.delays.iter().zip(&spectra) {
        for (e, d) in s.energies.iter().zip(&s.density) {
            rows.push([*dt, *e, *d]);
        }
    }
    out.table("spectrogram.csv", &["delay_au", "energy_au", "density"], &rows)?;
    writeln!(out.summary, "{:>10} {:>14} {:>14}", "φ_p (rad)", "COE min", "COE max").ok();
    for s in &scans {
        let lo = s.coe.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = s.coe.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        writeln!(out.summary, "{:>10.4} {:>14.8} {:>14.8}", s.phi_p, lo, hi).ok();
    }
    Ok(out)
}

fn reconstruct(exp: &Experiment, target: &Target, from: Option<&Path>) -> Result<Outcome> {
    let plan = streak_plan(exp, target)?;
    let beam = &exp.beams[0].spec;
    let rbar = plan.setup.emission_radius()?;
    let scans: Vec<StreakingScan> = match from {
        Some(p) => io::read_streak_csv(std::fs::File::open(p)?, plan.setup.profile, rbar)?,
        None => spot_weighted_scan(target, beam, &plan.setup, &plan.phis, &plan.delays)?,
    };
    let p_tilde = (2.0 * (plan.setup.pulse.omega + target.e_i())).sqrt();
    let rec = reconstruct_field(&scans, beam.omega, p_tilde, 0.0)?;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    let (mut got, mut want, mut f_got, mut f_want) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for s in &rec.samples {
        let truth = radial_component(beam, rec.emission_radius, s.phi_p);
        let valid = s.phase.is_some();
        if let Some(ph) = s.phase {
            got.push(ph);
            want.push(truth.arg());
        }
        f_got.push(s.field_at_delay);
        f_want.push(truth.re);
        rows.push([
            s.phi_p,
            s.amplitude,
            s.phase.unwrap_or(0.0),
            valid as u8 as f64,
            s.field_at_delay,
            truth.norm(),
            truth.arg(),
            s.rms_residual,
        ]);
    }
    let skipped = rec.samples.len() - got.len();
    if skipped > 0 {
        out.warnings.push(format!("{skipped} azimuths below the fit noise; their phase is not reported"));
    }
    let rms = if got.len() >= 2 { circular_rms(&got, &want) / (2.0 * PI) } else { f64::INFINITY };
    let corr = pearson(&f_got, &f_want).unwrap_or(0.0);
    out.gate("phase circular RMS / 2π".into(), rms, exp.tolerance.reconstruction_rms);
    out.table(
        "reconstruction.csv",
        &[
            "phi_p_rad",
            "amplitude_au",
            "phase_rad",
            "phase_valid",
            "field_at_delay_au",
            "true_amplitude_au",
            "true_phase_rad",
            "fit_rms_au",
        ],
        &rows,
    )?;
    out.files.push(("reconstruction.json".into(), (io::to_json_pretty(&rec)? + "\n").into_bytes()));
    writeln!(out.summary, "emission radius     {:.6e} a.u.", rec.emission_radius).ok();
    writeln!(out.summary, "phase RMS / 2π      {rms:.4e}").ok();
    writeln!(out.summary, "field correlation   {corr:.6}").ok();
    Ok(out)
}
