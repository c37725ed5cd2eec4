//! Experiment configuration in TOML.
//!
//! Physical inputs are either bare numbers (atomic units) or strings with a
//! unit marker, e.g. `"1.55 eV"`, `"800 nm"`, `"2e14 W/cm2"`, `"28 deg"`,
//! `"3 /qperp"`. Everything is converted to atomic units at this boundary.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;

use crate::atom::{Potential, XuvPolarization};
use crate::error::{Error, Result};
use crate::fields::{wavenumbers_from_waist, BeamKind, BeamSpec, RadialOrder, ValidityPolicy};
use crate::ionization::SpotProfile;
use crate::streaking::DipoleEnergy;
use crate::units::{ev_to_au, fs_to_au, nm_to_au, um_to_au, AU_INTENSITY_W_CM2, BOHR_M, SPEED_OF_LIGHT};

/// A number in atomic units or a `"value unit"` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Energy,
    Length,
    Wavenumber,
    Time,
    Intensity,
    Angle,
}

fn split_unit(s: &str) -> Option<(f64, &str)> {
    let s = s.trim();
    let b = s.as_bytes();
    let mut cut = s.len();
    for (i, c) in s.char_indices() {
        let exp = (c == 'e' || c == 'E')
            && i > 0
            && b.get(i + 1).is_some_and(|n| n.is_ascii_digit() || *n == b'-' || *n == b'+');
        if (c.is_alphabetic() && !exp) || c == '/' || c == 'µ' || c == '°' {
            cut = i;
            break;
        }
    }
    let v: f64 = s[..cut].trim().parse().ok()?;
    Some((v, s[cut..].trim()))
}

impl Quantity {
    /// Convert to atomic units. `qperp` resolves the `/qperp` length marker.
    pub fn to_au(&self, dim: Dim, qperp: Option<f64>) -> std::result::Result<f64, String> {
        let (v, unit) = match self {
            Quantity::Number(v) => (*v, ""),
            Quantity::Text(s) => split_unit(s).ok_or_else(|| format!("cannot read a number from {s:?}"))?,
        };
        if !v.is_finite() {
            return Err("value must be finite".into());
        }
        let unit_l = unit.to_ascii_lowercase();
        let out = match (dim, unit_l.as_str()) {
            (_, "" | "au" | "a.u.") => v,
            (Dim::Energy, "ev") => ev_to_au(v),
            (Dim::Energy, "hartree" | "ha") => v,
            (Dim::Length, "um" | "µm" | "micron") => um_to_au(v),
            (Dim::Length, "nm") => nm_to_au(v),
            (Dim::Length, "bohr") => v,
            (Dim::Length, "/qperp" | "1/qperp") => match qperp {
                Some(q) if q > 0.0 => v / q,
                _ => return Err("`/qperp` needs a focused beam".into()),
            },
            (Dim::Wavenumber, "/um" | "1/um") => v * 1e-6 * BOHR_M,
            (Dim::Wavenumber, "/nm" | "1/nm") => v * 1e-9 * BOHR_M,
            (Dim::Time, "fs") => fs_to_au(v),
            (Dim::Time, "as") => fs_to_au(v * 1e-3),
            (Dim::Intensity, "w/cm2" | "w/cm^2" | "w/cm²") => v / AU_INTENSITY_W_CM2,
            (Dim::Angle, "deg" | "°") => v.to_radians(),
            (Dim::Angle, "rad") => v,
            _ => return Err(format!("unit {unit:?} is not a valid {dim:?} unit")),
        };
        Ok(out)
    }
}

/// One validation finding, addressed by a dotted path into the document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    FieldsAudit,
    OamTransfer,
    Dichroism,
    RvbSpectra,
    Streak,
    Reconstruct,
}

impl Study {
    pub const ALL: [Study; 6] = [
        Study::FieldsAudit,
        Study::OamTransfer,
        Study::Dichroism,
        Study::RvbSpectra,
        Study::Streak,
        Study::Reconstruct,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Study::FieldsAudit => "fields-audit",
            Study::OamTransfer => "oam-transfer",
            Study::Dichroism => "dichroism",
            Study::RvbSpectra => "rvb-spectra",
            Study::Streak => "streak",
            Study::Reconstruct => "reconstruct",
        }
    }

    pub fn parse(s: &str) -> Option<Study> {
        Study::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    pub label: Option<String>,
    pub kind: Option<String>,
    pub photon_energy: Option<Quantity>,
    pub wavelength: Option<Quantity>,
    /// Vector-potential amplitude A0.
    pub amplitude: Option<Quantity>,
    /// Peak intensity; alternative to `amplitude`.
    pub intensity: Option<Quantity>,
    pub focus_angle: Option<Quantity>,
    pub waist: Option<Quantity>,
    pub q_perp: Option<Quantity>,
    pub q_z: Option<Quantity>,
    pub m: Option<i32>,
    pub sigma: Option<i32>,
    pub m1: Option<u32>,
    pub m2: Option<u32>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub radial_order: Option<RadialOrder>,
    pub validity: Option<ValidityPolicy>,
    pub validity_radius: Option<Quantity>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpotConfig {
    pub profile: Option<String>,
    pub width: Option<Quantity>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XuvConfig {
    pub photon_energy: Option<Quantity>,
    /// `circular+`, `circular-`, `linear-z` or `linear-radial`.
    pub polarization: Option<String>,
    pub cycles: Option<u32>,
    pub spot: Option<SpotConfig>,
    pub dipole: Option<DipoleEnergy>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AtomConfig {
    /// `tong-lin-helium`, `coulomb` or `hydrogen`.
    pub potential: String,
    pub z: f64,
    /// `standard` or `coarse`.
    pub grid: String,
    pub l_max: usize,
    pub cache: Option<PathBuf>,
}

impl Default for AtomConfig {
    fn default() -> Self {
        AtomConfig { potential: "tong-lin-helium".into(), z: 1.0, grid: "standard".into(), l_max: 12, cache: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub rho: Vec<Quantity>,
    pub theta: Vec<Quantity>,
    pub spot_widths: Vec<Quantity>,
    pub waists: Vec<Quantity>,
    pub positions: Vec<Quantity>,
    pub sidebands: Vec<i32>,
    pub delays_per_cycle: usize,
    pub delay_cycles: usize,
    pub azimuths: usize,
    pub energy_points: usize,
    pub energy_half_width: Option<Quantity>,
    pub radial_nodes: usize,
    pub phi0_nodes: usize,
    pub theta_nodes: usize,
    pub phi_nodes: usize,
    pub audit_points: usize,
    pub seed: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            rho: Vec::new(),
            theta: Vec::new(),
            spot_widths: Vec::new(),
            waists: Vec::new(),
            positions: Vec::new(),
            sidebands: vec![1],
            delays_per_cycle: 48,
            delay_cycles: 2,
            azimuths: 24,
            energy_points: 121,
            energy_half_width: None,
            radial_nodes: 24,
            phi0_nodes: 8,
            theta_nodes: 24,
            phi_nodes: 8,
            audit_points: 100,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Divergence residual gate, relative to `A0 q_L`.
    pub divergence: f64,
    /// Analytic vs finite-difference gradient gate (relative).
    pub gradient: f64,
    /// Fraction of the sideband norm the ⟨L_z⟩ projection must capture.
    pub lz_capture: f64,
    /// Circular RMS gate of a reconstruction, in units of 2π.
    pub reconstruction_rms: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { divergence: 1e-10, gradient: 1e-6, lz_capture: 0.999, reconstruction_rms: 0.05 }
    }
}

/// The document as written.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub study: Option<String>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub plot_script: bool,
    #[serde(default)]
    pub beam: Vec<BeamConfig>,
    pub xuv: Option<XuvConfig>,
    #[serde(default)]
    pub atom: AtomConfig,
    #[serde(default)]
    pub grids: GridConfig,
    #[serde(default)]
    pub tolerance: Tolerances,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let path = e
                .span()
                .map(|s| {
                    let line = text[..s.start.min(text.len())].matches('\n').count() + 1;
                    format!("line {line}")
                })
                .unwrap_or_else(|| "document".into());
            Error::Config { path, msg: e.message().to_string() }
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config { path: "document".into(), msg: e.to_string() })
    }
}

/// A beam with its label, fully in atomic units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedBeam {
    pub label: String,
    pub spec: BeamSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedXuv {
    pub omega: f64,
    pub polarization: XuvPolarization,
    pub cycles: u32,
    pub spot: Option<SpotProfile>,
    pub dipole: DipoleEnergy,
}

/// Validated experiment, everything in atomic units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub study: Study,
    pub output_dir: PathBuf,
    pub plot_script: bool,
    pub beams: Vec<NamedBeam>,
    pub xuv: Option<ResolvedXuv>,
    pub potential: Potential,
    pub coarse_grid: bool,
    pub l_max: usize,
    pub cache: Option<PathBuf>,
    /// Radii per beam (`/qperp` is resolved against each beam).
    pub rho: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
    pub spot_widths: Vec<Vec<f64>>,
    pub waists: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub energy_half_width: Option<f64>,
    pub grids: GridConfig,
    pub tolerance: Tolerances,
}

struct Collector(Vec<Diagnostic>);

impl Collector {
    fn push(&mut self, path: impl Into<String>, msg: impl Into<String>) {
        self.0.push(Diagnostic { path: path.into(), message: msg.into() });
    }

    fn qty(&mut self, path: &str, q: &Option<Quantity>, dim: Dim, qperp: Option<f64>) -> Option<f64> {
        let q = q.as_ref()?;
        match q.to_au(dim, qperp) {
            Ok(v) => Some(v),
            Err(e) => {
                self.push(path, e);
                None
            }
        }
    }

    fn list(&mut self, path: &str, qs: &[Quantity], dim: Dim, qperp: Option<f64>) -> Vec<f64> {
        let mut out = Vec::with_capacity(qs.len());
        for (i, q) in qs.iter().enumerate() {
            match q.to_au(dim, qperp) {
                Ok(v) => out.push(v),
                Err(e) => self.push(format!("{path}[{i}]"), e),
            }
        }
        out
    }
}

fn resolve_beam(c: &mut Collector, path: &str, b: &BeamConfig) -> Option<BeamSpec> {
    let kind = match b.kind.as_deref() {
        None => {
            c.push(format!("{path}.kind"), "required");
            return None;
        }
        Some(k) => match BeamKind::parse(k) {
            Some(k) => k,
            None => {
                c.push(format!("{path}.kind"), format!("unknown beam kind {k:?}"));
                return None;
            }
        },
    };
    let omega = match (
        c.qty(&format!("{path}.photon_energy"), &b.photon_energy, Dim::Energy, None),
        c.qty(&format!("{path}.wavelength"), &b.wavelength, Dim::Length, None),
    ) {
        (Some(w), None) => Some(w),
        (None, Some(l)) if l > 0.0 => Some(2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / l),
        (Some(_), Some(_)) => {
            c.push(format!("{path}.photon_energy"), "give either photon_energy or wavelength, not both");
            None
        }
        _ => {
            if b.photon_energy.is_none() && b.wavelength.is_none() {
                c.push(format!("{path}.photon_energy"), "required (laser frequency ω_L; or give wavelength)");
            }
            None
        }
    };
    let a0 = match (&b.amplitude, &b.intensity) {
        (Some(_), Some(_)) => {
            c.push(format!("{path}.amplitude"), "give either amplitude or intensity, not both");
            None
        }
        (Some(_), None) => c.qty(&format!("{path}.amplitude"), &b.amplitude, Dim::Energy, None),
        (None, Some(_)) => {
            let i = c.qty(&format!("{path}.intensity"), &b.intensity, Dim::Intensity, None);
            match (i, omega) {
                (Some(i), Some(w)) if i >= 0.0 && w > 0.0 => Some(i.sqrt() / w),
                (Some(_), Some(_)) => {
                    c.push(format!("{path}.intensity"), "must be non-negative");
                    None
                }
                _ => None,
            }
        }
        (None, None) => {
            c.push(format!("{path}.amplitude"), "required (or give intensity)");
            None
        }
    };
    let focus = c.qty(&format!("{path}.focus_angle"), &b.focus_angle, Dim::Angle, None);
    let waist = c.qty(&format!("{path}.waist"), &b.waist, Dim::Length, None);
    let qp = c.qty(&format!("{path}.q_perp"), &b.q_perp, Dim::Wavenumber, None);
    let qz = c.qty(&format!("{path}.q_z"), &b.q_z, Dim::Wavenumber, None);
    let vradius = c.qty(&format!("{path}.validity_radius"), &b.validity_radius, Dim::Length, None);
    let (omega, a0) = (omega?, a0?);
    let given = [focus.is_some(), waist.is_some(), qp.is_some() || qz.is_some()].iter().filter(|x| **x).count();
    if given > 1 {
        c.push(format!("{path}.focus_angle"), "give only one of focus_angle, waist or (q_perp, q_z)");
        return None;
    }
    let needs_focus = kind != BeamKind::UniformCircular;
    if needs_focus && given == 0 {
        c.push(format!("{path}.focus_angle"), "required for a focused beam (or give waist or q_perp/q_z)");
        return None;
    }
    if qp.is_some() != qz.is_some() {
        c.push(format!("{path}.q_perp"), "q_perp and q_z must be given together");
        return None;
    }
    let alpha0 = focus.unwrap_or(0.5);
    let mut spec = match kind {
        BeamKind::VortexParallel => BeamSpec::vortex_parallel(a0, omega, alpha0, b.m.unwrap_or(1)),
        BeamKind::VortexAntiparallel => BeamSpec::vortex_antiparallel(a0, omega, alpha0, b.m.unwrap_or(-1)),
        BeamKind::Azimuthal => BeamSpec::azimuthal(a0, omega, alpha0),
        BeamKind::Radial => BeamSpec::radial(a0, omega, alpha0),
        BeamKind::Skyrmion => BeamSpec::skyrmion(
            a0,
            omega,
            alpha0,
            b.m1.unwrap_or(3),
            b.m2.unwrap_or(1),
            b.alpha.unwrap_or(1.0),
            b.beta.unwrap_or(1.0),
        ),
        BeamKind::UniformCircular => BeamSpec::uniform_circular(a0, omega, b.sigma.unwrap_or(1)),
    };
    if let Some(s) = b.sigma {
        spec.sigma = s;
    }
    if let Some(w) = waist {
        match wavenumbers_from_waist(omega, w) {
            Ok((p, z)) => {
                spec.q_perp = p;
                spec.q_z = z;
            }
            Err(e) => {
                c.push(format!("{path}.waist"), e.to_string());
                return None;
            }
        }
    }
    if let (Some(p), Some(z)) = (qp, qz) {
        spec.q_perp = p;
        spec.q_z = z;
    }
    if let Some(o) = b.radial_order {
        spec.radial_order = o;
    }
    if let Some(v) = b.validity {
        spec.validity = v;
    }
    spec.validity_radius = vradius;
    for d in spec.diagnostics() {
        c.push(path.to_string(), d);
    }
    Some(spec)
}

fn resolve_xuv(c: &mut Collector, x: &XuvConfig, qperp: Option<f64>) -> Option<ResolvedXuv> {
    let omega = c.qty("xuv.photon_energy", &x.photon_energy, Dim::Energy, None);
    if x.photon_energy.is_none() {
        c.push("xuv.photon_energy", "required");
    }
    let polarization = match x.polarization.as_deref().unwrap_or("circular+") {
        "circular+" => Some(XuvPolarization::Circular { sigma: 1 }),
        "circular-" => Some(XuvPolarization::Circular { sigma: -1 }),
        "linear-z" => Some(XuvPolarization::LinearZ),
        "linear-radial" => Some(XuvPolarization::LinearRadial { phi0: 0.0 }),
        other => {
            c.push("xuv.polarization", format!("unknown polarization {other:?}"));
            None
        }
    };
    let cycles = x.cycles.unwrap_or(7);
    if cycles == 0 {
        c.push("xuv.cycles", "must be at least 1");
    }
    let spot = match &x.spot {
        None => None,
        Some(s) => {
            let w = c.qty("xuv.spot.width", &s.width, Dim::Length, qperp);
            if s.width.is_none() {
                c.push("xuv.spot.width", "required");
            }
            match (s.profile.as_deref().unwrap_or("gaussian"), w) {
                (_, Some(w)) if !(w > 0.0) => {
                    c.push("xuv.spot.width", "must be positive");
                    None
                }
                ("gaussian", Some(w)) => Some(SpotProfile::Gaussian { width: w }),
                ("rvb-donut", Some(w)) => Some(SpotProfile::RvbDonut { width: w }),
                (p, _) if p != "gaussian" && p != "rvb-donut" => {
                    c.push("xuv.spot.profile", format!("unknown profile {p:?}"));
                    None
                }
                _ => None,
            }
        }
    };
    let omega = omega?;
    if !(omega > 0.0) {
        c.push("xuv.photon_energy", "must be positive");
        return None;
    }
    Some(ResolvedXuv { omega, polarization: polarization?, cycles, spot, dipole: x.dipole.unwrap_or_default() })
}

impl Experiment {
    /// Validate and convert; every problem is reported, none is fatal early.
    pub fn resolve(cfg: &ExperimentConfig) -> std::result::Result<Experiment, Vec<Diagnostic>> {
        let mut c = Collector(Vec::new());
        let study = match cfg.study.as_deref() {
            None => {
                c.push("study", "required");
                None
            }
            Some(s) => {
                let st = Study::parse(s);
                if st.is_none() {
                    let names: Vec<_> = Study::ALL.iter().map(|s| s.name()).collect();
                    c.push("study", format!("unknown study {s:?} (expected one of {})", names.join(", ")));
                }
                st
            }
        };
        let mut beams = Vec::new();
        for (i, b) in cfg.beam.iter().enumerate() {
            let path = format!("beam[{i}]");
            if let Some(spec) = resolve_beam(&mut c, &path, b) {
                let label = b.label.clone().unwrap_or_else(|| format!("{}-{i}", spec.kind.name()));
                beams.push(NamedBeam { label, spec });
            }
        }
        let qperp0 = beams.first().map(|b| b.spec.q_perp).filter(|q| *q > 0.0);
        let xuv = cfg.xuv.as_ref().and_then(|x| resolve_xuv(&mut c, x, qperp0));
        let potential = match cfg.atom.potential.as_str() {
            "tong-lin-helium" => Some(Potential::TongLinHelium),
            "hydrogen" => Some(Potential::Coulomb { z: 1.0 }),
            "coulomb" => {
                if !(cfg.atom.z > 0.0) {
                    c.push("atom.z", "nuclear charge must be positive");
                }
                Some(Potential::Coulomb { z: cfg.atom.z })
            }
            other => {
                c.push("atom.potential", format!("unknown potential {other:?}"));
                None
            }
        };
        let coarse = match cfg.atom.grid.as_str() {
            "standard" => false,
            "coarse" => true,
            other => {
                c.push("atom.grid", format!("unknown grid {other:?} (standard or coarse)"));
                false
            }
        };
        let g = &cfg.grids;
        let rho = beams
            .iter()
            .map(|b| c.list("grids.rho", &g.rho, Dim::Length, Some(b.spec.q_perp).filter(|q| *q > 0.0)))
            .collect::<Vec<_>>();
        let spot_widths = beams
            .iter()
            .map(|b| c.list("grids.spot_widths", &g.spot_widths, Dim::Length, Some(b.spec.q_perp).filter(|q| *q > 0.0)))
            .collect::<Vec<_>>();
        let positions = beams
            .iter()
            .map(|b| c.list("grids.positions", &g.positions, Dim::Length, Some(b.spec.q_perp).filter(|q| *q > 0.0)))
            .collect::<Vec<_>>();
        let theta = c.list("grids.theta", &g.theta, Dim::Angle, None);
        let waists = c.list("grids.waists", &g.waists, Dim::Length, None);
        let ehw = c.qty("grids.energy_half_width", &g.energy_half_width, Dim::Energy, None);
        for (name, v) in [
            ("grids.delays_per_cycle", g.delays_per_cycle),
            ("grids.delay_cycles", g.delay_cycles),
            ("grids.azimuths", g.azimuths),
            ("grids.radial_nodes", g.radial_nodes),
            ("grids.phi0_nodes", g.phi0_nodes),
            ("grids.theta_nodes", g.theta_nodes),
            ("grids.phi_nodes", g.phi_nodes),
        ] {
            if v == 0 {
                c.push(name, "must be at least 1");
            }
        }
        if g.energy_points < 3 {
            c.push("grids.energy_points", "must be at least 3");
        }
        if let Some(w) = ehw {
            if !(w > 0.0) {
                c.push("grids.energy_half_width", "must be positive");
            }
        }
        for (i, w) in waists.iter().enumerate() {
            if !(*w > 0.0) {
                c.push(format!("grids.waists[{i}]"), "must be positive");
            }
        }
        for (name, list) in [("grids.rho", &rho), ("grids.spot_widths", &spot_widths), ("grids.positions", &positions)]
        {
            if list.iter().flatten().any(|v| !(*v >= 0.0)) {
                c.push(name, "radii must be non-negative");
            }
        }
        if cfg.atom.l_max == 0 || cfg.atom.l_max > 160 {
            c.push("atom.l_max", "must lie in 1..=160");
        }
        let t = &cfg.tolerance;
        for (name, v) in [
            ("tolerance.divergence", t.divergence),
            ("tolerance.gradient", t.gradient),
            ("tolerance.reconstruction_rms", t.reconstruction_rms),
        ] {
            if !(v > 0.0) {
                c.push(name, "must be positive");
            }
        }
        if !(t.lz_capture > 0.0 && t.lz_capture <= 1.0) {
            c.push("tolerance.lz_capture", "must lie in (0, 1]");
        }

        if let Some(st) = study {
            study_requirements(&mut c, st, cfg, &beams, xuv.as_ref(), &theta);
        }
        if !c.0.is_empty() {
            return Err(c.0);
        }
        Ok(Experiment {
            study: study.expect("checked"),
            output_dir: cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("slvw-out")),
            plot_script: cfg.plot_script,
            beams,
            xuv,
            potential: potential.expect("checked"),
            coarse_grid: coarse,
            l_max: cfg.atom.l_max,
            cache: cfg.atom.cache.clone(),
            rho,
            theta,
            spot_widths,
            waists,
            positions,
            energy_half_width: ehw,
            // unit-marked lists live above in a.u.
            grids: GridConfig {
                rho: Vec::new(),
                theta: Vec::new(),
                spot_widths: Vec::new(),
                waists: Vec::new(),
                positions: Vec::new(),
                energy_half_width: None,
                ..g.clone()
            },
            tolerance: t.clone(),
        })
    }
}

fn study_requirements(
    c: &mut Collector,
    st: Study,
    cfg: &ExperimentConfig,
    beams: &[NamedBeam],
    xuv: Option<&ResolvedXuv>,
    theta: &[f64],
) {
    if cfg.beam.is_empty() {
        c.push("beam", "at least one [[beam]] block is required");
    }
    let needs_xuv = st != Study::FieldsAudit;
    if needs_xuv && cfg.xuv.is_none() {
        c.push("xuv", "an [xuv] block is required for this study");
    }
    let g = &cfg.grids;
    match st {
        Study::FieldsAudit => {
            if g.audit_points == 0 {
                c.push("grids.audit_points", "must be at least 1");
            }
        }
        Study::OamTransfer => {
            if g.rho.is_empty() {
                c.push("grids.rho", "non-empty list of atom radii required");
            }
            if matches!(xuv.map(|x| x.polarization), Some(XuvPolarization::LinearRadial { .. })) {
                c.push("xuv.polarization", "linear-radial XUV is only meaningful for streaking studies");
            }
        }
        Study::Dichroism => {
            if g.spot_widths.is_empty() {
                c.push("grids.spot_widths", "non-empty list required");
            }
            if theta.is_empty() && g.theta.is_empty() {
                c.push("grids.theta", "non-empty list of emission angles required");
            }
            for (i, b) in beams.iter().enumerate() {
                if b.spec.kind != BeamKind::VortexParallel {
                    c.push(
                        format!("beam[{i}].kind"),
                        "dichroism compares a vortex-parallel beam with its antiparallel partner",
                    );
                }
            }
        }
        Study::RvbSpectra => {
            if g.positions.is_empty() {
                c.push("grids.positions", "non-empty list of atom radii required");
            }
            for (i, b) in beams.iter().enumerate() {
                if b.spec.kind != BeamKind::Radial {
                    c.push(format!("beam[{i}].kind"), "rvb-spectra needs a radial beam");
                }
            }
        }
        Study::Streak | Study::Reconstruct => {
            if let Some(x) = cfg.xuv.as_ref() {
                if x.spot.is_none() {
                    c.push("xuv.spot", "streaking needs an XUV spot profile");
                }
            }
            if st == Study::Reconstruct && g.azimuths < 8 {
                c.push("grids.azimuths", "reconstruction needs at least 8 azimuths");
            }
        }
    }
}

/// A runnable example document for each study.
pub fn template(study: Study) -> &'static str {
    match study {
        Study::FieldsAudit => include_str!("../templates/fields-audit.toml"),
        Study::OamTransfer => include_str!("../templates/oam-transfer.toml"),
        Study::Dichroism => include_str!("../templates/dichroism.toml"),
        Study::RvbSpectra => include_str!("../templates/rvb-spectra.toml"),
        Study::Streak => include_str!("../templates/streak.toml"),
        Study::Reconstruct => include_str!("../templates/reconstruct.toml"),
    }
}

/// All diagnostics of a document; empty when it is valid.
pub fn validate(cfg: &ExperimentConfig) -> Vec<Diagnostic> {
    match Experiment::resolve(cfg) {
        Ok(_) => Vec::new(),
        Err(d) => d,
    }
}
