//! Conversions between laboratory units and atomic units.
//!
//! Only configuration parsing and report writing should touch these; the
//! numerical core works in atomic units throughout.

/// Speed of light in atomic units.
pub const SPEED_OF_LIGHT: f64 = 137.035999;
/// One hartree in eV.
pub const HARTREE_EV: f64 = 27.211386245988;
/// Bohr radius in metres.
pub const BOHR_M: f64 = 5.29177210903e-11;
/// Atomic unit of time in seconds.
pub const AU_TIME_S: f64 = 2.4188843265857e-17;
/// Atomic unit of intensity in W/cm².
pub const AU_INTENSITY_W_CM2: f64 = 3.50944758e16;

pub fn ev_to_au(ev: f64) -> f64 {
    ev / HARTREE_EV
}

pub fn au_to_ev(au: f64) -> f64 {
    au * HARTREE_EV
}

pub fn um_to_au(um: f64) -> f64 {
    um * 1e-6 / BOHR_M
}

pub fn nm_to_au(nm: f64) -> f64 {
    nm * 1e-9 / BOHR_M
}

pub fn fs_to_au(fs: f64) -> f64 {
    fs * 1e-15 / AU_TIME_S
}

/// Photon energy (a.u.) of light with the given vacuum wavelength in nm.
pub fn wavelength_nm_to_omega(nm: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / nm_to_au(nm)
}

/// Peak field strength E0 (a.u.) for a peak intensity in W/cm².
pub fn intensity_to_field(w_cm2: f64) -> f64 {
    (w_cm2 / AU_INTENSITY_W_CM2).sqrt()
}

/// Vector-potential amplitude `A0 = E0/ω` for a peak intensity in W/cm².
pub fn intensity_to_a0(w_cm2: f64, omega: f64) -> f64 {
    intensity_to_field(w_cm2) / omega
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn common_conversions() {
        assert!((ev_to_au(27.211386245988) - 1.0).abs() < 1e-15);
        // 800 nm ↔ 1.55 eV
        let w = wavelength_nm_to_omega(800.0);
        assert!((au_to_ev(w) - 1.5498).abs() < 1e-3);
        assert!((um_to_au(1.0) - 18897.26).abs() < 0.01);
        assert!((intensity_to_field(3.50944758e16) - 1.0).abs() < 1e-12);
    }
}
