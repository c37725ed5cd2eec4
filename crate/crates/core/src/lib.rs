//! Nonrelativistic electron dynamics in intense structured laser fields.
//!
//! The crate is organised bottom-up:
//!
//! * [`fields`]: near-axis vector potentials of optical vortices, vector
//!   beams and propagating optical skyrmions, their analytic gradients and the
//!   first-order local expansion around an atom.
//! * [`volkov`]: kinematic momentum and phase of the structured-light Volkov
//!   wave, both in closed form and by quadrature.
//! * [`atom`]: effective single-electron helium potential, bound and
//!   continuum states and dipole matrix elements.
//! * [`ionization`]: laser-assisted photoionization amplitudes, sideband
//!   projections, photoelectron ⟨L_z⟩, orbital dichroism and spot averages.
//! * [`streaking`]: attosecond streaking in a skyrmionic dressing field and
//!   reconstruction of its radial component.
//! * [`config`], [`io`] and [`units`]: experiment configuration, file formats
//!   and unit conversion at the boundary. Everything else is atomic units.

// NaN-rejecting guards and 3×3 index loops read better as written
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod atom;
pub mod config;
pub mod error;
pub mod fields;
pub mod io;
pub mod ionization;
pub mod special;
pub mod streaking;
pub mod units;
pub mod volkov;

pub use error::{Error, Result};
pub use fields::{AtomPosition, BeamKind, BeamSpec, LocalExpansion};
pub use volkov::{MomentumPoint, PhaseResult};
