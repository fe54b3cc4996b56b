//! Chiral surface electrodynamics on the membrane cylinder.
//!
//! Each leaflet carries a planar gauge theory with fields `(E_x, E_phi, B_r)`
//! and a Chern-Simons coefficient `mu` of opposite sign on the two leaflets
//! (see [`crate::geometry::ChiralityField::surface_mu`]). The time-domain
//! solver is a staggered leapfrog scheme; the Chern-Simons rotation of the
//! electric field is applied semi-implicitly (Cayley form, averaging old and
//! new `E`), which keeps it exactly norm-preserving at any `mu * dt`.
//!
//! The module also provides the continuum dispersion relation of the full
//! chiral theory, a spectral-gap estimator for solver output, and the
//! transverse (through-membrane) discharge bookkeeping that converts a
//! current pulse through a puncture into an integer winding transfer.

mod discharge;
mod dispersion;
mod solver;
mod state;

pub use discharge::{puncture_discharge, DischargeOutcome, Pulse, MIN_PULSE_SAMPLES};
pub use dispersion::{characteristic, dispersion, DispersionResult};
pub use solver::{measure_gap_from_run, GapMeasurement, Solver, XBoundary, MIN_PERIODS_RESOLVED};
pub use state::{EmState, LeafletState, PunctureSector};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("dt = {dt} must be positive and finite")]
    BadDt { dt: f64 },
    #[error("dt = {dt} exceeds the stability bound {bound} (cell_size / sqrt(2))")]
    DtAboveBound { dt: f64, bound: f64 },
    #[error("state shape {state_nx}x{state_nc} does not match solver lattice {nx}x{nc}")]
    DimensionMismatch {
        state_nx: usize,
        state_nc: usize,
        nx: usize,
        nc: usize,
    },
    #[error("non-finite value in {field} at step {step}; halting")]
    NonFinite { field: String, step: u64 },
    #[error("puncture id {id} out of range ({count} punctures)")]
    UnknownPuncture { id: usize, count: usize },
    #[error("pulse resolved by {samples} samples; at least {required} required")]
    PulseUnderResolved { samples: usize, required: usize },
    #[error("absorbing layer width {width} does not fit lattice length {nx}")]
    AbsorberTooWide { width: usize, nx: usize },
}
