//! Simulation library for membrane-hosted quantum device studies.
//!
//! The physical setting is a phospholipid bilayer rolled into a cylinder.
//! Four simulators share that geometry:
//!
//! * [`mcs`] - chiral (Maxwell-Chern-Simons) electrodynamics reduced to the
//!   two membrane leaflets, with a transverse sector for puncture discharges;
//! * [`topo`] - a register of winding states on the annular segments between
//!   punctures, with holonomy evaluation and parity-protected channels;
//! * [`spins`] - exact state-vector dynamics of small nuclear/electron spin
//!   clusters under gate-modulated hyperfine, exchange and dipolar couplings;
//! * [`placement`] - annealed Monte Carlo placement of polar lipids over
//!   charged nanowire gates.
//!
//! [`geometry`] defines the lattice, punctures and the chirality field that
//! everything else consumes; [`signal`] holds small time-series fitting
//! utilities shared by the solvers and their diagnostics.

pub mod geometry;
pub mod mcs;
pub mod placement;
pub mod signal;
pub mod spins;
pub mod topo;

/// Crate version, recorded in output manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
