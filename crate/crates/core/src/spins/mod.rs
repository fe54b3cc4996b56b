//! Exact quantum dynamics of small nucleus/electron spin clusters.
//!
//! Memory qubits are spin-1/2 phosphorus nuclei; control qubits are the
//! unpaired electrons of the phosphate head groups. Voltages on control
//! wires enter as time-dependent coefficients: the hyperfine coupling A_i(t)
//! between a nucleus and its electron, and the exchange J_ij(t) between
//! electron pairs. Everything is dimensionless; the claims under test are
//! structural (ratios, symmetries, fidelities), not laboratory numbers.
//!
//! State vectors are dense over 2^N amplitudes with N capped at 14, and the
//! propagator is exact to machine precision under the documented step bound,
//! so there is no approximation to validate beyond the step size.

mod evolve;
mod hamiltonian;
mod ops;

pub use evolve::{evolve, expm_dense, QuantumState};
pub use hamiltonian::{build_hamiltonian, Operator};
pub use ops::{
    a_gate_transfer, encode_singlet, fit_dephasing_scale, ou_phase_variance,
    singlet_vs_control_dephasing, spectator_noise_floor, CommonModeParams, DephasingCurves,
    NoiseFloorEstimate, NoiseMode, OuParams, SingletEncoding, SpectatorParams, TransferOutcome,
    TransferPulse,
};

use thiserror::Error;

use crate::geometry::Leaflet;

/// Hard cap on the spin count (Hilbert dimension 2^14 = 16384).
pub const MAX_SPINS: usize = 14;

#[derive(Debug, Error)]
pub enum SpinError {
    #[error("{n} spins exceeds the {MAX_SPINS}-spin cap")]
    TooManySpins { n: usize },
    #[error("system has no spins")]
    Empty,
    #[error("site index {site} out of range for {count} spins")]
    SiteOutOfRange { site: usize, count: usize },
    #[error("coupling references the same site {site} twice")]
    SelfCoupling { site: usize },
    #[error("hyperfine pair ({a}, {b}) must link one nucleus and one electron")]
    BadHyperfineKinds { a: usize, b: usize },
    #[error("exchange pair ({a}, {b}) must link two electrons")]
    BadExchangeKinds { a: usize, b: usize },
    #[error("spins {a} and {b} are co-located; dipolar coupling needs r > 0")]
    CoLocated { a: usize, b: usize },
    #[error("coupling amplitude {value} is not finite")]
    BadAmplitude { value: f64 },
    #[error("waveform must be non-negative, finite, with positive sample step")]
    BadWaveform,
    #[error("time {t} outside schedule duration {duration}")]
    TimeOutsideSchedule { t: f64, duration: f64 },
    #[error("step dt {dt} too large: dt * |H| = {product} exceeds 0.1")]
    StepTooLarge { dt: f64, product: f64 },
    #[error("state norm drifted to {norm} at step {step}")]
    NormDrift { norm: f64, step: usize },
    #[error("state dimension {got} does not match system dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinKind {
    Nuclear,
    Electron,
}

/// One spin-1/2 site. Positions are in angstroms.
#[derive(Clone, Copy, Debug)]
pub struct SpinSite {
    pub kind: SpinKind,
    pub position: [f64; 3],
    pub leaflet: Leaflet,
}

impl SpinSite {
    pub fn nuclear(position: [f64; 3], leaflet: Leaflet) -> SpinSite {
        SpinSite {
            kind: SpinKind::Nuclear,
            position,
            leaflet,
        }
    }

    pub fn electron(position: [f64; 3], leaflet: Leaflet) -> SpinSite {
        SpinSite {
            kind: SpinKind::Electron,
            position,
            leaflet,
        }
    }
}

/// Pairwise coupling with a base amplitude; gate waveforms multiply it.
#[derive(Clone, Copy, Debug)]
pub struct PairCoupling {
    pub a: usize,
    pub b: usize,
    pub amplitude: f64,
}

/// Secular dipolar magnitude `prefactor / r^3`; the angular factor is folded
/// into the prefactor.
pub fn dipolar_coupling(r_angstrom: f64, prefactor: f64) -> Result<f64, SpinError> {
    if r_angstrom <= 0.0 || r_angstrom.is_nan() {
        return Err(SpinError::CoLocated { a: 0, b: 0 });
    }
    Ok(prefactor / (r_angstrom * r_angstrom * r_angstrom))
}

/// Which dipolar Hamiltonian the builder assembles from site positions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DipolarForm {
    /// High-field truncation: zz minus flip-flop, with any angular factor
    /// folded into the prefactor. Valid when the Zeeman splitting dominates
    /// the coupling.
    #[default]
    Secular,
    /// Full anisotropic tensor `S_a . S_b - 3 (S_a . r)(S_b . r)` along the
    /// explicit pair axis. Does not conserve total m.
    Full,
}

/// Spin cluster with static field and coupling lists.
#[derive(Clone, Debug)]
pub struct SpinSystem {
    sites: Vec<SpinSite>,
    pub gamma_n: f64,
    pub gamma_e: f64,
    pub b_z: f64,
    hyperfine: Vec<PairCoupling>,
    exchange: Vec<PairCoupling>,
    dipolar_prefactor: f64,
    dipolar_form: DipolarForm,
}

impl SpinSystem {
    /// Validates kinds, indices, and the dimension cap. With a nonzero
    /// dipolar prefactor every pair must sit at distinct positions.
    pub fn new(
        sites: Vec<SpinSite>,
        gamma_n: f64,
        gamma_e: f64,
        b_z: f64,
        hyperfine: Vec<PairCoupling>,
        exchange: Vec<PairCoupling>,
        dipolar_prefactor: f64,
    ) -> Result<SpinSystem, SpinError> {
        if sites.is_empty() {
            return Err(SpinError::Empty);
        }
        if sites.len() > MAX_SPINS {
            return Err(SpinError::TooManySpins { n: sites.len() });
        }
        let n = sites.len();
        let check_pair = |p: &PairCoupling| -> Result<(), SpinError> {
            for site in [p.a, p.b] {
                if site >= n {
                    return Err(SpinError::SiteOutOfRange { site, count: n });
                }
            }
            if p.a == p.b {
                return Err(SpinError::SelfCoupling { site: p.a });
            }
            if !p.amplitude.is_finite() {
                return Err(SpinError::BadAmplitude { value: p.amplitude });
            }
            Ok(())
        };
        for p in &hyperfine {
            check_pair(p)?;
            let kinds = (sites[p.a].kind, sites[p.b].kind);
            if kinds != (SpinKind::Nuclear, SpinKind::Electron)
                && kinds != (SpinKind::Electron, SpinKind::Nuclear)
            {
                return Err(SpinError::BadHyperfineKinds { a: p.a, b: p.b });
            }
        }
        for p in &exchange {
            check_pair(p)?;
            if sites[p.a].kind != SpinKind::Electron || sites[p.b].kind != SpinKind::Electron {
                return Err(SpinError::BadExchangeKinds { a: p.a, b: p.b });
            }
        }
        if dipolar_prefactor != 0.0 {
            for a in 0..n {
                for b in a + 1..n {
                    if distance(&sites[a], &sites[b]) == 0.0 {
                        return Err(SpinError::CoLocated { a, b });
                    }
                }
            }
        }
        Ok(SpinSystem {
            sites,
            gamma_n,
            gamma_e,
            b_z,
            hyperfine,
            exchange,
            dipolar_prefactor,
            dipolar_form: DipolarForm::Secular,
        })
    }

    /// Selects the dipolar Hamiltonian form. The constructor defaults to
    /// [`DipolarForm::Secular`].
    pub fn with_dipolar_form(mut self, form: DipolarForm) -> SpinSystem {
        self.dipolar_form = form;
        self
    }

    pub fn dipolar_form(&self) -> DipolarForm {
        self.dipolar_form
    }

    /// One nucleus and one electron with hyperfine amplitude `a`, no
    /// dipolar term: the elementary gate testbed.
    pub fn nucleus_electron_pair(a: f64, b_z: f64) -> SpinSystem {
        SpinSystem::new(
            vec![
                SpinSite::nuclear([0.0, 0.0, 0.0], Leaflet::Outer),
                SpinSite::electron([0.0, 0.0, 1.0], Leaflet::Outer),
            ],
            1.0,
            1.0e3,
            b_z,
            vec![PairCoupling {
                a: 0,
                b: 1,
                amplitude: a,
            }],
            vec![],
            0.0,
        )
        .expect("two-spin system is valid")
    }

    /// Two electrons with exchange amplitude `j`.
    pub fn electron_pair(j: f64, b_z: f64) -> SpinSystem {
        SpinSystem::new(
            vec![
                SpinSite::electron([0.0, 0.0, 0.0], Leaflet::Outer),
                SpinSite::electron([4.0, 0.0, 0.0], Leaflet::Outer),
            ],
            1.0,
            1.0e3,
            b_z,
            vec![],
            vec![PairCoupling {
                a: 0,
                b: 1,
                amplitude: j,
            }],
            0.0,
        )
        .expect("two-spin system is valid")
    }

    pub fn n_spins(&self) -> usize {
        self.sites.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.sites.len()
    }

    pub fn sites(&self) -> &[SpinSite] {
        &self.sites
    }

    pub fn hyperfine(&self) -> &[PairCoupling] {
        &self.hyperfine
    }

    pub fn exchange(&self) -> &[PairCoupling] {
        &self.exchange
    }

    pub fn dipolar_prefactor(&self) -> f64 {
        self.dipolar_prefactor
    }

    /// Zeeman coefficient of site `i`: nuclear moments align with the field,
    /// electron moments oppose it.
    pub fn zeeman_coefficient(&self, i: usize) -> f64 {
        match self.sites[i].kind {
            SpinKind::Nuclear => self.gamma_n * self.b_z,
            SpinKind::Electron => -self.gamma_e * self.b_z,
        }
    }

    /// Radial dipolar coefficient `prefactor / r^3` for a site pair.
    pub fn dipolar_between(&self, a: usize, b: usize) -> Result<f64, SpinError> {
        let r = distance(&self.sites[a], &self.sites[b]);
        if r == 0.0 {
            return Err(SpinError::CoLocated { a, b });
        }
        dipolar_coupling(r, self.dipolar_prefactor)
    }

    /// Unit vector from site `a` to site `b`.
    pub fn separation_axis(&self, a: usize, b: usize) -> Result<[f64; 3], SpinError> {
        let r = distance(&self.sites[a], &self.sites[b]);
        if r == 0.0 {
            return Err(SpinError::CoLocated { a, b });
        }
        let (pa, pb) = (self.sites[a].position, self.sites[b].position);
        Ok([
            (pb[0] - pa[0]) / r,
            (pb[1] - pa[1]) / r,
            (pb[2] - pa[2]) / r,
        ])
    }
}

fn distance(a: &SpinSite, b: &SpinSite) -> f64 {
    let dx = a.position[0] - b.position[0];
    let dy = a.position[1] - b.position[1];
    let dz = a.position[2] - b.position[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Piecewise-linear non-negative waveform, sampled on a uniform grid.
/// Values clamp to the end samples outside the sampled range.
#[derive(Clone, Debug)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_step: f64,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_step: f64) -> Result<Waveform, SpinError> {
        if samples.is_empty()
            || !(sample_step > 0.0 && sample_step.is_finite())
            || samples.iter().any(|v| !v.is_finite() || *v < 0.0)
        {
            return Err(SpinError::BadWaveform);
        }
        Ok(Waveform {
            samples,
            sample_step,
        })
    }

    pub fn constant(value: f64) -> Result<Waveform, SpinError> {
        Waveform::new(vec![value], 1.0)
    }

    /// Rise over one sample, hold, fall over one sample.
    pub fn trapezoid(
        peak: f64,
        hold_samples: usize,
        sample_step: f64,
    ) -> Result<Waveform, SpinError> {
        let mut samples = vec![0.0];
        samples.extend(std::iter::repeat_n(peak, hold_samples + 1));
        samples.push(0.0);
        Waveform::new(samples, sample_step)
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let last = self.samples.len() - 1;
        if t <= 0.0 || last == 0 {
            return self.samples[0];
        }
        let u = t / self.sample_step;
        if u >= last as f64 {
            return self.samples[last];
        }
        let k = u.floor() as usize;
        let frac = u - k as f64;
        self.samples[k] * (1.0 - frac) + self.samples[k + 1] * frac
    }

    /// Integral over the full sampled range (trapezoid rule is exact for
    /// piecewise-linear data).
    pub fn area(&self) -> f64 {
        if self.samples.len() == 1 {
            return 0.0;
        }
        let mut area = 0.0;
        for w in self.samples.windows(2) {
            area += 0.5 * (w[0] + w[1]) * self.sample_step;
        }
        area
    }
}

/// Time-dependent multipliers on the coupling amplitudes. An unmodulated
/// coupling keeps its base amplitude.
#[derive(Clone, Debug)]
pub struct GateSchedule {
    duration: f64,
    a_mod: Vec<(usize, Waveform)>,
    j_mod: Vec<(usize, Waveform)>,
}

impl GateSchedule {
    pub fn constant(duration: f64) -> GateSchedule {
        GateSchedule {
            duration,
            a_mod: Vec::new(),
            j_mod: Vec::new(),
        }
    }

    pub fn with_a_waveform(mut self, pair_index: usize, w: Waveform) -> GateSchedule {
        self.a_mod.push((pair_index, w));
        self
    }

    pub fn with_j_waveform(mut self, pair_index: usize, w: Waveform) -> GateSchedule {
        self.j_mod.push((pair_index, w));
        self
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn a_multiplier(&self, pair_index: usize, t: f64) -> f64 {
        self.a_mod
            .iter()
            .find(|(i, _)| *i == pair_index)
            .map_or(1.0, |(_, w)| w.value_at(t))
    }

    pub fn j_multiplier(&self, pair_index: usize, t: f64) -> f64 {
        self.j_mod
            .iter()
            .find(|(i, _)| *i == pair_index)
            .map_or(1.0, |(_, w)| w.value_at(t))
    }
}
