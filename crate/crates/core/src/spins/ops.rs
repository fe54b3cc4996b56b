//! Gate pulses, singlet encoding, and noise-floor experiments.
//!
//! Because the hyperfine pulse Hamiltonian commutes with itself at all
//! times, transfer outcomes depend only on the pulse area; that closed form
//! (fidelity = (5 - 3 cos(area)) / 8 for the probe input used here) is what
//! the tests pin against. Dephasing baths are exact diagonal rotations
//! driven by an Ornstein-Uhlenbeck voltage record, with the discrete-sum
//! phase variance as the analytic oracle.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::evolve::{evolve, evolve_with, QuantumState, PLUS, UP};
use super::{DipolarForm, GateSchedule, SpinError, SpinSite, SpinSystem, Waveform};
use crate::geometry::Leaflet;

/// Hyperfine control pulse: a trapezoid (one-sample rise and fall, flat
/// hold) multiplying the base coupling. `peak` is the multiplier at the
/// hold; `duration` is the full pulse length; `dt` bounds the integrator
/// step.
#[derive(Clone, Copy, Debug)]
pub struct TransferPulse {
    pub peak: f64,
    pub duration: f64,
    pub dt: f64,
}

/// Trapezoid with one rise and one fall sample among `HOLD_SAMPLES + 2`:
/// area = peak * duration * (HOLD_SAMPLES + 1) / (HOLD_SAMPLES + 2).
const HOLD_SAMPLES: usize = 8;

impl TransferPulse {
    /// Area under the hyperfine multiplier over the pulse.
    pub fn area(&self) -> f64 {
        let n = (HOLD_SAMPLES + 2) as f64;
        self.peak * self.duration * (n - 1.0) / n
    }

    /// Duration tuned so the pulse area is exactly pi: a full
    /// nucleus-electron state transfer.
    pub fn calibrated(peak: f64, dt: f64) -> TransferPulse {
        let n = (HOLD_SAMPLES + 2) as f64;
        TransferPulse {
            peak,
            duration: std::f64::consts::PI * n / ((n - 1.0) * peak),
            dt,
        }
    }

    /// Duration scaled for an arbitrary target area.
    pub fn with_area(area: f64, peak: f64, dt: f64) -> TransferPulse {
        let base = TransferPulse::calibrated(peak, dt);
        TransferPulse {
            duration: base.duration * area / std::f64::consts::PI,
            ..base
        }
    }
}

#[derive(Clone, Debug)]
pub struct TransferOutcome {
    /// Overlap with the ideal swapped state (nuclear coherence moved onto
    /// the electron).
    pub fidelity: f64,
    pub pulse_area: f64,
    pub final_state: QuantumState,
}

/// Drives the hyperfine coupling of a nucleus-electron pair with the pulse
/// and reports how well the nuclear state |+> arrived on the electron. The
/// static field is balanced out over the transfer window, so the outcome is
/// a function of pulse area alone.
pub fn a_gate_transfer(pulse: &TransferPulse) -> Result<TransferOutcome, SpinError> {
    if !(pulse.peak.is_finite() && pulse.peak > 0.0)
        || !(pulse.duration.is_finite() && pulse.duration >= 0.0)
    {
        return Err(SpinError::BadWaveform);
    }
    let system = SpinSystem::nucleus_electron_pair(1.0, 0.0);
    let initial = QuantumState::from_product(&[PLUS, UP]);
    let ideal = QuantumState::from_product(&[UP, PLUS]);
    if pulse.duration == 0.0 {
        return Ok(TransferOutcome {
            fidelity: initial.fidelity(&ideal),
            pulse_area: 0.0,
            final_state: initial,
        });
    }
    let segments = (HOLD_SAMPLES + 2) as f64;
    let sample_step = pulse.duration / segments;
    let wave = Waveform::trapezoid(pulse.peak, HOLD_SAMPLES, sample_step)?;
    let schedule = GateSchedule::constant(pulse.duration).with_a_waveform(0, wave);
    // Step grid aligned to the waveform's linear segments: the midpoint rule
    // is then exact, so the applied area equals the analytic pulse area.
    let per_segment = (sample_step / pulse.dt).ceil().max(1.0);
    let aligned_dt = pulse.duration / (segments * per_segment) * (1.0 + 1e-12);
    let final_state = evolve(&initial, &system, &schedule, aligned_dt)?;
    Ok(TransferOutcome {
        fidelity: final_state.fidelity(&ideal),
        pulse_area: pulse.area(),
        final_state,
    })
}

/// A register state with two sites in the rotationally invariant singlet
/// and every other spin up.
#[derive(Clone, Debug)]
pub struct SingletEncoding {
    pub state: QuantumState,
    pub pair: (usize, usize),
    /// True when both sites sit on the same leaflet; cross-leaflet pairs
    /// are the configuration whose common-mode noise cancels.
    pub same_leaflet: bool,
}

pub fn encode_singlet(
    system: &SpinSystem,
    pair: (usize, usize),
) -> Result<SingletEncoding, SpinError> {
    let n = system.n_spins();
    for site in [pair.0, pair.1] {
        if site >= n {
            return Err(SpinError::SiteOutOfRange { site, count: n });
        }
    }
    if pair.0 == pair.1 {
        return Err(SpinError::SelfCoupling { site: pair.0 });
    }
    let dim = 1usize << n;
    let mask_a = 1usize << (n - 1 - pair.0);
    let mask_b = 1usize << (n - 1 - pair.1);
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    amps[mask_b] = Complex64::new(s, 0.0); // pair.0 up, pair.1 down
    amps[mask_a] = Complex64::new(-s, 0.0); // pair.0 down, pair.1 up
    let sites = system.sites();
    Ok(SingletEncoding {
        state: QuantumState::from_amplitudes(amps),
        pair,
        same_leaflet: sites[pair.0].leaflet == sites[pair.1].leaflet,
    })
}

/// Ornstein-Uhlenbeck noise: stationary std `sigma`, correlation time `tau`.
#[derive(Clone, Copy, Debug)]
pub struct OuParams {
    pub sigma: f64,
    pub tau: f64,
}

struct OuProcess {
    x: f64,
    rho: f64,
    drive: f64,
    sigma: f64,
}

impl OuProcess {
    fn start(params: &OuParams, dt: f64, rng: &mut ChaCha8Rng) -> OuProcess {
        let rho = (-dt / params.tau).exp();
        let xi: f64 = rng.sample(StandardNormal);
        OuProcess {
            x: params.sigma * xi,
            rho,
            drive: params.sigma * (1.0 - rho * rho).sqrt(),
            sigma: params.sigma,
        }
    }

    fn advance(&mut self, rng: &mut ChaCha8Rng) {
        let xi: f64 = rng.sample(StandardNormal);
        self.x = self.rho * self.x + self.drive * xi;
        let _ = self.sigma;
    }
}

/// Variance of the accumulated phase gamma * dt * sum of the first `n` OU
/// samples, using the exact discrete covariance sigma^2 rho^|i-j|.
pub fn ou_phase_variance(gamma: f64, dt: f64, params: &OuParams, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let rho = (-dt / params.tau).exp();
    let nf = n as f64;
    let mut cross = 0.0;
    let mut rho_d = rho;
    for d in 1..n {
        cross += (nf - d as f64) * rho_d;
        rho_d *= rho;
    }
    (gamma * dt * params.sigma).powi(2) * (nf + 2.0 * cross)
}

/// Whether the two sites see the same voltage record or opposite ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseMode {
    Common,
    Differential,
}

#[derive(Clone, Debug)]
pub struct CommonModeParams {
    /// Coupling of the fluctuating voltage to each spin's z axis.
    pub gamma: f64,
    pub noise: OuParams,
    pub dt: f64,
    pub steps: usize,
    pub realizations: usize,
    pub record_every: usize,
    pub seed: u64,
    pub mode: NoiseMode,
}

#[derive(Clone, Debug)]
pub struct DephasingCurves {
    pub times: Vec<f64>,
    /// Ensemble mean overlap of the encoded pair with the initial singlet.
    pub singlet_fidelity: Vec<f64>,
    /// Worst single realization, for the protection claim.
    pub singlet_worst: Vec<f64>,
    /// |ensemble mean coherence| of an unencoded |+> spin, normalized to 1.
    pub control_coherence: Vec<f64>,
    /// exp(-Var/2) from the discrete OU phase-variance formula.
    pub oracle_coherence: Vec<f64>,
}

fn realization_rng(seed: u64, r: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add((r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// Runs a two-spin singlet and a bare |+> control through the same
/// fluctuating-voltage record. Common-mode records leave the singlet fixed;
/// the control dephases at the analytic rate either way.
pub fn singlet_vs_control_dephasing(params: &CommonModeParams) -> DephasingCurves {
    let record_every = params.record_every.max(1);
    let n_records = params.steps / record_every;
    let mut times = Vec::with_capacity(n_records);
    for i in 1..=n_records {
        times.push((i * record_every) as f64 * params.dt);
    }
    let mut singlet_sum = vec![0.0; n_records];
    let mut singlet_worst = vec![f64::INFINITY; n_records];
    let mut control_sum = vec![Complex64::new(0.0, 0.0); n_records];

    let pair_system = SpinSystem::new(
        vec![
            SpinSite::nuclear([0.0; 3], Leaflet::Outer),
            SpinSite::nuclear([0.0; 3], Leaflet::Inner),
        ],
        1.0,
        1.0e3,
        0.0,
        vec![],
        vec![],
        0.0,
    )
    .expect("pair system is valid");
    let singlet0 = encode_singlet(&pair_system, (0, 1))
        .expect("pair in range")
        .state;

    for r in 0..params.realizations {
        let mut rng = realization_rng(params.seed, r);
        let mut ou = OuProcess::start(&params.noise, params.dt, &mut rng);
        let mut pair = singlet0.clone();
        let mut control = QuantumState::from_product(&[PLUS]);
        let mut recorded = 0;
        for step in 1..=params.steps {
            let angle = params.gamma * ou.x * params.dt;
            let partner = match params.mode {
                NoiseMode::Common => angle,
                NoiseMode::Differential => -angle,
            };
            pair.apply_z_rotation(0, angle);
            pair.apply_z_rotation(1, partner);
            control.apply_z_rotation(0, angle);
            ou.advance(&mut rng);
            if step % record_every == 0 && recorded < n_records {
                let f = pair.fidelity(&singlet0);
                singlet_sum[recorded] += f;
                singlet_worst[recorded] = singlet_worst[recorded].min(f);
                control_sum[recorded] += 2.0 * control.site_coherence(0);
                recorded += 1;
            }
        }
    }

    let r = params.realizations.max(1) as f64;
    let oracle_coherence = (1..=n_records)
        .map(|i| {
            (-0.5 * ou_phase_variance(params.gamma, params.dt, &params.noise, i * record_every))
                .exp()
        })
        .collect();
    DephasingCurves {
        times,
        singlet_fidelity: singlet_sum.iter().map(|s| s / r).collect(),
        singlet_worst,
        control_coherence: control_sum.iter().map(|c| (c / r).norm()).collect(),
        oracle_coherence,
    }
}

/// Weighted least-squares exponent `s` such that `observed ~ oracle^s`: the
/// ratio of the observed dephasing exponent to the reference one, fitted over
/// the whole decay curve. Each point is weighted by the inverse variance of
/// an ensemble cosine estimator with Gaussian phase, Var = (1 - o^2)^2 / 2,
/// so the early, precise part of the curve dominates. A fitted T2 follows by
/// crossing `oracle^s` at 1/e. The search bracket is [0.2, 5]; a result
/// pinned to an edge means the curves do not share a shape. `None` when no
/// point has `0 < oracle < 1` and a finite observation.
pub fn fit_dephasing_scale(observed: &[f64], oracle: &[f64]) -> Option<f64> {
    let points: Vec<(f64, f64, f64)> = observed
        .iter()
        .zip(oracle)
        .filter(|(c, o)| c.is_finite() && **o > 0.0 && **o < 1.0)
        .map(|(&c, &o)| {
            let half_span = 0.5 * (1.0 - o * o);
            (c, o, 1.0 / (2.0 * half_span * half_span))
        })
        .collect();
    if points.is_empty() {
        return None;
    }
    let objective = |s: f64| -> f64 {
        points
            .iter()
            .map(|&(c, o, w)| {
                let m = o.powf(s);
                w * (c - m) * (c - m)
            })
            .sum()
    };
    let (mut a, mut b) = (0.2_f64, 5.0_f64);
    let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let (mut c1, mut c2) = (b - phi * (b - a), a + phi * (b - a));
    let (mut f1, mut f2) = (objective(c1), objective(c2));
    for _ in 0..120 {
        if f1 < f2 {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - phi * (b - a);
            f1 = objective(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + phi * (b - a);
            f2 = objective(c2);
        }
    }
    Some(0.5 * (a + b))
}

/// Spectator-bath experiment: one |+> memory nucleus at the origin, `m`
/// frozen spectator nuclei scattered in an annulus, coupled by the secular
/// cube-law interaction only.
#[derive(Clone, Debug)]
pub struct SpectatorParams {
    pub m_spectators: usize,
    /// Annulus bounds in angstroms.
    pub min_distance: f64,
    pub max_distance: f64,
    pub prefactor: f64,
    pub dipolar_form: DipolarForm,
    pub duration: f64,
    pub dt: f64,
    pub record_every: usize,
    pub realizations: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct NoiseFloorEstimate {
    /// 1 / t where the ensemble coherence first falls below 1/e; zero if it
    /// never does within the run.
    pub rate: f64,
    pub crossed: bool,
    /// Largest qubit-spectator coupling magnitude seen across realizations.
    pub max_coupling: f64,
    pub times: Vec<f64>,
    pub coherence: Vec<f64>,
}

pub fn spectator_noise_floor(params: &SpectatorParams) -> Result<NoiseFloorEstimate, SpinError> {
    if !(params.min_distance > 0.0 && params.max_distance >= params.min_distance) {
        return Err(SpinError::CoLocated { a: 0, b: 0 });
    }
    let record_every = params.record_every.max(1);
    let n_steps = (params.duration / params.dt).ceil().max(1.0) as usize;
    let n_records = n_steps / record_every;
    let mut sums = vec![Complex64::new(0.0, 0.0); n_records];
    let mut times = vec![0.0; n_records];
    let mut max_coupling = 0.0_f64;

    for r in 0..params.realizations {
        let mut rng = realization_rng(params.seed, r);
        let mut sites = vec![SpinSite::nuclear([0.0; 3], Leaflet::Outer)];
        // Jittered ring angles keep spectators apart (hard-core packing)
        // while staying random; rescaling the annulus rescales every
        // position exactly, preserving the cube-law scaling test.
        for j in 0..params.m_spectators {
            let u: f64 = rng.gen();
            let radius = params.min_distance + u * (params.max_distance - params.min_distance);
            let jitter: f64 = rng.gen();
            let angle =
                std::f64::consts::TAU * (j as f64 + 0.3 * jitter) / params.m_spectators as f64;
            sites.push(SpinSite::nuclear(
                [radius * angle.cos(), radius * angle.sin(), 0.0],
                Leaflet::Outer,
            ));
        }
        let mut spinors = vec![PLUS];
        for _ in 0..params.m_spectators {
            spinors.push(if rng.gen::<bool>() {
                UP
            } else {
                super::evolve::DOWN
            });
        }
        let system = SpinSystem::new(sites, 1.0, 1.0e3, 0.0, vec![], vec![], params.prefactor)?
            .with_dipolar_form(params.dipolar_form);
        for j in 1..system.n_spins() {
            max_coupling = max_coupling.max(system.dipolar_between(0, j)?.abs());
        }
        let initial = QuantumState::from_product(&spinors);
        let schedule = GateSchedule::constant(params.duration);
        let mut recorded = 0;
        evolve_with(&initial, &system, &schedule, params.dt, |step, t, psi| {
            if (step + 1) % record_every == 0 && recorded < n_records {
                sums[recorded] += 2.0 * psi.site_coherence(0);
                times[recorded] = t;
                recorded += 1;
            }
        })?;
    }

    let r = params.realizations.max(1) as f64;
    let coherence: Vec<f64> = sums.iter().map(|c| (c / r).norm()).collect();
    let threshold = (-1.0_f64).exp();
    let mut rate = 0.0;
    let mut crossed = false;
    let mut prev_t = 0.0;
    let mut prev_c = 1.0;
    for (&t, &c) in times.iter().zip(&coherence) {
        if c < threshold {
            let frac = (prev_c - threshold) / (prev_c - c);
            let t_cross = prev_t + frac * (t - prev_t);
            rate = 1.0 / t_cross;
            crossed = true;
            break;
        }
        prev_t = t;
        prev_c = c;
    }
    Ok(NoiseFloorEstimate {
        rate,
        crossed,
        max_coupling,
        times,
        coherence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn transfer_fidelity_oracle(area: f64) -> f64 {
        (5.0 - 3.0 * area.cos()) / 8.0
    }

    #[test]
    fn calibrated_pulse_transfers() {
        let out = a_gate_transfer(&TransferPulse::calibrated(1.0, 0.05)).unwrap();
        assert!((out.pulse_area - std::f64::consts::PI).abs() < 1e-12);
        assert!(out.fidelity > 1.0 - 1e-9, "fidelity {}", out.fidelity);
        // peak changes must not matter once the area is calibrated
        let fast = a_gate_transfer(&TransferPulse::calibrated(4.0, 0.02)).unwrap();
        assert!(fast.fidelity > 1.0 - 1e-9);
    }

    #[test]
    fn fidelity_follows_area_law() {
        for area in [0.4, 1.3, std::f64::consts::PI / 2.0, 2.8, 5.1] {
            let out = a_gate_transfer(&TransferPulse::with_area(area, 1.0, 0.03)).unwrap();
            let expect = transfer_fidelity_oracle(area);
            assert!(
                (out.fidelity - expect).abs() < 1e-9,
                "area {area}: got {} expected {expect}",
                out.fidelity
            );
        }
    }

    #[test]
    fn detuned_pulse_fails_transfer() {
        // doubling the duration doubles the area to 2 pi: full revival
        let cal = TransferPulse::calibrated(1.0, 0.05);
        let detuned = TransferPulse {
            duration: 2.0 * cal.duration,
            ..cal
        };
        let out = a_gate_transfer(&detuned).unwrap();
        assert!(out.fidelity < 0.99, "detuned fidelity {}", out.fidelity);
        assert!((out.fidelity - 0.25).abs() < 1e-9);
    }

    #[test]
    fn zero_duration_is_idle() {
        let out = a_gate_transfer(&TransferPulse {
            peak: 1.0,
            duration: 0.0,
            dt: 0.05,
        })
        .unwrap();
        assert!((out.fidelity - 0.25).abs() < 1e-12);
        assert_eq!(out.pulse_area, 0.0);
    }

    #[test]
    fn singlet_encoding_shape() {
        let sys = SpinSystem::new(
            vec![
                SpinSite::nuclear([0.0; 3], Leaflet::Outer),
                SpinSite::nuclear([0.0, 0.0, -4.0], Leaflet::Inner),
                SpinSite::nuclear([9.0, 0.0, 0.0], Leaflet::Outer),
            ],
            1.0,
            1.0e3,
            0.0,
            vec![],
            vec![],
            0.0,
        )
        .unwrap();
        let enc = encode_singlet(&sys, (0, 1)).unwrap();
        assert!(!enc.same_leaflet);
        assert!((enc.state.norm() - 1.0).abs() < 1e-14);
        // third spin stays up: only indices 010 and 100 populated
        let amps = enc.state.amplitudes();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((amps[0b010] - Complex64::new(s, 0.0)).norm() < 1e-15);
        assert!((amps[0b100] - Complex64::new(-s, 0.0)).norm() < 1e-15);
        assert_eq!(amps.iter().filter(|a| a.norm() > 0.0).count(), 2);

        let same = encode_singlet(&sys, (0, 2)).unwrap();
        assert!(same.same_leaflet);
        assert!(encode_singlet(&sys, (0, 0)).is_err());
        assert!(encode_singlet(&sys, (0, 3)).is_err());
    }

    #[test]
    fn singlet_invariant_under_identical_rotations() {
        let sys = SpinSystem::new(
            vec![
                SpinSite::nuclear([0.0; 3], Leaflet::Outer),
                SpinSite::nuclear([0.0, 0.0, -4.0], Leaflet::Inner),
            ],
            1.0,
            1.0e3,
            0.0,
            vec![],
            vec![],
            0.0,
        )
        .unwrap();
        let enc = encode_singlet(&sys, (0, 1)).unwrap();
        for angle in [0.3, 1.7, -2.4, 11.0] {
            let mut rotated = enc.state.clone();
            rotated.apply_z_rotation(0, angle);
            rotated.apply_z_rotation(1, angle);
            assert!(rotated.fidelity(&enc.state) > 1.0 - 1e-14);
        }
    }

    #[test]
    fn common_mode_protects_singlet() {
        let params = CommonModeParams {
            gamma: 1.0,
            noise: OuParams {
                sigma: 0.8,
                tau: 0.5,
            },
            dt: 0.1,
            steps: 400,
            realizations: 50,
            record_every: 40,
            seed: 11,
            mode: NoiseMode::Common,
        };
        let curves = singlet_vs_control_dephasing(&params);
        for &f in &curves.singlet_worst {
            assert!(f > 1.0 - 1e-12, "singlet fidelity dropped to {f}");
        }
        // the same record visibly dephases the control spin
        assert!(curves.control_coherence.last().unwrap() < &0.7);
    }

    #[test]
    fn differential_mode_breaks_singlet() {
        let params = CommonModeParams {
            gamma: 1.0,
            noise: OuParams {
                sigma: 0.6,
                tau: 0.1,
            },
            dt: 0.1,
            steps: 200,
            realizations: 60,
            record_every: 20,
            seed: 12,
            mode: NoiseMode::Differential,
        };
        let curves = singlet_vs_control_dephasing(&params);
        assert!(
            curves.singlet_fidelity.last().unwrap() < &0.9,
            "differential noise should break the singlet: {:?}",
            curves.singlet_fidelity.last()
        );
    }

    #[test]
    fn control_coherence_matches_ou_oracle() {
        let params = CommonModeParams {
            gamma: 1.0,
            noise: OuParams {
                sigma: 0.35,
                tau: 0.2,
            },
            dt: 0.1,
            steps: 300,
            realizations: 4000,
            record_every: 50,
            seed: 13,
            mode: NoiseMode::Common,
        };
        let curves = singlet_vs_control_dephasing(&params);
        for (got, want) in curves
            .control_coherence
            .iter()
            .zip(&curves.oracle_coherence)
        {
            assert!(
                (got - want).abs() < 0.04,
                "coherence {got} vs oracle {want}"
            );
        }
        // the oracle should predict meaningful decay over this window
        assert!(curves.oracle_coherence.last().unwrap() < &0.6);
    }

    #[test]
    fn dephasing_scale_recovers_exponent() {
        let oracle: Vec<f64> = (1..=120)
            .map(|i| (-2e-3 * (i as f64) * (i as f64)).exp())
            .collect();
        for want in [0.61, 1.0, 1.37] {
            let observed: Vec<f64> = oracle.iter().map(|o| o.powf(want)).collect();
            let s = fit_dephasing_scale(&observed, &oracle).unwrap();
            assert!((s - want).abs() < 1e-9, "scale {s} vs {want}");
        }
        assert!(fit_dephasing_scale(&[], &[]).is_none());
        assert!(fit_dephasing_scale(&[0.5], &[1.0]).is_none());
    }

    #[test]
    fn dephasing_scale_stays_near_unity_under_sampling_noise() {
        let params = CommonModeParams {
            gamma: 1.0,
            noise: OuParams {
                sigma: 0.4,
                tau: 5.0,
            },
            dt: 0.01,
            steps: 1000,
            realizations: 400,
            record_every: 10,
            seed: 2,
            mode: NoiseMode::Common,
        };
        let curves = singlet_vs_control_dephasing(&params);
        let s = fit_dephasing_scale(&curves.control_coherence, &curves.oracle_coherence).unwrap();
        assert!((s - 1.0).abs() < 0.1, "scale {s}");
    }

    #[test]
    fn phase_variance_limits_and_monte_carlo() {
        let gamma = 1.3;
        let dt = 0.05;
        // nearly uncorrelated: Var ~ n * (gamma dt sigma)^2
        let white = OuParams {
            sigma: 0.7,
            tau: 1e-6,
        };
        let v = ou_phase_variance(gamma, dt, &white, 200);
        let expect = 200.0 * (gamma * dt * 0.7_f64).powi(2);
        assert!((v - expect).abs() < 1e-6 * expect);
        // strongly correlated: Var ~ n^2 * (gamma dt sigma)^2
        let slow = OuParams {
            sigma: 0.7,
            tau: 1e9,
        };
        let v = ou_phase_variance(gamma, dt, &slow, 200);
        let expect = 200.0_f64.powi(2) * (gamma * dt * 0.7_f64).powi(2);
        assert!((v - expect).abs() < 1e-3 * expect);
        assert_eq!(ou_phase_variance(gamma, dt, &white, 0), 0.0);

        // Monte Carlo cross-check of the covariance bookkeeping
        let params = OuParams {
            sigma: 0.9,
            tau: 0.3,
        };
        let n = 60;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let reps = 20000;
        for r in 0..reps {
            let mut rng = realization_rng(99, r);
            let mut ou = OuProcess::start(&params, dt, &mut rng);
            let mut phase = 0.0;
            for _ in 0..n {
                phase += gamma * dt * ou.x;
                ou.advance(&mut rng);
            }
            sum += phase;
            sum_sq += phase * phase;
        }
        let mean = sum / reps as f64;
        let var = sum_sq / reps as f64 - mean * mean;
        let predicted = ou_phase_variance(gamma, dt, &params, n);
        assert!(
            (var - predicted).abs() < 0.05 * predicted,
            "monte carlo {var} vs formula {predicted}"
        );
    }

    #[test]
    fn no_spectators_no_decay() {
        let est = spectator_noise_floor(&SpectatorParams {
            m_spectators: 0,
            min_distance: 8.0,
            max_distance: 12.0,
            prefactor: 2000.0,
            dipolar_form: DipolarForm::Secular,
            duration: 1.0,
            dt: 0.01,
            record_every: 5,
            realizations: 3,
            seed: 7,
        })
        .unwrap();
        assert!(!est.crossed);
        assert_eq!(est.rate, 0.0);
        assert_eq!(est.max_coupling, 0.0);
        for &c in &est.coherence {
            assert!((c - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn doubling_distance_slows_decay_eightfold() {
        let near = SpectatorParams {
            m_spectators: 4,
            min_distance: 8.0,
            max_distance: 12.0,
            prefactor: 1500.0,
            dipolar_form: DipolarForm::Secular,
            duration: 10.0,
            dt: 0.005,
            record_every: 2,
            realizations: 24,
            seed: 21,
        };
        let far = SpectatorParams {
            min_distance: 16.0,
            max_distance: 24.0,
            ..near.clone()
        };
        let est_near = spectator_noise_floor(&near).unwrap();
        let est_far = spectator_noise_floor(&far).unwrap();
        assert!(est_near.crossed, "near bath must cross 1/e in the window");
        assert!(est_far.crossed, "far bath must cross 1/e in the window");
        let ratio = est_near.rate / est_far.rate;
        assert!(
            (ratio - 8.0).abs() < 0.2,
            "cube-law rate ratio {ratio} (near {} / far {})",
            est_near.rate,
            est_far.rate
        );
        let coupling_ratio = est_near.max_coupling / est_far.max_coupling;
        assert!((coupling_ratio - 8.0).abs() < 1e-9);
    }
}
