//! Puncture flux transfer.
//!
//! Injecting a radial current pulse through a puncture drives the transverse
//! sector of that puncture, modeled by the minimal linear closure consistent
//! with the chiral mixing of the tangential dynamics. Writing `x` for the
//! electric flux deviation through the puncture disk and `y` for the
//! magnetic flux:
//!
//! ```text
//! dx/dt = -j(t) - b0 y        (flux balance: -dx/dt - j = b0 y)
//! dy/dt =  b0 x               (rim circulation closure)
//! ```
//!
//! The transferable quantity is the accumulated right-hand side of the flux
//! balance, `z(T) = b0 * integral of y dt`. One winding quantum is the value
//! of `z` produced by the reference pulse (unit charge, unit duration,
//! half-sine profile) at `b0 = 1`, computed once by a fine-step calibration
//! run; a discharge reports `round(z / quantum)`. The count is linear in the
//! pulse charge, so flipping the pulse sign flips the reported transfer, and
//! it vanishes identically at `b0 = 0`.

use std::sync::OnceLock;

use super::state::EmState;
use super::FieldError;

/// Minimum integration steps a pulse must span.
pub const MIN_PULSE_SAMPLES: usize = 10;

/// Half-sine radial current pulse `j(t) = amplitude * sin(pi t / duration)`
/// on `[0, duration]`.
#[derive(Clone, Copy, Debug)]
pub struct Pulse {
    amplitude: f64,
    duration: f64,
}

impl Pulse {
    /// Pulse with the given total charge `Q = integral of j dt`.
    pub fn half_sine(charge: f64, duration: f64) -> Pulse {
        assert!(duration > 0.0, "pulse duration must be positive");
        Pulse {
            amplitude: charge * std::f64::consts::FRAC_PI_2 / duration,
            duration,
        }
    }

    /// The reference pulse: unit charge over unit duration.
    pub fn reference() -> Pulse {
        Pulse::half_sine(1.0, 1.0)
    }

    pub fn charge(&self) -> f64 {
        self.amplitude * 2.0 * self.duration / std::f64::consts::PI
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    fn at(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= self.duration {
            0.0
        } else {
            self.amplitude * (std::f64::consts::PI * t / self.duration).sin()
        }
    }
}

/// Result of one discharge event.
#[derive(Clone, Copy, Debug)]
pub struct DischargeOutcome {
    /// Integer winding transfer, to be applied to the topological register.
    pub winding_delta: i64,
    /// Accumulated flux-balance right-hand side over the pulse.
    pub accumulated: f64,
    /// The calibration quantum the accumulation was divided by.
    pub quantum: f64,
}

/// Integrates the transverse system over one pulse with midpoint steps of
/// width at most `dt`. Returns the accumulated transfer `z`.
fn integrate_pulse(pulse: &Pulse, b0: f64, dt: f64, x0: f64, y0: f64) -> (f64, f64, f64) {
    let n = (pulse.duration / dt).ceil() as usize;
    let h = pulse.duration / n as f64;
    let (mut x, mut y, mut z) = (x0, y0, 0.0);
    for k in 0..n {
        let t = k as f64 * h;
        // midpoint rule
        let j0 = pulse.at(t);
        let xm = x + 0.5 * h * (-j0 - b0 * y);
        let ym = y + 0.5 * h * (b0 * x);
        let jm = pulse.at(t + 0.5 * h);
        x += h * (-jm - b0 * ym);
        y += h * (b0 * xm);
        z += h * (b0 * ym);
    }
    (x, y, z)
}

/// One winding quantum: transfer produced by [`Pulse::reference`] at
/// `b0 = 1` from a resting sector, integrated at fine resolution.
pub fn holonomy_quantum() -> f64 {
    static QUANTUM: OnceLock<f64> = OnceLock::new();
    *QUANTUM.get_or_init(|| {
        let (_, _, z) = integrate_pulse(&Pulse::reference(), 1.0, 1e-4, 0.0, 0.0);
        z
    })
}

/// Fires `pulse` through puncture `puncture` of `state` and reports the
/// integer winding transfer. The puncture's transverse sector is updated in
/// place; the caller applies `winding_delta` to its topological register.
pub fn puncture_discharge(
    state: &mut EmState,
    puncture: usize,
    pulse: &Pulse,
    b0: f64,
    dt: f64,
) -> Result<DischargeOutcome, FieldError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(FieldError::BadDt { dt });
    }
    let count = state.punctures.len();
    let sector = state
        .punctures
        .get_mut(puncture)
        .ok_or(FieldError::UnknownPuncture {
            id: puncture,
            count,
        })?;
    let samples = (pulse.duration / dt).ceil() as usize;
    if samples < MIN_PULSE_SAMPLES {
        return Err(FieldError::PulseUnderResolved {
            samples,
            required: MIN_PULSE_SAMPLES,
        });
    }
    let (x, y, z) = integrate_pulse(pulse, b0, dt, sector.e_flux_dev, sector.b_flux);
    let quantum = holonomy_quantum();
    let winding_delta = (z / quantum).round() as i64;
    sector.e_flux_dev = x;
    sector.b_flux = y;
    sector.last_pulse_charge = pulse.charge();
    sector.transferred += winding_delta;
    Ok(DischargeOutcome {
        winding_delta,
        accumulated: z,
        quantum,
    })
}
