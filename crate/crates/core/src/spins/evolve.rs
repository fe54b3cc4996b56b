//! State vectors and the midpoint Taylor propagator.
//!
//! Index convention matches `Operator`: spin 0 is the most significant bit,
//! bit 0 is up. Time stepping samples H at interval midpoints; each step
//! applies exp(-i h H) summed to machine precision, so the only scheme error
//! is the midpoint sampling of time-dependent coefficients (second order).

use ndarray::Array2;
use num_complex::Complex64;

use super::hamiltonian::build_hamiltonian;
use super::{GateSchedule, SpinError, SpinSystem};

const TAYLOR_MAX_TERMS: usize = 40;
const TAYLOR_TOL: f64 = 1e-16;
/// Per-step bound on h * ||H|| keeping the Taylor sum short and stable.
const STEP_PRODUCT_LIMIT: f64 = 0.1;
const NORM_DRIFT_LIMIT: f64 = 1e-10;

pub const UP: [Complex64; 2] = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
pub const DOWN: [Complex64; 2] = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
pub const PLUS: [Complex64; 2] = [
    Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
    Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
];

#[derive(Clone, Debug)]
pub struct QuantumState {
    n_spins: usize,
    amps: Vec<Complex64>,
}

impl QuantumState {
    /// Computational basis state from per-site bits (0 = up).
    pub fn basis(n_spins: usize, bits: &[u8]) -> Self {
        assert_eq!(bits.len(), n_spins);
        let mut index = 0usize;
        for &b in bits {
            index = (index << 1) | usize::from(b != 0);
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_spins];
        amps[index] = Complex64::new(1.0, 0.0);
        QuantumState { n_spins, amps }
    }

    /// Tensor product of single-spin states, normalized.
    pub fn from_product(spinors: &[[Complex64; 2]]) -> Self {
        let n_spins = spinors.len();
        assert!(n_spins > 0);
        let dim = 1 << n_spins;
        let mut amps = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut a = Complex64::new(1.0, 0.0);
            for (s, spinor) in spinors.iter().enumerate() {
                let bit = (i >> (n_spins - 1 - s)) & 1;
                a *= spinor[bit];
            }
            amps.push(a);
        }
        let mut state = QuantumState { n_spins, amps };
        state.normalize();
        state
    }

    /// Directly from amplitudes; length must be a power of two. Not normalized.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Self {
        assert!(amps.len().is_power_of_two() && amps.len() >= 2);
        let n_spins = amps.len().trailing_zeros() as usize;
        QuantumState { n_spins, amps }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        assert!(n > 0.0, "cannot normalize a zero state");
        for a in &mut self.amps {
            *a /= n;
        }
    }

    pub fn overlap(&self, other: &QuantumState) -> Complex64 {
        assert_eq!(self.dim(), other.dim());
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn fidelity(&self, other: &QuantumState) -> f64 {
        self.overlap(other).norm_sqr()
    }

    #[inline]
    fn mask(&self, site: usize) -> usize {
        assert!(site < self.n_spins);
        1 << (self.n_spins - 1 - site)
    }

    pub fn expect_z(&self, site: usize) -> f64 {
        let mask = self.mask(site);
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let mz = if i & mask == 0 { 0.5 } else { -0.5 };
                mz * a.norm_sqr()
            })
            .sum()
    }

    pub fn expect_x(&self, site: usize) -> f64 {
        let mask = self.mask(site);
        let sum: Complex64 = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| 0.5 * self.amps[i ^ mask].conj() * a)
            .sum();
        sum.re
    }

    /// exp(-i angle S_z) on one site. Exact diagonal rotation.
    pub fn apply_z_rotation(&mut self, site: usize, angle: f64) {
        let mask = self.mask(site);
        let up = Complex64::from_polar(1.0, -0.5 * angle);
        let down = Complex64::from_polar(1.0, 0.5 * angle);
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if i & mask == 0 { up } else { down };
        }
    }

    /// Off-diagonal element <0_site| tr_rest(rho) |1_site>.
    pub fn site_coherence(&self, site: usize) -> Complex64 {
        let mask = self.mask(site);
        let mut sum = Complex64::new(0.0, 0.0);
        for (i, a) in self.amps.iter().enumerate() {
            if i & mask == 0 {
                sum += a.conj() * self.amps[i | mask];
            }
        }
        sum
    }
}

/// Evolves under the schedule from t=0 to t=duration with steps no longer
/// than `dt`, invoking `on_step(step_index, t_end_of_step, state)` after each
/// step. Errors if a step would violate the h*||H|| <= 0.1 bound or if the
/// norm drifts.
pub fn evolve_with(
    state: &QuantumState,
    system: &SpinSystem,
    schedule: &GateSchedule,
    dt: f64,
    mut on_step: impl FnMut(usize, f64, &QuantumState),
) -> Result<QuantumState, SpinError> {
    if state.dim() != system.dim() {
        return Err(SpinError::DimensionMismatch {
            expected: system.dim(),
            got: state.dim(),
        });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SpinError::StepTooLarge {
            dt,
            product: f64::NAN,
        });
    }
    let norm0 = state.norm();
    if !norm0.is_finite() || norm0 == 0.0 {
        return Err(SpinError::NormDrift {
            norm: norm0,
            step: 0,
        });
    }
    let duration = schedule.duration();
    let mut psi = state.clone();
    if duration == 0.0 {
        return Ok(psi);
    }
    let n_steps = (duration / dt).ceil().max(1.0) as usize;
    let h = duration / n_steps as f64;

    let mut term = vec![Complex64::new(0.0, 0.0); psi.dim()];
    let mut scratch = vec![Complex64::new(0.0, 0.0); psi.dim()];
    for step in 0..n_steps {
        let t_mid = (step as f64 + 0.5) * h;
        let ham = build_hamiltonian(system, schedule, t_mid.min(duration))?;
        let product = h * ham.norm_bound();
        if product > STEP_PRODUCT_LIMIT {
            return Err(SpinError::StepTooLarge { dt: h, product });
        }
        // exp(-i h H) psi by Taylor: with h||H|| <= 0.1 the series reaches
        // machine precision in well under TAYLOR_MAX_TERMS terms.
        term.copy_from_slice(&psi.amps);
        let mut converged = false;
        for k in 1..=TAYLOR_MAX_TERMS {
            ham.apply(&term, &mut scratch);
            let factor = Complex64::new(0.0, -h / k as f64);
            for (t, s) in term.iter_mut().zip(&scratch) {
                *t = factor * s;
            }
            let mut tail = 0.0;
            for (p, t) in psi.amps.iter_mut().zip(&term) {
                *p += t;
                tail += t.norm_sqr();
            }
            if tail.sqrt() < TAYLOR_TOL {
                converged = true;
                break;
            }
        }
        debug_assert!(converged, "Taylor series did not converge");
        let norm = psi.norm();
        if !norm.is_finite() || (norm - norm0).abs() > NORM_DRIFT_LIMIT * norm0.max(1.0) {
            return Err(SpinError::NormDrift {
                norm,
                step: step + 1,
            });
        }
        on_step(step, (step as f64 + 1.0) * h, &psi);
    }
    Ok(psi)
}

pub fn evolve(
    state: &QuantumState,
    system: &SpinSystem,
    schedule: &GateSchedule,
    dt: f64,
) -> Result<QuantumState, SpinError> {
    evolve_with(state, system, schedule, dt, |_, _, _| {})
}

/// Dense exp(-i t H) by scaling and squaring. Reference propagator for
/// cross-checking the matrix-free path on small systems.
pub fn expm_dense(h: &Array2<Complex64>, t: f64) -> Array2<Complex64> {
    let dim = h.nrows();
    assert_eq!(dim, h.ncols());
    let a = h.mapv(|v| v * Complex64::new(0.0, -t));
    let norm1 = (0..dim)
        .map(|j| (0..dim).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let squarings = if norm1 > 0.5 {
        (norm1 / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let b = a.mapv(|v| v / 2.0_f64.powi(squarings as i32));

    let mut result = Array2::eye(dim);
    let mut term: Array2<Complex64> = Array2::eye(dim);
    for k in 1..=60 {
        term = term.dot(&b) / Complex64::new(k as f64, 0.0);
        result += &term;
        let tail: f64 = term.iter().map(|v| v.norm()).sum();
        if tail < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}
