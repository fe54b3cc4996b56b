//! Winding-state register for the gapped topological sector.
//!
//! Between punctures the cylinder carries annular segments; a basis state of
//! the low-energy sector is an integer winding number per segment. There is
//! no Hamiltonian inside the sector (degenerate vacua); the register is
//! exact bookkeeping: holonomy phases, winding shifts fed by puncture
//! discharges, the parity involution w -> -w, projection onto the
//! odd-total-winding channel, and a parity-invariant dephasing noise that
//! probes the protection claim.
//!
//! The noise draws one random phase per parity orbit {w, -w} and step, the
//! minimal diagonal model whose spectrum is parity-invariant. Amplitudes on
//! the two members of an orbit always pick up the same phase, so a qubit
//! encoded inside one orbit is exactly immune while superpositions across
//! orbits dephase.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::geometry::LoopPath;

/// Default per-segment winding cutoff.
pub const W_MAX_DEFAULT: i32 = 8;

#[derive(Debug, Error)]
pub enum TopoError {
    #[error("segment {segment} out of range for {count} segments")]
    SegmentOutOfRange { segment: usize, count: usize },
    #[error("winding {value} on segment {segment} would exceed cutoff |w| <= {w_max}")]
    WindingCutoff {
        segment: usize,
        value: i32,
        w_max: i32,
    },
    #[error("gauge sample has {samples} edge values for a loop of {edges} edges")]
    SampleLengthMismatch { edges: usize, samples: usize },
    #[error("winding vector has {got} segments, register expects {expected}")]
    SegmentCountMismatch { expected: usize, got: usize },
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("amplitude for {0:?} is not finite")]
    NonFiniteAmplitude(WindingVector),
}

/// Integer winding numbers, one per annular segment.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WindingVector(Vec<i32>);

impl WindingVector {
    pub fn new(w: Vec<i32>) -> WindingVector {
        WindingVector(w)
    }

    pub fn zero(n_segments: usize) -> WindingVector {
        WindingVector(vec![0; n_segments])
    }

    pub fn components(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> i64 {
        self.0.iter().map(|&w| w as i64).sum()
    }

    /// True when the total winding is odd.
    pub fn is_odd(&self) -> bool {
        self.total().rem_euclid(2) == 1
    }

    pub fn negated(&self) -> WindingVector {
        WindingVector(self.0.iter().map(|&w| -w).collect())
    }

    /// Canonical representative of the parity orbit {w, -w}: the
    /// lexicographically larger of the two.
    fn orbit_rep(&self) -> WindingVector {
        let neg = self.negated();
        if neg.0 > self.0 {
            neg
        } else {
            self.clone()
        }
    }
}

/// Normalized state over winding basis vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct TopoState {
    n_segments: usize,
    w_max: i32,
    amps: BTreeMap<WindingVector, Complex64>,
}

impl TopoState {
    /// Single basis vector.
    pub fn basis_state(w: WindingVector, w_max: i32) -> Result<TopoState, TopoError> {
        TopoState::superposition(vec![(w, Complex64::new(1.0, 0.0))], w_max)
    }

    /// Normalized superposition; duplicate vectors merge by amplitude sum.
    pub fn superposition(
        terms: Vec<(WindingVector, Complex64)>,
        w_max: i32,
    ) -> Result<TopoState, TopoError> {
        let n_segments = terms.first().map_or(0, |(w, _)| w.len());
        let mut amps: BTreeMap<WindingVector, Complex64> = BTreeMap::new();
        for (w, a) in terms {
            if w.len() != n_segments {
                return Err(TopoError::SegmentCountMismatch {
                    expected: n_segments,
                    got: w.len(),
                });
            }
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(TopoError::NonFiniteAmplitude(w));
            }
            for (seg, &wi) in w.components().iter().enumerate() {
                if wi.abs() > w_max {
                    return Err(TopoError::WindingCutoff {
                        segment: seg,
                        value: wi,
                        w_max,
                    });
                }
            }
            *amps.entry(w).or_insert(Complex64::new(0.0, 0.0)) += a;
        }
        amps.retain(|_, a| a.norm_sqr() > 0.0);
        let norm = amps.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(TopoError::ZeroNorm);
        }
        for a in amps.values_mut() {
            *a /= norm;
        }
        Ok(TopoState {
            n_segments,
            w_max,
            amps,
        })
    }

    pub fn n_segments(&self) -> usize {
        self.n_segments
    }

    pub fn w_max(&self) -> i32 {
        self.w_max
    }

    pub fn support_size(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitude(&self, w: &WindingVector) -> Complex64 {
        self.amps
            .get(w)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn norm(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn support(&self) -> impl Iterator<Item = (&WindingVector, &Complex64)> {
        self.amps.iter()
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &TopoState) -> Result<Complex64, TopoError> {
        if self.n_segments != other.n_segments {
            return Err(TopoError::SegmentCountMismatch {
                expected: self.n_segments,
                got: other.n_segments,
            });
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for (w, a) in &self.amps {
            sum += a.conj() * other.amplitude(w);
        }
        Ok(sum)
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &TopoState) -> Result<f64, TopoError> {
        Ok(self.overlap(other)?.norm_sqr())
    }

    /// Coherence term `conj(amp_a) * amp_b` of the pure-state density matrix.
    pub fn coherence(&self, a: &WindingVector, b: &WindingVector) -> Complex64 {
        self.amplitude(a).conj() * self.amplitude(b)
    }

    /// Shifts the winding of one segment by `delta` on every basis vector of
    /// the support. Pure relabeling, exactly unitary.
    pub fn apply_winding(&self, segment: usize, delta: i32) -> Result<TopoState, TopoError> {
        if segment >= self.n_segments {
            return Err(TopoError::SegmentOutOfRange {
                segment,
                count: self.n_segments,
            });
        }
        for w in self.amps.keys() {
            let shifted = w.components()[segment] + delta;
            if shifted.abs() > self.w_max {
                return Err(TopoError::WindingCutoff {
                    segment,
                    value: shifted,
                    w_max: self.w_max,
                });
            }
        }
        let mut amps = BTreeMap::new();
        for (w, a) in &self.amps {
            let mut v = w.components().to_vec();
            v[segment] += delta;
            amps.insert(WindingVector::new(v), *a);
        }
        Ok(TopoState {
            n_segments: self.n_segments,
            w_max: self.w_max,
            amps,
        })
    }

    /// The involution w -> -w.
    pub fn parity(&self) -> TopoState {
        let amps = self.amps.iter().map(|(w, a)| (w.negated(), *a)).collect();
        TopoState {
            n_segments: self.n_segments,
            w_max: self.w_max,
            amps,
        }
    }

    /// Keeps basis vectors with odd total winding. Returns the renormalized
    /// projection (None when the odd component is empty) and the
    /// pre-normalization weight `|P psi|^2`.
    pub fn project_odd_channel(&self) -> (Option<TopoState>, f64) {
        let kept: BTreeMap<WindingVector, Complex64> = self
            .amps
            .iter()
            .filter(|(w, _)| w.is_odd())
            .map(|(w, a)| (w.clone(), *a))
            .collect();
        let weight: f64 = kept.values().map(|a| a.norm_sqr()).sum();
        if weight == 0.0 {
            return (None, 0.0);
        }
        let norm = weight.sqrt();
        let amps = kept.into_iter().map(|(w, a)| (w, a / norm)).collect();
        (
            Some(TopoState {
                n_segments: self.n_segments,
                w_max: self.w_max,
                amps,
            }),
            weight,
        )
    }

    /// Applies `steps` rounds of diagonal dephasing with one fresh
    /// `N(0, strength^2)` phase per parity orbit {w, -w} and round. Phases
    /// are even functions of w by construction, so parity commutes with
    /// every realization. Deterministic for a given seed.
    pub fn parity_even_noise(&self, strength: f64, steps: u64, seed: u64) -> TopoState {
        assert!(strength >= 0.0, "noise strength must be nonnegative");
        if strength == 0.0 || steps == 0 {
            return self.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, strength).expect("finite strength");
        let orbits: BTreeSet<WindingVector> = self.amps.keys().map(|w| w.orbit_rep()).collect();
        let mut state = self.clone();
        for _ in 0..steps {
            let phases: BTreeMap<&WindingVector, f64> = orbits
                .iter()
                .map(|rep| (rep, normal.sample(&mut rng)))
                .collect();
            for (w, a) in state.amps.iter_mut() {
                let theta = phases[&w.orbit_rep()];
                *a *= Complex64::from_polar(1.0, theta);
            }
        }
        state
    }
}

/// Tangential gauge potential integrated along each edge of a loop, in
/// traversal order.
#[derive(Clone, Debug)]
pub struct GaugeFieldSample {
    pub edge_values: Vec<f64>,
}

/// Holonomy `exp(i sum of edge values)` around a closed loop. Closure is
/// guaranteed by [`LoopPath`] construction; the sample must provide one
/// value per edge. The result is built as a pure phase, so its modulus is 1
/// to roundoff.
pub fn holonomy(path: &LoopPath, sample: &GaugeFieldSample) -> Result<Complex64, TopoError> {
    let edges = path.vertices().len();
    if sample.edge_values.len() != edges {
        return Err(TopoError::SampleLengthMismatch {
            edges,
            samples: sample.edge_values.len(),
        });
    }
    let total: f64 = sample.edge_values.iter().sum();
    Ok(Complex64::from_polar(1.0, total))
}
