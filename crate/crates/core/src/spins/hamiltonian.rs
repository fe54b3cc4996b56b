//! Term-list Hamiltonians applied matrix-free.
//!
//! Basis convention: spin 0 is the most significant bit of the state index;
//! bit value 0 is m = +1/2 (up). A Hamiltonian is a list of one- and
//! two-site terms; `apply` runs in O(dim * terms) without materializing a
//! matrix, and `to_dense` exists as a reference path for small systems.

use ndarray::Array2;
use num_complex::Complex64;

use super::{DipolarForm, GateSchedule, SpinError, SpinSystem};

#[derive(Clone, Copy, Debug)]
enum Term {
    /// coeff * S_z on one site.
    SiteZ { site: usize, coeff: f64 },
    /// coeff * S_a . S_b (isotropic: hyperfine contact and exchange).
    Heisenberg { a: usize, b: usize, coeff: f64 },
    /// coeff * (S_a^z S_b^z - (S_a^+ S_b^- + S_a^- S_b^+) / 4): the secular
    /// dipolar form, Ising part minus flip-flop.
    SecularDipolar { a: usize, b: usize, coeff: f64 },
    /// coeff * (S_a . n)(S_b . n) for a unit axis n: the anisotropic part of
    /// the full dipolar tensor.
    AxisPair {
        a: usize,
        b: usize,
        axis: [f64; 3],
        coeff: f64,
    },
}

/// 2x2 matrix of S . n in the single-site basis (row-major, |up>, |down>).
#[inline]
fn spin_along(axis: [f64; 3]) -> [[Complex64; 2]; 2] {
    let [nx, ny, nz] = axis;
    [
        [
            Complex64::new(0.5 * nz, 0.0),
            Complex64::new(0.5 * nx, -0.5 * ny),
        ],
        [
            Complex64::new(0.5 * nx, 0.5 * ny),
            Complex64::new(-0.5 * nz, 0.0),
        ],
    ]
}

/// Hermitian operator on an n-spin register.
#[derive(Clone, Debug)]
pub struct Operator {
    n_spins: usize,
    terms: Vec<Term>,
}

impl Operator {
    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        1 << self.n_spins
    }

    #[inline]
    fn mask(&self, site: usize) -> usize {
        1 << (self.n_spins - 1 - site)
    }

    /// `out = H psi`. Both slices must have length `dim`.
    pub fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(psi.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        out.fill(Complex64::new(0.0, 0.0));
        for term in &self.terms {
            match *term {
                Term::SiteZ { site, coeff } => {
                    let mask = self.mask(site);
                    for (i, &v) in psi.iter().enumerate() {
                        let mz = if i & mask == 0 { 0.5 } else { -0.5 };
                        out[i] += coeff * mz * v;
                    }
                }
                Term::Heisenberg { a, b, coeff } => {
                    let (ma, mb) = (self.mask(a), self.mask(b));
                    let both = ma | mb;
                    for (i, &v) in psi.iter().enumerate() {
                        if (i & ma == 0) == (i & mb == 0) {
                            out[i] += 0.25 * coeff * v;
                        } else {
                            out[i] -= 0.25 * coeff * v;
                            out[i ^ both] += 0.5 * coeff * v;
                        }
                    }
                }
                Term::SecularDipolar { a, b, coeff } => {
                    let (ma, mb) = (self.mask(a), self.mask(b));
                    let both = ma | mb;
                    for (i, &v) in psi.iter().enumerate() {
                        if (i & ma == 0) == (i & mb == 0) {
                            out[i] += 0.25 * coeff * v;
                        } else {
                            out[i] -= 0.25 * coeff * v;
                            out[i ^ both] -= 0.25 * coeff * v;
                        }
                    }
                }
                Term::AxisPair { a, b, axis, coeff } => {
                    let m = spin_along(axis);
                    let (ma, mb) = (self.mask(a), self.mask(b));
                    for (i, &v) in psi.iter().enumerate() {
                        let (ba, bb) = ((i & ma != 0) as usize, (i & mb != 0) as usize);
                        // Column ba of m splits into the m-conserving entry
                        // and the flip entry; same for site b. The four
                        // products cover the full two-site action.
                        let (da, fa) = (m[ba][ba], m[1 - ba][ba]);
                        let (db, fb) = (m[bb][bb], m[1 - bb][bb]);
                        out[i] += coeff * da * db * v;
                        out[i ^ ma] += coeff * fa * db * v;
                        out[i ^ mb] += coeff * da * fb * v;
                        out[i ^ ma ^ mb] += coeff * fa * fb * v;
                    }
                }
            }
        }
    }

    pub fn apply_alloc(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.apply(psi, &mut out);
        out
    }

    /// Upper bound on the operator norm: sum of exact per-term norms.
    pub fn norm_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| match *t {
                Term::SiteZ { coeff, .. } => 0.5 * coeff.abs(),
                Term::Heisenberg { coeff, .. } => 0.75 * coeff.abs(),
                Term::SecularDipolar { coeff, .. } => 0.5 * coeff.abs(),
                Term::AxisPair { axis, coeff, .. } => {
                    let n2 = axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2];
                    0.25 * n2 * coeff.abs()
                }
            })
            .sum()
    }

    /// Dense matrix, column by column. Reference path; capped at 10 spins.
    pub fn to_dense(&self) -> Array2<Complex64> {
        assert!(self.n_spins <= 10, "dense path is for small systems");
        let dim = self.dim();
        let mut m = Array2::zeros((dim, dim));
        let mut basis = vec![Complex64::new(0.0, 0.0); dim];
        let mut col = vec![Complex64::new(0.0, 0.0); dim];
        for j in 0..dim {
            basis[j] = Complex64::new(1.0, 0.0);
            self.apply(&basis, &mut col);
            for i in 0..dim {
                m[(i, j)] = col[i];
            }
            basis[j] = Complex64::new(0.0, 0.0);
        }
        m
    }

    /// Largest Hermiticity violation of the dense form.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = self.to_dense();
        let dim = m.nrows();
        let mut worst = 0.0_f64;
        for i in 0..dim {
            for j in 0..dim {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

/// Assembles H(t): Zeeman terms, waveform-modulated hyperfine and exchange
/// couplings, and position-derived dipolar couplings for all pairs. The
/// dipolar form follows the system setting: secular zz-minus-flip-flop, or
/// the full tensor `c (S_a . S_b - 3 (S_a . n)(S_b . n))` with `n` the pair
/// axis and `c` the radial coefficient.
pub fn build_hamiltonian(
    system: &SpinSystem,
    schedule: &GateSchedule,
    t: f64,
) -> Result<Operator, SpinError> {
    if !(0.0..=schedule.duration()).contains(&t) {
        return Err(SpinError::TimeOutsideSchedule {
            t,
            duration: schedule.duration(),
        });
    }
    let n = system.n_spins();
    let mut terms = Vec::new();
    for site in 0..n {
        let coeff = system.zeeman_coefficient(site);
        if coeff != 0.0 {
            terms.push(Term::SiteZ { site, coeff });
        }
    }
    for (idx, p) in system.hyperfine().iter().enumerate() {
        let coeff = p.amplitude * schedule.a_multiplier(idx, t);
        if coeff != 0.0 {
            terms.push(Term::Heisenberg {
                a: p.a,
                b: p.b,
                coeff,
            });
        }
    }
    for (idx, p) in system.exchange().iter().enumerate() {
        let coeff = p.amplitude * schedule.j_multiplier(idx, t);
        if coeff != 0.0 {
            terms.push(Term::Heisenberg {
                a: p.a,
                b: p.b,
                coeff,
            });
        }
    }
    if system.dipolar_prefactor() != 0.0 {
        for a in 0..n {
            for b in a + 1..n {
                let coeff = system.dipolar_between(a, b)?;
                if coeff == 0.0 {
                    continue;
                }
                match system.dipolar_form() {
                    DipolarForm::Secular => terms.push(Term::SecularDipolar { a, b, coeff }),
                    DipolarForm::Full => {
                        let axis = system.separation_axis(a, b)?;
                        terms.push(Term::Heisenberg { a, b, coeff });
                        terms.push(Term::AxisPair {
                            a,
                            b,
                            axis,
                            coeff: -3.0 * coeff,
                        });
                    }
                }
            }
        }
    }
    Ok(Operator { n_spins: n, terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Leaflet;
    use crate::spins::{DipolarForm, PairCoupling, SpinSite, Waveform};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn assert_eigenvector(h: &Operator, psi: &[Complex64], eigenvalue: f64) {
        let out = h.apply_alloc(psi);
        for (o, p) in out.iter().zip(psi) {
            assert!(
                (o - eigenvalue * p).norm() < 1e-14,
                "H psi != {eigenvalue} psi"
            );
        }
    }

    #[test]
    fn zero_system_is_zero_operator() {
        let sys = SpinSystem::nucleus_electron_pair(0.0, 0.0);
        let h = build_hamiltonian(&sys, &GateSchedule::constant(1.0), 0.5).unwrap();
        let psi = vec![c(0.5); 4];
        assert!(h.apply_alloc(&psi).iter().all(|v| v.norm() == 0.0));
        assert_eq!(h.norm_bound(), 0.0);
    }

    #[test]
    fn hyperfine_eigenstructure() {
        // A * I.S on two spins: triplet at A/4 (x3), singlet at -3A/4
        let a = 0.7;
        let sys = SpinSystem::nucleus_electron_pair(a, 0.0);
        let h = build_hamiltonian(&sys, &GateSchedule::constant(1.0), 0.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // basis order: |uu>, |ud>, |du>, |dd> (spin 0 most significant)
        assert_eigenvector(&h, &[c(1.0), c(0.0), c(0.0), c(0.0)], a / 4.0);
        assert_eigenvector(&h, &[c(0.0), c(s), c(s), c(0.0)], a / 4.0);
        assert_eigenvector(&h, &[c(0.0), c(0.0), c(0.0), c(1.0)], a / 4.0);
        assert_eigenvector(&h, &[c(0.0), c(s), c(-s), c(0.0)], -3.0 * a / 4.0);
    }

    #[test]
    fn exchange_singlet_triplet_gap() {
        let j = 1.3;
        let sys = SpinSystem::electron_pair(j, 0.0);
        let h = build_hamiltonian(&sys, &GateSchedule::constant(1.0), 0.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let e_triplet = j / 4.0;
        let e_singlet = -3.0 * j / 4.0;
        assert_eigenvector(&h, &[c(1.0), c(0.0), c(0.0), c(0.0)], e_triplet);
        assert_eigenvector(&h, &[c(0.0), c(s), c(-s), c(0.0)], e_singlet);
        assert!((e_triplet - e_singlet - j).abs() < 1e-15);
    }

    #[test]
    fn zeeman_diagonal() {
        let sys = SpinSystem::nucleus_electron_pair(0.0, 2.0);
        let h = build_hamiltonian(&sys, &GateSchedule::constant(1.0), 0.0).unwrap();
        // |ud>: nuclear up (+1/2 * 2), electron down (-1/2 * -2000)
        let psi = [c(0.0), c(1.0), c(0.0), c(0.0)];
        let out = h.apply_alloc(&psi);
        assert!((out[1] - c(0.5 * 2.0 + 0.5 * 2000.0)).norm() < 1e-12);
    }

    #[test]
    fn dipolar_terms_from_positions() {
        let sites = vec![
            SpinSite::nuclear([0.0, 0.0, 0.0], Leaflet::Outer),
            SpinSite::nuclear([10.0, 0.0, 0.0], Leaflet::Outer),
        ];
        let sys = SpinSystem::new(sites, 1.0, 1.0, 0.0, vec![], vec![], 2000.0).unwrap();
        assert_eq!(sys.dipolar_between(0, 1).unwrap(), 2.0);
        assert_eq!(sys.dipolar_between(1, 0).unwrap(), 2.0);
        let h = build_hamiltonian(&sys, &GateSchedule::constant(1.0), 0.0).unwrap();
        // |uu> is an eigenstate of the secular form at +D/4
        assert_eigenvector(&h, &[c(1.0), c(0.0), c(0.0), c(0.0)], 0.5);
        // flip-flop couples |ud> and |du> with coefficient -D/4
        let out = h.apply_alloc(&[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!((out[2] - c(-0.5)).norm() < 1e-15);
    }

    #[test]
    fn full_dipolar_eigenstructure() {
        // Pair along z with radial coefficient c = p / r^3 = 2:
        // H = c (S.S - 3 SzSz) sends |uu> and |dd> to -c/2 and the m = 0
        // triplet to +c. The singlet is dark: it is a rotational scalar and
        // the tensor is traceless rank two.
        let sites = vec![
            SpinSite::nuclear([0.0, 0.0, 0.0], Leaflet::Outer),
            SpinSite::nuclear([0.0, 0.0, 2.0], Leaflet::Outer),
        ];
        let sys = SpinSystem::new(sites, 1.0, 1.0, 0.0, vec![], vec![], 16.0).unwrap();
        assert_eq!(sys.dipolar_form(), DipolarForm::Secular);
        let sys = sys.with_dipolar_form(DipolarForm::Full);
        let h = build_hamiltonian(&sys, &GateSchedule::constant(1.0), 0.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eigenvector(&h, &[c(1.0), c(0.0), c(0.0), c(0.0)], -1.0);
        assert_eigenvector(&h, &[c(0.0), c(0.0), c(0.0), c(1.0)], -1.0);
        assert_eigenvector(&h, &[c(0.0), c(s), c(s), c(0.0)], 2.0);
        assert_eigenvector(&h, &[c(0.0), c(s), c(-s), c(0.0)], 0.0);
    }

    #[test]
    fn full_dipolar_axis_and_hermiticity() {
        // Same coefficient but the pair along x: the stretched state along
        // the axis, |++>, sits at -c/2 and the singlet stays dark.
        let sites = vec![
            SpinSite::nuclear([0.0, 0.0, 0.0], Leaflet::Outer),
            SpinSite::nuclear([2.0, 0.0, 0.0], Leaflet::Outer),
        ];
        let sys = SpinSystem::new(sites, 1.0, 1.0, 0.0, vec![], vec![], 16.0)
            .unwrap()
            .with_dipolar_form(DipolarForm::Full);
        let h = build_hamiltonian(&sys, &GateSchedule::constant(1.0), 0.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eigenvector(&h, &[c(0.5), c(0.5), c(0.5), c(0.5)], -1.0);
        assert_eigenvector(&h, &[c(0.0), c(s), c(-s), c(0.0)], 0.0);

        let sites = vec![
            SpinSite::nuclear([0.0, 0.0, 0.0], Leaflet::Outer),
            SpinSite::nuclear([1.0, 2.0, 2.0], Leaflet::Inner),
        ];
        let sys = SpinSystem::new(sites, 1.0, 1.0, 0.1, vec![], vec![], 5.0)
            .unwrap()
            .with_dipolar_form(DipolarForm::Full);
        let h = build_hamiltonian(&sys, &GateSchedule::constant(1.0), 0.0).unwrap();
        assert!(h.hermiticity_defect() < 1e-14);
    }

    #[test]
    fn hermitian_for_generic_system() {
        let sites = vec![
            SpinSite::nuclear([0.0, 0.0, 0.0], Leaflet::Outer),
            SpinSite::electron([0.0, 0.0, 1.0], Leaflet::Outer),
            SpinSite::electron([5.0, 0.0, 1.0], Leaflet::Inner),
        ];
        let sys = SpinSystem::new(
            sites,
            1.0,
            1.0e3,
            0.3,
            vec![PairCoupling {
                a: 0,
                b: 1,
                amplitude: 0.9,
            }],
            vec![PairCoupling {
                a: 1,
                b: 2,
                amplitude: 0.4,
            }],
            7.0,
        )
        .unwrap();
        let h = build_hamiltonian(&sys, &GateSchedule::constant(1.0), 0.0).unwrap();
        assert!(h.hermiticity_defect() < 1e-12);
        // norm bound dominates the operator on random-ish vectors
        let psi: Vec<Complex64> = (0..8)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.61).cos()))
            .collect();
        let norm_in: f64 = psi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let out = h.apply_alloc(&psi);
        let norm_out: f64 = out.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm_out <= h.norm_bound() * norm_in + 1e-12);
    }

    #[test]
    fn waveform_scales_coupling() {
        let sys = SpinSystem::nucleus_electron_pair(2.0, 0.0);
        let schedule = GateSchedule::constant(4.0)
            .with_a_waveform(0, Waveform::new(vec![0.0, 1.0], 4.0).unwrap());
        let psi = [c(0.0), c(1.0), c(0.0), c(0.0)];
        let h_mid = build_hamiltonian(&sys, &schedule, 2.0).unwrap();
        let h_end = build_hamiltonian(&sys, &schedule, 4.0).unwrap();
        let mid = h_mid.apply_alloc(&psi);
        let end = h_end.apply_alloc(&psi);
        // coupling at t=2 is half the coupling at t=4
        assert!((2.0 * mid[2] - end[2]).norm() < 1e-14);
        assert!(matches!(
            build_hamiltonian(&sys, &schedule, 5.0),
            Err(SpinError::TimeOutsideSchedule { .. })
        ));
    }
}
