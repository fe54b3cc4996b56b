//! Mode frequencies of the linearized surface theory.
//!
//! For a chirality four-vector with time component `b0` and surface-normal
//! component folded into the planar coefficient `mu`, a plane wave with
//! in-plane wavenumber `k` obeys
//!
//! ```text
//! (omega^2 - k^2)^2 - mu^2 (omega^2 - k^2) - b0^2 k^2 = 0
//! ```
//!
//! giving two polarization branches
//!
//! ```text
//! omega_pm^2 = k^2 + (mu^2 ± sqrt(mu^4 + 4 b0^2 k^2)) / 2
//! ```
//!
//! The plus branch is gapped at `|mu|`; the minus branch is gapless and goes
//! unstable (negative `omega^2`) when `k^2 + mu^2 < b0^2`, the known hazard
//! of a dominant time component. The time-domain stepper evolves only the
//! `b0 = 0` surface dynamics, where the minus branch is the vacuum light
//! cone and nothing is unstable.

/// Frequencies of the two polarization branches at one wavenumber.
#[derive(Clone, Copy, Debug)]
pub struct DispersionResult {
    pub k: f64,
    pub mu: f64,
    pub b0: f64,
    /// Gapped-branch frequency.
    pub omega_plus: f64,
    /// Lower-branch frequency, `sqrt(max(omega_minus_sq, 0))`.
    pub omega_minus: f64,
    /// Lower-branch frequency squared; negative in the unstable regime.
    pub omega_minus_sq: f64,
    /// Gapped-branch frequency at `k = 0`, equal to `|mu|`.
    pub gap: f64,
    /// True when the lower branch has `omega^2 < 0` at this `k`.
    pub unstable: bool,
}

/// Evaluates both branches at wavenumber `k`.
pub fn dispersion(k: f64, mu: f64, b0: f64) -> DispersionResult {
    let k2 = k * k;
    let mu2 = mu * mu;
    let s = (mu2 * mu2 + 4.0 * b0 * b0 * k2).sqrt();
    let omega_plus_sq = k2 + 0.5 * (mu2 + s);
    let omega_minus_sq = k2 + 0.5 * (mu2 - s);
    DispersionResult {
        k,
        mu,
        b0,
        omega_plus: omega_plus_sq.sqrt(),
        omega_minus: omega_minus_sq.max(0.0).sqrt(),
        omega_minus_sq,
        gap: mu.abs(),
        unstable: omega_minus_sq < 0.0,
    }
}

/// Characteristic polynomial whose positive roots are the branch
/// frequencies. Zero (to roundoff) at `omega_plus` and `omega_minus`.
pub fn characteristic(omega: f64, k: f64, mu: f64, b0: f64) -> f64 {
    let u = omega * omega - k * k;
    u * u - mu * mu * u - b0 * b0 * k * k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_lattice, ChiralityField};
    use crate::mcs::solver::{Solver, XBoundary};
    use crate::mcs::state::EmState;
    use crate::signal::fit_frequency;

    #[test]
    fn vacuum_light_cone() {
        let d = dispersion(1.0, 0.0, 0.0);
        assert_eq!(d.omega_plus, 1.0);
        assert_eq!(d.omega_minus, 1.0);
        assert_eq!(d.gap, 0.0);
        assert!(!d.unstable);
    }

    #[test]
    fn gap_equals_planar_coefficient() {
        let d = dispersion(0.0, 0.3, 0.0);
        assert!((d.omega_plus - 0.3).abs() < 1e-15);
        assert_eq!(d.gap, 0.3);
        assert_eq!(d.omega_minus, 0.0);
        // sign of mu is immaterial
        let dn = dispersion(0.7, -0.3, 0.2);
        let dp = dispersion(0.7, 0.3, 0.2);
        assert_eq!(dn.omega_plus, dp.omega_plus);
        assert_eq!(dn.gap, dp.gap);
    }

    #[test]
    fn pythagorean_point() {
        let d = dispersion(3.0, 4.0, 0.0);
        assert!((d.omega_plus - 5.0).abs() < 1e-12);
        assert!((d.omega_minus - 3.0).abs() < 1e-12);
    }

    #[test]
    fn branches_are_characteristic_roots() {
        let cases = [
            (0.7, 0.5, 0.3),
            (2.0, 0.01, 0.0),
            (0.3, 1.5, 1.0),
            (5.0, 0.0, 2.0),
            (1.0, 1.0, 1.0),
        ];
        for (k, mu, b0) in cases {
            let d = dispersion(k, mu, b0);
            let scale = (k * k + mu * mu + b0 * b0).powi(2).max(1.0);
            assert!(
                characteristic(d.omega_plus, k, mu, b0).abs() / scale < 1e-12,
                "plus branch not a root at k={k}, mu={mu}, b0={b0}"
            );
            if !d.unstable {
                assert!(
                    characteristic(d.omega_minus, k, mu, b0).abs() / scale < 1e-12,
                    "minus branch not a root at k={k}, mu={mu}, b0={b0}"
                );
            }
        }
    }

    #[test]
    fn closed_form_matches_root_scan() {
        let (k, mu, b0) = (0.7, 0.5, 0.3);
        let d = dispersion(k, mu, b0);
        // bracket sign changes of the characteristic polynomial over omega
        let n = 200_000;
        let omega_max = 3.0;
        let mut roots = Vec::new();
        let mut prev = characteristic(0.0, k, mu, b0);
        for i in 1..=n {
            let omega = omega_max * i as f64 / n as f64;
            let cur = characteristic(omega, k, mu, b0);
            if prev < 0.0 && cur >= 0.0 || prev >= 0.0 && cur < 0.0 {
                // bisect
                let (mut lo, mut hi) = (omega - omega_max / n as f64, omega);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if (characteristic(mid, k, mu, b0) < 0.0) == (prev < 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            prev = cur;
        }
        assert_eq!(roots.len(), 2, "roots {roots:?}");
        assert!((roots[0] - d.omega_minus).abs() < 1e-9);
        assert!((roots[1] - d.omega_plus).abs() < 1e-9);
    }

    #[test]
    fn timelike_instability_window() {
        // pure b0: omega_minus^2 = k^2 - b0 k, unstable below k = b0
        let d = dispersion(0.5, 0.0, 1.0);
        assert!(d.unstable);
        assert!((d.omega_minus_sq - (0.25 - 0.5)).abs() < 1e-12);
        assert_eq!(d.omega_minus, 0.0);
        let d = dispersion(2.0, 0.0, 1.0);
        assert!(!d.unstable);
        assert!((d.omega_minus_sq - 2.0).abs() < 1e-12);
        // a planar coefficient at least as large as b0 cures every k
        for i in 0..100 {
            let k = 0.05 * i as f64;
            assert!(!dispersion(k, 1.0, 1.0).unstable, "unstable at k={k}");
            assert!(!dispersion(k, 1.2, 1.0).unstable);
        }
        // and the threshold is exactly k^2 + mu^2 = b0^2
        assert!(dispersion(0.6, 0.79, 1.0).unstable);
        assert!(!dispersion(0.6, 0.81, 1.0).unstable);
    }

    #[test]
    fn time_domain_run_matches_gapped_branch() {
        let lat = build_lattice(8, 64, 1.0, vec![]).unwrap();
        let ch = ChiralityField::new(0.0, 1.0, 1.0, -0.2, 10.0).unwrap();
        let dt = 0.5 * Solver::stability_bound(1.0);
        let solver = Solver::new(&lat, &ch, XBoundary::PeriodicX, dt).unwrap();
        let mut state = EmState::new(&lat);
        state.outer.set_angular_wave_e_x(2, 1.0);
        let k = 2.0 * std::f64::consts::TAU / 64.0;
        let expected = dispersion(k, 0.2, 0.0).omega_plus;
        let steps = (6.0 * std::f64::consts::TAU / expected / dt).ceil() as usize;
        let mut probe = Vec::with_capacity(steps);
        for _ in 0..steps {
            probe.push(state.outer.e_x[(4, 3)]);
            solver.step(&mut state).unwrap();
        }
        let fit = fit_frequency(&probe, dt).unwrap();
        assert!(
            (fit.omega - expected).abs() / expected < 0.01,
            "measured {}, dispersion {}",
            fit.omega,
            expected
        );
    }
}
