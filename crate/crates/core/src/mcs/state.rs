//! Field state containers for the two-leaflet surface solver.

use ndarray::Array2;

use crate::geometry::{CylinderLattice, Leaflet};

/// In-plane fields and sources of one leaflet.
///
/// `e_x`, `e_phi` and the sources live on lattice nodes `(i, j)`,
/// `i in 0..length_cells` (axial), `j in 0..circumference_cells` (angular,
/// periodic). `b_r` lives on cell centers `(i+1/2, j+1/2)`, stored at index
/// `(i, j)`; under conductor caps the last center row is unused and kept
/// zero.
#[derive(Clone, Debug)]
pub struct LeafletState {
    pub e_x: Array2<f64>,
    pub e_phi: Array2<f64>,
    pub b_r: Array2<f64>,
    pub rho: Array2<f64>,
    pub j_x: Array2<f64>,
    pub j_phi: Array2<f64>,
}

impl LeafletState {
    pub fn zeros(nx: usize, nc: usize) -> Self {
        LeafletState {
            e_x: Array2::zeros((nx, nc)),
            e_phi: Array2::zeros((nx, nc)),
            b_r: Array2::zeros((nx, nc)),
            rho: Array2::zeros((nx, nc)),
            j_x: Array2::zeros((nx, nc)),
            j_phi: Array2::zeros((nx, nc)),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        let d = self.e_x.dim();
        (d.0, d.1)
    }

    /// Standing wave `E_x = amp * cos(2 pi mode j / nc)`, uniform along the
    /// axis. Divergence-free on the discrete lattice, so it is
    /// constraint-satisfying initial data with zero charge density.
    pub fn set_angular_wave_e_x(&mut self, mode: usize, amp: f64) {
        let (_, nc) = self.shape();
        let k = std::f64::consts::TAU * mode as f64 / nc as f64;
        for ((_, j), v) in self.e_x.indexed_iter_mut() {
            *v = amp * (k * j as f64).cos();
        }
    }

    /// Spatially uniform `E_x`; the zero-wavevector mode used for gap runs.
    pub fn set_uniform_e_x(&mut self, amp: f64) {
        self.e_x.fill(amp);
    }

    pub fn mean_e_x(&self) -> f64 {
        self.e_x.mean().unwrap_or(0.0)
    }

    pub fn max_abs_field(&self) -> f64 {
        let m = |a: &Array2<f64>| a.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        m(&self.e_x).max(m(&self.e_phi)).max(m(&self.b_r))
    }
}

/// Transverse-sector bookkeeping for one puncture: the deviation of the
/// through-membrane electric flux from its resting value, the transverse
/// magnetic flux powered by the chiral coupling, the last discharge current
/// record, and the running count of transferred winding quanta.
#[derive(Clone, Copy, Debug, Default)]
pub struct PunctureSector {
    pub e_flux_dev: f64,
    pub b_flux: f64,
    pub last_pulse_charge: f64,
    pub transferred: i64,
}

/// Full electromagnetic state: both leaflets plus one transverse sector per
/// puncture.
#[derive(Clone, Debug)]
pub struct EmState {
    pub outer: LeafletState,
    pub inner: LeafletState,
    pub punctures: Vec<PunctureSector>,
    pub time: f64,
    pub steps: u64,
}

impl EmState {
    pub fn new(lattice: &CylinderLattice) -> Self {
        let nx = lattice.length_cells();
        let nc = lattice.circumference_cells();
        EmState {
            outer: LeafletState::zeros(nx, nc),
            inner: LeafletState::zeros(nx, nc),
            punctures: vec![PunctureSector::default(); lattice.punctures().len()],
            time: 0.0,
            steps: 0,
        }
    }

    pub fn leaflet(&self, which: Leaflet) -> &LeafletState {
        match which {
            Leaflet::Outer => &self.outer,
            Leaflet::Inner => &self.inner,
        }
    }

    pub fn leaflet_mut(&mut self, which: Leaflet) -> &mut LeafletState {
        match which {
            Leaflet::Outer => &mut self.outer,
            Leaflet::Inner => &mut self.inner,
        }
    }

    pub fn max_abs_field(&self) -> f64 {
        self.outer.max_abs_field().max(self.inner.max_abs_field())
    }
}
