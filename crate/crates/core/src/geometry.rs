//! Cylinder lattice geometry, punctures, loop classes and the chirality field.
//!
//! The membrane is a bilayer cylinder discretized into `length_cells` columns
//! along the axis (`x`) and `circumference_cells` rows around it (`phi`,
//! periodic). Both leaflets share the lattice. Punctures (ion channels) are
//! disk footprints removed from the surface; between them the cylinder falls
//! into annular segments, each carrying a representative circumferential
//! loop. Those loops, together with one loop encircling each puncture, are
//! the support on which holonomies and winding numbers are defined.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minimum lattice extent along the cylinder axis.
pub const MIN_LENGTH_CELLS: usize = 4;
/// Minimum lattice extent around the circumference.
pub const MIN_CIRCUMFERENCE_CELLS: usize = 4;
/// Clear columns required between a puncture footprint and a lattice end,
/// so end segments always carry a circumferential loop disjoint from the
/// puncture-encircling loops.
pub const END_MARGIN_CELLS: usize = 2;
/// Clear columns required between two puncture footprints, for the same
/// reason in the interior.
pub const MIN_SEGMENT_GAP_CELLS: usize = 3;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("lattice must be at least {min_length}x{min_circumference} cells, got {length}x{circumference}")]
    LatticeTooSmall {
        length: usize,
        circumference: usize,
        min_length: usize,
        min_circumference: usize,
    },
    #[error("cell_size must be positive and finite, got {0}")]
    BadCellSize(f64),
    #[error("puncture at x={x}, phi={phi} must have radius >= 1")]
    ZeroRadius { x: usize, phi: usize },
    #[error("puncture at x={x} with radius {radius} does not fit circumference {circumference} (need 2*radius+3 <= circumference)")]
    RadiusTooLarge {
        x: usize,
        radius: usize,
        circumference: usize,
    },
    #[error("puncture at x={x} with radius {radius} touches the longitudinal boundary (need {margin} clear columns at each end)")]
    TouchesBoundary {
        x: usize,
        radius: usize,
        margin: usize,
    },
    #[error("punctures {a} and {b} have overlapping footprints")]
    OverlappingPunctures { a: usize, b: usize },
    #[error("punctures {a} and {b} share the axial center x={x}; distinct x-centers are required so segments are totally ordered")]
    SameAxialCenter { a: usize, b: usize, x: usize },
    #[error(
        "punctures {a} and {b} leave only {gap} clear columns between footprints (need {required})"
    )]
    PuncturesTooClose {
        a: usize,
        b: usize,
        gap: usize,
        required: usize,
    },
    #[error("hbar must be positive, got {0}")]
    NonPositiveHbar(f64),
}

/// Which side of the bilayer a field or a molecule lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Leaflet {
    Outer,
    Inner,
}

impl Leaflet {
    pub const BOTH: [Leaflet; 2] = [Leaflet::Outer, Leaflet::Inner];
}

/// An ion-channel puncture: a disk footprint centered on a lattice cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Puncture {
    pub x: usize,
    pub phi: usize,
    pub radius: usize,
}

impl Puncture {
    fn x_min(&self) -> usize {
        self.x - self.radius
    }

    fn x_max(&self) -> usize {
        self.x + self.radius
    }

    /// Cells of the disk footprint; `phi` wraps.
    fn footprint(&self, circumference: usize) -> Vec<(usize, usize)> {
        let r = self.radius as i64;
        let mut cells = Vec::new();
        for dx in -r..=r {
            for dphi in -r..=r {
                if dx * dx + dphi * dphi <= r * r {
                    let x = (self.x as i64 + dx) as usize;
                    let phi = wrap(self.phi as i64 + dphi, circumference);
                    cells.push((x, phi));
                }
            }
        }
        cells
    }
}

fn wrap(v: i64, n: usize) -> usize {
    v.rem_euclid(n as i64) as usize
}

/// Classification of a single surface cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellKind {
    Bulk,
    /// Footprint of the puncture with the given id.
    Puncture(usize),
}

/// A maximal run of puncture-free columns; loops and winding numbers are
/// indexed by these.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Segment {
    pub id: usize,
    pub x_first: usize,
    pub x_last: usize,
}

impl Segment {
    /// Column at which the representative circumferential loop is placed.
    pub fn representative_x(&self) -> usize {
        (self.x_first + self.x_last) / 2
    }
}

#[derive(Clone, Debug, Serialize)]
pub enum LoopKind {
    /// Circumferential loop around segment `segment`.
    Alpha { segment: usize },
    /// Loop encircling puncture `puncture`.
    Beta { puncture: usize },
}

/// A closed path of unit lattice steps, `phi` periodic.
#[derive(Clone, Debug, Serialize)]
pub struct LoopPath {
    pub kind: LoopKind,
    vertices: Vec<(usize, usize)>,
    closed: bool,
}

impl LoopPath {
    /// Builds a path and records whether every consecutive pair (and the
    /// closing pair) is a unit lattice step.
    pub fn new(kind: LoopKind, vertices: Vec<(usize, usize)>, circumference: usize) -> Self {
        let closed = vertices.len() >= 3
            && vertices
                .iter()
                .zip(vertices.iter().cycle().skip(1))
                .take(vertices.len())
                .all(|(a, b)| is_unit_step(*a, *b, circumference));
        LoopPath {
            kind,
            vertices,
            closed,
        }
    }

    pub fn vertices(&self) -> &[(usize, usize)] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Number of edges; equals the vertex count for a closed path.
    pub fn edge_count(&self) -> usize {
        if self.closed {
            self.vertices.len()
        } else {
            self.vertices.len().saturating_sub(1)
        }
    }
}

fn is_unit_step(a: (usize, usize), b: (usize, usize), circumference: usize) -> bool {
    let dx = (a.0 as i64 - b.0 as i64).abs();
    let dphi_raw = (a.1 as i64 - b.1 as i64).abs();
    let dphi = dphi_raw.min(circumference as i64 - dphi_raw);
    dx + dphi == 1
}

/// The loop families returned by [`CylinderLattice::segment_loops`].
#[derive(Clone, Debug, Serialize)]
pub struct LoopSet {
    /// One circumferential loop per annular segment, ordered by segment id.
    pub alpha: Vec<LoopPath>,
    /// One encircling loop per puncture, ordered by puncture id.
    pub beta: Vec<LoopPath>,
}

/// The discretized punctured cylinder shared by both leaflets.
#[derive(Clone, Debug)]
pub struct CylinderLattice {
    length_cells: usize,
    circumference_cells: usize,
    cell_size: f64,
    punctures: Vec<Puncture>,
    segments: Vec<Segment>,
    cell_map: Vec<Option<u16>>,
}

/// Validates and assembles the lattice.
///
/// Punctures are sorted by axial center; their index in the sorted order is
/// their id. Footprints must be pairwise disjoint, sit at distinct x-centers,
/// keep [`END_MARGIN_CELLS`] clear columns from each end and
/// [`MIN_SEGMENT_GAP_CELLS`] between each other.
pub fn build_lattice(
    length_cells: usize,
    circumference_cells: usize,
    cell_size: f64,
    punctures: Vec<Puncture>,
) -> Result<CylinderLattice, GeometryError> {
    if length_cells < MIN_LENGTH_CELLS || circumference_cells < MIN_CIRCUMFERENCE_CELLS {
        return Err(GeometryError::LatticeTooSmall {
            length: length_cells,
            circumference: circumference_cells,
            min_length: MIN_LENGTH_CELLS,
            min_circumference: MIN_CIRCUMFERENCE_CELLS,
        });
    }
    if !(cell_size > 0.0 && cell_size.is_finite()) {
        return Err(GeometryError::BadCellSize(cell_size));
    }

    let mut punctures = punctures;
    punctures.sort_by_key(|p| (p.x, p.phi));

    for p in &punctures {
        if p.radius == 0 {
            return Err(GeometryError::ZeroRadius { x: p.x, phi: p.phi });
        }
        if 2 * p.radius + 3 > circumference_cells {
            return Err(GeometryError::RadiusTooLarge {
                x: p.x,
                radius: p.radius,
                circumference: circumference_cells,
            });
        }
        let fits_low = p.x >= p.radius + END_MARGIN_CELLS;
        let fits_high = p.x + p.radius + END_MARGIN_CELLS < length_cells;
        if !fits_low || !fits_high {
            return Err(GeometryError::TouchesBoundary {
                x: p.x,
                radius: p.radius,
                margin: END_MARGIN_CELLS,
            });
        }
    }

    let mut cell_map: Vec<Option<u16>> = vec![None; length_cells * circumference_cells];
    for (id, p) in punctures.iter().enumerate() {
        for (x, phi) in p.footprint(circumference_cells) {
            let idx = x * circumference_cells + phi;
            if let Some(other) = cell_map[idx] {
                return Err(GeometryError::OverlappingPunctures {
                    a: other as usize,
                    b: id,
                });
            }
            cell_map[idx] = Some(id as u16);
        }
    }

    for (id, pair) in punctures.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        if a.x == b.x {
            return Err(GeometryError::SameAxialCenter {
                a: id,
                b: id + 1,
                x: a.x,
            });
        }
        let gap = b.x_min().saturating_sub(a.x_max() + 1);
        if gap < MIN_SEGMENT_GAP_CELLS {
            return Err(GeometryError::PuncturesTooClose {
                a: id,
                b: id + 1,
                gap,
                required: MIN_SEGMENT_GAP_CELLS,
            });
        }
    }

    // Segment k is the free range before puncture k; the last segment runs to
    // the end of the lattice. The margin rules above keep every range nonempty.
    let mut segments = Vec::with_capacity(punctures.len() + 1);
    let mut cursor = 0;
    for p in &punctures {
        segments.push(Segment {
            id: segments.len(),
            x_first: cursor,
            x_last: p.x_min() - 1,
        });
        cursor = p.x_max() + 1;
    }
    segments.push(Segment {
        id: segments.len(),
        x_first: cursor,
        x_last: length_cells - 1,
    });

    Ok(CylinderLattice {
        length_cells,
        circumference_cells,
        cell_size,
        punctures,
        segments,
        cell_map,
    })
}

impl CylinderLattice {
    pub fn length_cells(&self) -> usize {
        self.length_cells
    }

    pub fn circumference_cells(&self) -> usize {
        self.circumference_cells
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    /// Punctures sorted by axial center; index = puncture id.
    pub fn punctures(&self) -> &[Puncture] {
        &self.punctures
    }

    /// Annular segments in axial order; always `punctures().len() + 1` of them.
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn cells_per_leaflet(&self) -> usize {
        self.length_cells * self.circumference_cells
    }

    pub fn cell_kind(&self, x: usize, phi: usize) -> CellKind {
        match self.cell_map[x * self.circumference_cells + phi] {
            Some(id) => CellKind::Puncture(id as usize),
            None => CellKind::Bulk,
        }
    }

    pub fn bulk_cells_per_leaflet(&self) -> usize {
        self.cell_map.iter().filter(|c| c.is_none()).count()
    }

    pub fn puncture_cells_per_leaflet(&self) -> usize {
        self.cells_per_leaflet() - self.bulk_cells_per_leaflet()
    }

    /// Neighbor in the angular direction; wraps around the circumference.
    pub fn angular_neighbor(&self, phi: usize, step: i64) -> usize {
        wrap(phi as i64 + step, self.circumference_cells)
    }

    /// Representative loops: one circumferential loop per segment and one
    /// encircling loop per puncture. Loops are pairwise disjoint and closed.
    pub fn segment_loops(&self) -> LoopSet {
        let c = self.circumference_cells;
        let alpha = self
            .segments
            .iter()
            .map(|seg| {
                let x = seg.representative_x();
                let vertices = (0..c).map(|phi| (x, phi)).collect();
                LoopPath::new(LoopKind::Alpha { segment: seg.id }, vertices, c)
            })
            .collect();

        let beta = self
            .punctures
            .iter()
            .enumerate()
            .map(|(id, p)| {
                let s = (p.radius + 1) as i64;
                let cx = p.x as i64;
                let cphi = p.phi as i64;
                let mut vertices = Vec::with_capacity(8 * s as usize);
                for t in 0..2 * s {
                    vertices.push(((cx - s + t) as usize, wrap(cphi - s, c)));
                }
                for t in 0..2 * s {
                    vertices.push(((cx + s) as usize, wrap(cphi - s + t, c)));
                }
                for t in 0..2 * s {
                    vertices.push(((cx + s - t) as usize, wrap(cphi + s, c)));
                }
                for t in 0..2 * s {
                    vertices.push(((cx - s) as usize, wrap(cphi + s - t, c)));
                }
                LoopPath::new(LoopKind::Beta { puncture: id }, vertices, c)
            })
            .collect();

        LoopSet { alpha, beta }
    }

    pub fn summary(&self) -> GeometrySummary {
        let loops = self.segment_loops();
        GeometrySummary {
            length_cells: self.length_cells,
            circumference_cells: self.circumference_cells,
            cell_size: self.cell_size,
            leaflets: 2,
            bulk_cells_per_leaflet: self.bulk_cells_per_leaflet(),
            puncture_cells_per_leaflet: self.puncture_cells_per_leaflet(),
            punctures: self.punctures.clone(),
            segments: self.segments.clone(),
            alpha_loops: loops.alpha.len(),
            beta_loops: loops.beta.len(),
        }
    }
}

/// Machine-readable geometry description for run manifests.
#[derive(Clone, Debug, Serialize)]
pub struct GeometrySummary {
    pub length_cells: usize,
    pub circumference_cells: usize,
    pub cell_size: f64,
    pub leaflets: usize,
    pub bulk_cells_per_leaflet: usize,
    pub puncture_cells_per_leaflet: usize,
    pub punctures: Vec<Puncture>,
    pub segments: Vec<Segment>,
    pub alpha_loops: usize,
    pub beta_loops: usize,
}

/// Chiral coupling of the membrane: the timelike component `b0` set by the
/// chemical-potential difference between leaflets, and the radial component
/// whose sign flips between leaflets because their molecular tails point in
/// opposite directions.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ChiralityField {
    pub b0: f64,
    pub b_r_outer: f64,
    pub b_r_inner: f64,
    pub delta_mu: f64,
    pub e2: f64,
    pub hbar: f64,
    /// Distance over which a helical lipid tail winds once; sets the naive
    /// gap scale `1 / winding_pitch_l`.
    pub winding_pitch_l: f64,
}

/// `b0 = e^2 * delta_mu / (4 * hbar)`.
pub fn b0_from_delta_mu(delta_mu: f64, e2: f64, hbar: f64) -> Result<f64, GeometryError> {
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(GeometryError::NonPositiveHbar(hbar));
    }
    Ok(e2 * delta_mu / (4.0 * hbar))
}

impl ChiralityField {
    /// Standard construction: `b0` from the chemical-potential difference,
    /// and the inner leaflet's radial component opposite to the outer one.
    pub fn new(
        delta_mu: f64,
        e2: f64,
        hbar: f64,
        b_r_outer: f64,
        winding_pitch_l: f64,
    ) -> Result<Self, GeometryError> {
        let b0 = b0_from_delta_mu(delta_mu, e2, hbar)?;
        Ok(ChiralityField {
            b0,
            b_r_outer,
            b_r_inner: -b_r_outer,
            delta_mu,
            e2,
            hbar,
            winding_pitch_l,
        })
    }

    pub fn b_r(&self, leaflet: Leaflet) -> f64 {
        match leaflet {
            Leaflet::Outer => self.b_r_outer,
            Leaflet::Inner => self.b_r_inner,
        }
    }

    /// Planar Chern-Simons coefficient of one leaflet's surface theory.
    ///
    /// The radial chirality integrated over the (unit) leaflet thickness,
    /// with the surface orientation folded in: `mu = -b_r`. With this sign
    /// the in-plane update `dE/dt = eps grad B - e^2 J - mu eps E` and the
    /// constraint `div E - e^2 rho + b_r B_r = const` hold simultaneously.
    pub fn surface_mu(&self, leaflet: Leaflet) -> f64 {
        -self.b_r(leaflet)
    }

    /// Naive spectral-gap scale `1 / winding_pitch_l`.
    pub fn gap_estimate(&self) -> f64 {
        1.0 / self.winding_pitch_l
    }
}
