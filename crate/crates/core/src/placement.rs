//! Annealed Monte Carlo placement of polar lipids over charged gate wires.
//!
//! The fabrication story: heat a lipid monolayer above its transition
//! temperature so molecules diffuse, bias the polar species toward charged
//! nanowires beneath the membrane plane, then quench to freeze them in
//! place. The model is deliberately minimal: hard disks in a periodic box,
//! point dipoles coupling to regularized line-charge fields, and a mobility
//! gate that drops to zero below the transition temperature instead of an
//! emergent phase change.
//!
//! Units are nanometers for lengths; temperatures and energies share one
//! simulation scale.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Image boxes included on each side when summing wire fields.
const WIRE_IMAGES: i64 = 3;
/// Attempts per molecule when drawing a non-overlapping start.
const PLACEMENT_RETRIES_PER_MOLECULE: usize = 1000;

#[derive(Debug, Error)]
pub enum PlacementError {
    #[error("{field} must be positive and finite, got {value}")]
    BadDomain { field: &'static str, value: f64 },
    #[error("temperature {field} must be finite and non-negative, got {value}")]
    BadTemperature { field: &'static str, value: f64 },
    #[error("schedule must run T_hot > T_c > T_cold >= 0, got hot {t_hot}, critical {t_c}, cold {t_cold}")]
    TemperatureOrder { t_hot: f64, t_c: f64, t_cold: f64 },
    #[error("disk area {occupied:.3} exceeds packing budget {budget:.3} for box {box_size}")]
    PackingTooDense {
        occupied: f64,
        budget: f64,
        box_size: f64,
    },
    #[error("wire {index} lies outside the box")]
    WireOutsideBox { index: usize },
    #[error("wire {index} must have positive length")]
    BadWireLength { index: usize },
    #[error("could not draw a non-overlapping initial placement in {attempts} attempts")]
    InitialPlacementFailed { attempts: usize },
}

/// What a wire is for. Capture quality is scored against `A` wires only;
/// `J` wires shape the field but carry no target sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WireRole {
    A,
    J,
}

/// Axis-aligned charged wire segment at a fixed standoff below the plane.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GateWire {
    /// Segment start corner.
    pub start: [f64; 2],
    /// Extent along the axis.
    pub length: f64,
    pub horizontal: bool,
    /// Linear charge density (sim units).
    pub charge_density: f64,
    pub role: WireRole,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    /// Polar molecule carrying the dipole.
    Pc,
    /// Non-polar crowder: hard disk only.
    Background,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Molecule {
    pub position: [f64; 2],
    /// In-plane dipole direction; meaningless for background molecules.
    pub orientation: f64,
    pub species: Species,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementConfig {
    /// Periodic square box edge (nm).
    pub box_size: f64,
    pub n_pc: usize,
    pub n_background: usize,
    pub dipole_moment: f64,
    pub wires: Vec<GateWire>,
    /// Wires sit this far below the membrane plane; it regularizes the
    /// line field so nothing diverges on the wire axis.
    pub standoff: f64,
    pub t_hot: f64,
    pub t_c: f64,
    pub t_cold: f64,
    pub steps_hot: usize,
    pub quench_steps: usize,
    pub steps_cold: usize,
    pub capture_radius: f64,
    pub disk_radius: f64,
    pub translate_scale: f64,
    pub rotate_scale: f64,
    pub dd_strength: f64,
    #[serde(default)]
    pub seed: u64,
}

impl PlacementConfig {
    /// Documented desk-scale defaults: these come from a parameter scan and
    /// are tuned so the annealed capture fraction clears 0.9.
    pub fn desk_default(seed: u64) -> PlacementConfig {
        let wire = |y: f64, role, charge_density| GateWire {
            start: [0.0, y],
            length: 20.0,
            horizontal: true,
            charge_density,
            role,
        };
        PlacementConfig {
            box_size: 20.0,
            n_pc: 70,
            n_background: 40,
            dipole_moment: 1.0,
            wires: vec![
                wire(6.0, WireRole::A, 3.5),
                wire(14.0, WireRole::A, 3.5),
                wire(10.0, WireRole::J, 0.8),
            ],
            standoff: 0.7,
            t_hot: 1.5,
            t_c: 0.3,
            t_cold: 0.05,
            steps_hot: 400,
            quench_steps: 500,
            steps_cold: 100,
            capture_radius: 1.4,
            disk_radius: 0.45,
            translate_scale: 0.9,
            rotate_scale: 0.8,
            dd_strength: 0.15,
            seed,
        }
    }

    /// Geometry and budget checks; every annealable config must pass. The
    /// hot/critical/cold ordering is checked separately so that frozen
    /// baselines (hot below critical) stay runnable.
    pub fn validate(&self) -> Result<(), PlacementError> {
        let positive: [(&'static str, f64); 6] = [
            ("box_size", self.box_size),
            ("dipole_moment", self.dipole_moment),
            ("standoff", self.standoff),
            ("capture_radius", self.capture_radius),
            ("translate_scale", self.translate_scale),
            ("rotate_scale", self.rotate_scale),
        ];
        for (field, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(PlacementError::BadDomain { field, value });
            }
        }
        if !(self.disk_radius >= 0.0 && self.disk_radius.is_finite()) {
            return Err(PlacementError::BadDomain {
                field: "disk_radius",
                value: self.disk_radius,
            });
        }
        if !(self.dd_strength.is_finite()) {
            return Err(PlacementError::BadDomain {
                field: "dd_strength",
                value: self.dd_strength,
            });
        }
        for (field, value) in [
            ("t_hot", self.t_hot),
            ("t_c", self.t_c),
            ("t_cold", self.t_cold),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(PlacementError::BadTemperature { field, value });
            }
        }
        // disks must fit with room to shuffle: half the close-packing bound
        let n = (self.n_pc + self.n_background) as f64;
        let occupied = n * std::f64::consts::PI * self.disk_radius * self.disk_radius;
        let budget = 0.45 * self.box_size * self.box_size;
        if occupied > budget {
            return Err(PlacementError::PackingTooDense {
                occupied,
                budget,
                box_size: self.box_size,
            });
        }
        for (index, w) in self.wires.iter().enumerate() {
            if !(w.length > 0.0 && w.length.is_finite()) {
                return Err(PlacementError::BadWireLength { index });
            }
            let along = if w.horizontal { w.start[0] } else { w.start[1] };
            let across = if w.horizontal { w.start[1] } else { w.start[0] };
            if !(0.0..self.box_size).contains(&across)
                || !(0.0..self.box_size).contains(&along)
                || along + w.length > self.box_size + 1e-9
            {
                return Err(PlacementError::WireOutsideBox { index });
            }
        }
        Ok(())
    }

    /// The annealing-schedule invariant: hot above critical above cold.
    pub fn validate_schedule_order(&self) -> Result<(), PlacementError> {
        if self.t_hot > self.t_c && self.t_c > self.t_cold && self.t_cold >= 0.0 {
            Ok(())
        } else {
            Err(PlacementError::TemperatureOrder {
                t_hot: self.t_hot,
                t_c: self.t_c,
                t_cold: self.t_cold,
            })
        }
    }

    fn total_sweeps(&self) -> usize {
        self.steps_hot + self.quench_steps + self.steps_cold
    }

    /// Temperature at a given sweep: flat, linear quench, flat.
    pub fn temperature_at(&self, sweep: usize) -> f64 {
        if sweep < self.steps_hot {
            self.t_hot
        } else if sweep < self.steps_hot + self.quench_steps {
            let frac = (sweep - self.steps_hot + 1) as f64 / self.quench_steps as f64;
            self.t_hot + frac * (self.t_cold - self.t_hot)
        } else {
            self.t_cold
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PlacementResult {
    pub molecules: Vec<Molecule>,
    pub capture_fraction: f64,
    /// Accepted / attempted moves per sweep.
    pub acceptance_trace: Vec<f64>,
    /// Total interaction energy per sweep.
    pub energy_trace: Vec<f64>,
    /// Mean per-molecule displacement accumulated after the quench ended.
    pub post_quench_displacement: f64,
}

fn wrap(x: f64, box_size: f64) -> f64 {
    let w = x.rem_euclid(box_size);
    if w == box_size {
        0.0
    } else {
        w
    }
}

fn min_image(d: f64, box_size: f64) -> f64 {
    let mut d = d;
    if d > 0.5 * box_size {
        d -= box_size;
    } else if d < -0.5 * box_size {
        d += box_size;
    }
    d
}

fn periodic_dist_sq(a: [f64; 2], b: [f64; 2], box_size: f64) -> f64 {
    let dx = min_image(a[0] - b[0], box_size);
    let dy = min_image(a[1] - b[1], box_size);
    dx * dx + dy * dy
}

/// In-plane field of one wire at a point. The wire is an infinite line a
/// distance `standoff` below the plane; the in-plane component at signed
/// perpendicular offset d is 2 lambda d / (d^2 + h^2), summed over periodic
/// images out to `WIRE_IMAGES` boxes.
fn wire_field(wire: &GateWire, point: [f64; 2], box_size: f64, standoff: f64) -> [f64; 2] {
    let perp = if wire.horizontal {
        point[1] - wire.start[1]
    } else {
        point[0] - wire.start[0]
    };
    let h2 = standoff * standoff;
    let mut e = 0.0;
    for k in -WIRE_IMAGES..=WIRE_IMAGES {
        let d = perp + k as f64 * box_size;
        e += 2.0 * wire.charge_density * d / (d * d + h2);
    }
    if wire.horizontal {
        [0.0, e]
    } else {
        [e, 0.0]
    }
}

fn dipole_vector(m: &Molecule, moment: f64) -> [f64; 2] {
    [moment * m.orientation.cos(), moment * m.orientation.sin()]
}

/// -p . E over all wires; zero for background species.
fn wire_energy(m: &Molecule, cfg: &PlacementConfig) -> f64 {
    if m.species != Species::Pc {
        return 0.0;
    }
    let p = dipole_vector(m, cfg.dipole_moment);
    let mut u = 0.0;
    for w in &cfg.wires {
        let e = wire_field(w, m.position, cfg.box_size, cfg.standoff);
        u -= p[0] * e[0] + p[1] * e[1];
    }
    u
}

/// Point-dipole pair energy with minimum-image separation:
/// s * (p_i . p_j - 3 (p_i . r)(p_j . r) / r^2) / r^3.
fn dipole_pair_energy(a: &Molecule, b: &Molecule, cfg: &PlacementConfig) -> f64 {
    if a.species != Species::Pc || b.species != Species::Pc || cfg.dd_strength == 0.0 {
        return 0.0;
    }
    let dx = min_image(a.position[0] - b.position[0], cfg.box_size);
    let dy = min_image(a.position[1] - b.position[1], cfg.box_size);
    let r2 = dx * dx + dy * dy;
    if r2 == 0.0 {
        return 0.0;
    }
    let r = r2.sqrt();
    let pa = dipole_vector(a, cfg.dipole_moment);
    let pb = dipole_vector(b, cfg.dipole_moment);
    let dot = pa[0] * pb[0] + pa[1] * pb[1];
    let ar = (pa[0] * dx + pa[1] * dy) / r;
    let br = (pb[0] * dx + pb[1] * dy) / r;
    cfg.dd_strength * (dot - 3.0 * ar * br) / (r2 * r)
}

fn interaction_energy(index: usize, molecules: &[Molecule], cfg: &PlacementConfig) -> f64 {
    let m = &molecules[index];
    let mut u = wire_energy(m, cfg);
    for (j, other) in molecules.iter().enumerate() {
        if j != index {
            u += dipole_pair_energy(m, other, cfg);
        }
    }
    u
}

fn total_energy(molecules: &[Molecule], cfg: &PlacementConfig) -> f64 {
    let mut u = 0.0;
    for (i, m) in molecules.iter().enumerate() {
        u += wire_energy(m, cfg);
        for other in molecules.iter().skip(i + 1) {
            u += dipole_pair_energy(m, other, cfg);
        }
    }
    u
}

fn overlaps_any(
    index: usize,
    candidate: [f64; 2],
    molecules: &[Molecule],
    cfg: &PlacementConfig,
) -> bool {
    let min_sep = 2.0 * cfg.disk_radius;
    if min_sep == 0.0 {
        return false;
    }
    let min_sq = min_sep * min_sep;
    molecules
        .iter()
        .enumerate()
        .any(|(j, m)| j != index && periodic_dist_sq(candidate, m.position, cfg.box_size) < min_sq)
}

fn draw_initial(
    cfg: &PlacementConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Molecule>, PlacementError> {
    let total = cfg.n_pc + cfg.n_background;
    let mut molecules: Vec<Molecule> = Vec::with_capacity(total);
    let budget = total.max(1) * PLACEMENT_RETRIES_PER_MOLECULE;
    let mut attempts = 0;
    while molecules.len() < total {
        attempts += 1;
        if attempts > budget {
            return Err(PlacementError::InitialPlacementFailed { attempts: budget });
        }
        let candidate = [
            rng.gen::<f64>() * cfg.box_size,
            rng.gen::<f64>() * cfg.box_size,
        ];
        let placed = molecules.len();
        molecules.push(Molecule {
            position: candidate,
            orientation: rng.gen::<f64>() * std::f64::consts::TAU,
            species: if placed < cfg.n_pc {
                Species::Pc
            } else {
                Species::Background
            },
        });
        if overlaps_any(placed, candidate, &molecules, cfg) {
            molecules.pop();
        }
    }
    Ok(molecules)
}

/// Runs the anneal: Metropolis sweeps over all molecules with translation
/// moves (plus orientation moves for polar species), temperature following
/// the hot/quench/cold schedule, and zero mobility strictly below `t_c`.
/// Deterministic for a given config.
pub fn anneal(cfg: &PlacementConfig) -> Result<PlacementResult, PlacementError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut molecules = draw_initial(cfg, &mut rng)?;
    let sweeps = cfg.total_sweeps();
    let mut acceptance_trace = Vec::with_capacity(sweeps);
    let mut energy_trace = Vec::with_capacity(sweeps);
    let quench_end = cfg.steps_hot + cfg.quench_steps;
    let mut post_quench_reference: Option<Vec<[f64; 2]>> = None;
    let mut post_quench_displacement = 0.0;

    for sweep in 0..sweeps {
        let temperature = cfg.temperature_at(sweep);
        let mobile = temperature >= cfg.t_c || cfg.t_c == 0.0;
        let mut attempted = 0u64;
        let mut accepted = 0u64;
        if mobile {
            for index in 0..molecules.len() {
                // translation
                attempted += 1;
                let old = molecules[index];
                let dx: f64 = rng.sample(StandardNormal);
                let dy: f64 = rng.sample(StandardNormal);
                let candidate = [
                    wrap(old.position[0] + cfg.translate_scale * dx, cfg.box_size),
                    wrap(old.position[1] + cfg.translate_scale * dy, cfg.box_size),
                ];
                if !overlaps_any(index, candidate, &molecules, cfg) {
                    let before = interaction_energy(index, &molecules, cfg);
                    molecules[index].position = candidate;
                    let after = interaction_energy(index, &molecules, cfg);
                    if metropolis_accept(after - before, temperature, &mut rng) {
                        accepted += 1;
                    } else {
                        molecules[index] = old;
                    }
                }
                // orientation, polar species only
                if molecules[index].species == Species::Pc {
                    attempted += 1;
                    let old = molecules[index];
                    let dtheta: f64 = rng.sample(StandardNormal);
                    let before = interaction_energy(index, &molecules, cfg);
                    molecules[index].orientation = (old.orientation + cfg.rotate_scale * dtheta)
                        .rem_euclid(std::f64::consts::TAU);
                    let after = interaction_energy(index, &molecules, cfg);
                    if metropolis_accept(after - before, temperature, &mut rng) {
                        accepted += 1;
                    } else {
                        molecules[index] = old;
                    }
                }
            }
        } else {
            // frozen: every move is gated off, but the schedule still runs
            attempted = molecules.len() as u64;
        }
        if sweep >= quench_end {
            match &post_quench_reference {
                None => {
                    post_quench_reference = Some(molecules.iter().map(|m| m.position).collect());
                }
                Some(reference) => {
                    post_quench_displacement = molecules
                        .iter()
                        .zip(reference)
                        .map(|(m, r)| periodic_dist_sq(m.position, *r, cfg.box_size).sqrt())
                        .sum::<f64>()
                        / molecules.len().max(1) as f64;
                }
            }
        }
        acceptance_trace.push(if attempted == 0 {
            0.0
        } else {
            accepted as f64 / attempted as f64
        });
        energy_trace.push(total_energy(&molecules, cfg));
    }

    let capture = capture_fraction(cfg.box_size, &molecules, &cfg.wires, cfg.capture_radius);
    Ok(PlacementResult {
        molecules,
        capture_fraction: capture,
        acceptance_trace,
        energy_trace,
        post_quench_displacement,
    })
}

fn metropolis_accept(delta: f64, temperature: f64, rng: &mut ChaCha8Rng) -> bool {
    if delta <= 0.0 {
        return true;
    }
    if temperature <= 0.0 {
        return false;
    }
    rng.gen::<f64>() < (-delta / temperature).exp()
}

/// Evenly spaced target sites along a capture wire, spaced at two capture
/// radii so sites do not share molecules.
pub fn capture_sites(wire: &GateWire, capture_radius: f64) -> Vec<[f64; 2]> {
    let n_sites = ((wire.length / (2.0 * capture_radius)).floor() as usize).max(1);
    let spacing = wire.length / n_sites as f64;
    (0..n_sites)
        .map(|i| {
            let along = (i as f64 + 0.5) * spacing;
            if wire.horizontal {
                [wire.start[0] + along, wire.start[1]]
            } else {
                [wire.start[0], wire.start[1] + along]
            }
        })
        .collect()
}

/// Fraction of target sites on capture (`A`) wires holding at least one
/// polar molecule within `capture_radius`. Returns 1.0 when there are no
/// capture sites to miss.
pub fn capture_fraction(
    box_size: f64,
    molecules: &[Molecule],
    wires: &[GateWire],
    capture_radius: f64,
) -> f64 {
    let r_sq = capture_radius * capture_radius;
    let mut sites = 0usize;
    let mut occupied = 0usize;
    for wire in wires.iter().filter(|w| w.role == WireRole::A) {
        for site in capture_sites(wire, capture_radius) {
            sites += 1;
            let hit = molecules.iter().any(|m| {
                m.species == Species::Pc && periodic_dist_sq(m.position, site, box_size) <= r_sq
            });
            if hit {
                occupied += 1;
            }
        }
    }
    if sites == 0 {
        1.0
    } else {
        occupied as f64 / sites as f64
    }
}

/// Chance that a uniformly placed set of `n_pc` molecules covers one site:
/// 1 - (1 - a)^n with a the capture-disk area fraction. The analytic
/// baseline for zero-charge runs.
pub fn uniform_capture_probability(n_pc: usize, box_size: f64, capture_radius: f64) -> f64 {
    let a = std::f64::consts::PI * capture_radius * capture_radius / (box_size * box_size);
    1.0 - (1.0 - a).powi(n_pc as i32)
}
