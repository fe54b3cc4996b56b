//! Run configuration: one TOML schema shared by all experiment families,
//! plus dotted-path flag overrides and a pre-run sanity report.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use bioq_core::mcs::{Solver, MIN_PULSE_SAMPLES};
use bioq_core::placement::PlacementConfig;
use bioq_core::spins::MAX_SPINS;

use crate::error::CliError;

/// Only schema understood by this binary.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Fdtd,
    Dispersion,
    Topo,
    Spins,
    Anneal,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Experiment::Fdtd => "fdtd",
            Experiment::Dispersion => "dispersion",
            Experiment::Topo => "topo",
            Experiment::Spins => "spins",
            Experiment::Anneal => "anneal",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmitFlags {
    pub csv: bool,
    pub json: bool,
}

impl Default for EmitFlags {
    fn default() -> Self {
        EmitFlags {
            csv: true,
            json: true,
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("bioq-out")
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub emit: EmitFlags,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fdtd: Option<FdtdConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dispersion: Option<DispersionConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topo: Option<TopoConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spins: Option<SpinsConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anneal: Option<PlacementConfig>,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn default_pitch() -> f64 {
    10.0
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FdtdInit {
    /// Uniform axial electric field; its ringdown frequency is the gap.
    #[default]
    Uniform,
    /// Angular plane wave on one mode; its frequency probes the dispersion.
    Wave,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    /// Torus wrap in x; no end effects.
    #[default]
    Periodic,
    /// Perfectly conducting end caps.
    Caps,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FdtdConfig {
    pub length_cells: usize,
    pub circumference_cells: usize,
    #[serde(default = "one")]
    pub cell_size: f64,
    /// Surface gap parameter; the outer leaflet carries +mu, the inner -mu.
    pub mu: f64,
    #[serde(default)]
    pub delta_mu: f64,
    #[serde(default = "one")]
    pub e2: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "default_pitch")]
    pub winding_pitch_l: f64,
    pub dt: f64,
    pub steps: usize,
    #[serde(default = "one_usize")]
    pub record_every: usize,
    #[serde(default)]
    pub init: FdtdInit,
    #[serde(default = "one_usize")]
    pub wave_mode: usize,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub boundary: BoundaryKind,
    /// When non-empty, rerun the uniform-init probe at each of these mu
    /// values and emit a gap-vs-mu table alongside the main run.
    #[serde(default)]
    pub mu_sweep: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionConfig {
    pub mu_values: Vec<f64>,
    pub b0: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub n_k: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TopoMode {
    Protection,
    Discharge,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TopoConfig {
    pub mode: TopoMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub protection: Option<ProtectionConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discharge: Option<DischargeConfig>,
}

fn default_w_max() -> i32 {
    bioq_core::topo::W_MAX_DEFAULT
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProtectionConfig {
    /// Winding vector w of the stored pair (|w> + |-w>)/sqrt(2).
    pub qubit_winding: Vec<i32>,
    /// Even-total partner for the unprotected control superposition.
    pub control_winding: Vec<i32>,
    #[serde(default = "default_w_max")]
    pub w_max: i32,
    pub noise_strength: f64,
    pub noise_steps: u64,
    #[serde(default = "one_u64")]
    pub record_every: u64,
    pub realizations: usize,
}

fn one_u64() -> u64 {
    1
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PunctureSpec {
    pub x: usize,
    pub phi: usize,
    pub radius: usize,
}

fn default_pulse_duration() -> f64 {
    1.0
}

fn default_pulse_dt() -> f64 {
    1e-3
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DischargeConfig {
    pub length_cells: usize,
    pub circumference_cells: usize,
    #[serde(default = "one")]
    pub cell_size: f64,
    pub punctures: Vec<PunctureSpec>,
    /// Chemical-potential difference across the membrane; sets the chiral
    /// coefficient b0 = e2 * delta_mu / (4 hbar).
    pub delta_mu: f64,
    #[serde(default = "one")]
    pub e2: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default = "default_pitch")]
    pub winding_pitch_l: f64,
    /// Signed charge of each pulse, fired in order at the target puncture.
    pub pulse_charges: Vec<f64>,
    #[serde(default = "default_pulse_duration")]
    pub pulse_duration: f64,
    #[serde(default = "default_pulse_dt")]
    pub pulse_dt: f64,
    #[serde(default)]
    pub target_puncture: usize,
    #[serde(default = "default_w_max")]
    pub w_max: i32,
    /// Let the transverse sector ring down between pulses so each event
    /// starts from rest.
    #[serde(default = "default_true")]
    pub reset_between_pulses: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinsMode {
    Gates,
    Singlet,
    Spectator,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SpinsConfig {
    pub mode: SpinsMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gates: Option<GatesConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub singlet: Option<SingletConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectator: Option<SpectatorConfig>,
}

fn default_gate_dt() -> f64 {
    1e-3
}

fn two() -> f64 {
    2.0
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GatesConfig {
    #[serde(default = "one")]
    pub exchange: f64,
    #[serde(default)]
    pub b_z: f64,
    #[serde(default = "default_gate_dt")]
    pub dt: f64,
    #[serde(default = "one")]
    pub transfer_peak: f64,
    /// Pulse area of the detuned contrast row, in units of pi.
    #[serde(default = "two")]
    pub detuned_area_factor: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    #[default]
    Common,
    Differential,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SingletConfig {
    #[serde(default = "one")]
    pub gamma: f64,
    pub sigma: f64,
    pub tau: f64,
    pub dt: f64,
    pub steps: usize,
    pub realizations: usize,
    #[serde(default = "one_usize")]
    pub record_every: usize,
    #[serde(default)]
    pub noise: NoiseKind,
    /// Nominal resting potential the voltage noise rides on, in volts.
    /// Label only, echoed into the summary: a constant offset is a
    /// deterministic rotation, not dephasing, so the dynamics depend solely
    /// on fluctuations about the mean and this value never enters them.
    #[serde(default = "resting_potential_default")]
    pub resting_potential: f64,
}

fn resting_potential_default() -> f64 {
    -70e-6
}

/// Dipolar Hamiltonian form for the spectator bath: the high-field secular
/// truncation or the full anisotropic tensor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DipolarFormKind {
    #[default]
    Secular,
    Full,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SpectatorConfig {
    pub m_spectators: usize,
    pub min_distance: f64,
    pub max_distance: f64,
    pub prefactor: f64,
    #[serde(default)]
    pub dipolar_form: DipolarFormKind,
    pub duration: f64,
    pub dt: f64,
    #[serde(default = "one_usize")]
    pub record_every: usize,
    pub realizations: usize,
}

/// Config loaded from disk with overrides already applied.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: RunConfig,
}

/// Parses `raw` the way a TOML value literal would parse; anything that does
/// not parse is kept as a string.
fn parse_override_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut table) => table.remove("v").expect("key v was just parsed"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Applies one `--set path.to.key=value` override in place. Numeric path
/// segments index into arrays.
fn apply_override(root: &mut toml::Value, assignment: &str) -> Result<(), CliError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("--set {assignment:?}: expected KEY=VALUE")))?;
    if path.is_empty() {
        return Err(CliError::config(format!(
            "--set {assignment:?}: empty key path"
        )));
    }
    let value = parse_override_value(raw);
    let segments: Vec<&str> = path.split('.').collect();
    let mut cursor = root;
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        if let Ok(index) = seg.parse::<usize>() {
            let arr = cursor.as_array_mut().ok_or_else(|| {
                CliError::config(format!("--set {path}: {seg} indexes a non-array"))
            })?;
            if index >= arr.len() {
                return Err(CliError::config(format!(
                    "--set {path}: index {index} out of bounds (len {})",
                    arr.len()
                )));
            }
            if last {
                arr[index] = value;
                return Ok(());
            }
            cursor = &mut arr[index];
        } else {
            let table = cursor.as_table_mut().ok_or_else(|| {
                CliError::config(format!("--set {path}: {seg} indexes a non-table"))
            })?;
            if last {
                table.insert(seg.to_string(), value);
                return Ok(());
            }
            cursor = table
                .entry(seg.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        }
    }
    unreachable!("path has at least one segment")
}

/// Loads `path`, applies `--set` overrides, then the `--seed` / `--out`
/// flags, and deserializes into the typed schema. IO failures are
/// environment errors; everything after the file is read is a config error.
pub fn load(
    path: &Path,
    sets: &[String],
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::other(format!("cannot read {}: {e}", path.display())))?;
    let mut value: toml::Value = text
        .parse()
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    for assignment in sets {
        apply_override(&mut value, assignment)?;
    }
    let root = value
        .as_table_mut()
        .ok_or_else(|| CliError::config("config root must be a table".to_string()))?;
    if let Some(seed) = seed {
        root.insert("seed".to_string(), toml::Value::Integer(seed as i64));
    }
    if let Some(out) = out {
        root.insert(
            "output_dir".to_string(),
            toml::Value::String(out.display().to_string()),
        );
    }
    let config: RunConfig = value.try_into().map_err(|e| {
        CliError::config(
            e.to_string()
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" "),
        )
    })?;
    Ok(LoadedConfig { config })
}

/// One failed sanity check, addressed by config path.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

struct Report<'a> {
    prefix: &'a str,
    violations: Vec<Violation>,
}

impl<'a> Report<'a> {
    fn push(&mut self, field: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            path: if field.is_empty() {
                self.prefix.to_string()
            } else if self.prefix.is_empty() {
                field.to_string()
            } else {
                format!("{}.{field}", self.prefix)
            },
            message: message.into(),
        });
    }

    fn require(&mut self, ok: bool, field: &str, message: impl Into<String>) {
        if !ok {
            self.push(field, message);
        }
    }

    fn positive(&mut self, v: f64, field: &str) {
        self.require(
            v > 0.0 && v.is_finite(),
            field,
            format!("must be positive and finite, got {v}"),
        );
    }

    fn finite(&mut self, v: f64, field: &str) {
        self.require(v.is_finite(), field, format!("must be finite, got {v}"));
    }
}

fn check_fdtd(cfg: &FdtdConfig, out: &mut Vec<Violation>) {
    let mut r = Report {
        prefix: "fdtd",
        violations: Vec::new(),
    };
    r.require(
        cfg.length_cells >= 4,
        "length_cells",
        format!("must be at least 4, got {}", cfg.length_cells),
    );
    r.require(
        cfg.circumference_cells >= 4,
        "circumference_cells",
        format!("must be at least 4, got {}", cfg.circumference_cells),
    );
    r.positive(cfg.cell_size, "cell_size");
    r.finite(cfg.mu, "mu");
    r.finite(cfg.delta_mu, "delta_mu");
    r.positive(cfg.e2, "e2");
    r.positive(cfg.hbar, "hbar");
    r.positive(cfg.winding_pitch_l, "winding_pitch_l");
    r.positive(cfg.dt, "dt");
    if cfg.cell_size > 0.0 && cfg.cell_size.is_finite() {
        let bound = Solver::stability_bound(cfg.cell_size);
        r.require(
            cfg.dt <= bound,
            "dt",
            format!("{} exceeds the stability bound {bound}", cfg.dt),
        );
    }
    r.require(cfg.steps >= 1, "steps", "must be at least 1");
    r.require(cfg.record_every >= 1, "record_every", "must be at least 1");
    r.finite(cfg.amplitude, "amplitude");
    r.require(
        cfg.amplitude != 0.0,
        "amplitude",
        "zero amplitude leaves nothing to probe",
    );
    if cfg.init == FdtdInit::Wave {
        r.require(
            cfg.wave_mode >= 1 && 2 * cfg.wave_mode < cfg.circumference_cells,
            "wave_mode",
            format!(
                "mode {} is not resolvable on {} angular cells",
                cfg.wave_mode, cfg.circumference_cells
            ),
        );
    }
    for (i, mu) in cfg.mu_sweep.iter().enumerate() {
        if !mu.is_finite() {
            r.push(
                &format!("mu_sweep.{i}"),
                format!("must be finite, got {mu}"),
            );
        }
    }
    out.append(&mut r.violations);
}

fn check_dispersion(cfg: &DispersionConfig, out: &mut Vec<Violation>) {
    let mut r = Report {
        prefix: "dispersion",
        violations: Vec::new(),
    };
    r.require(!cfg.mu_values.is_empty(), "mu_values", "must be non-empty");
    for (i, mu) in cfg.mu_values.iter().enumerate() {
        if !mu.is_finite() {
            r.push(
                &format!("mu_values.{i}"),
                format!("must be finite, got {mu}"),
            );
        }
    }
    r.finite(cfg.b0, "b0");
    r.require(
        cfg.k_min >= 0.0 && cfg.k_min.is_finite(),
        "k_min",
        format!("must be nonnegative, got {}", cfg.k_min),
    );
    r.require(
        cfg.k_max > cfg.k_min && cfg.k_max.is_finite(),
        "k_max",
        format!("must exceed k_min = {}, got {}", cfg.k_min, cfg.k_max),
    );
    r.require(
        cfg.n_k >= 2,
        "n_k",
        format!("must be at least 2, got {}", cfg.n_k),
    );
    out.append(&mut r.violations);
}

fn check_protection(cfg: &ProtectionConfig, out: &mut Vec<Violation>) {
    let mut r = Report {
        prefix: "topo.protection",
        violations: Vec::new(),
    };
    r.require(
        cfg.w_max >= 1,
        "w_max",
        format!("must be at least 1, got {}", cfg.w_max),
    );
    r.require(
        !cfg.qubit_winding.is_empty(),
        "qubit_winding",
        "must have at least one segment",
    );
    r.require(
        cfg.control_winding.len() == cfg.qubit_winding.len(),
        "control_winding",
        format!(
            "segment count {} does not match qubit_winding ({})",
            cfg.control_winding.len(),
            cfg.qubit_winding.len()
        ),
    );
    for (name, w) in [
        ("qubit_winding", &cfg.qubit_winding),
        ("control_winding", &cfg.control_winding),
    ] {
        for (i, &wi) in w.iter().enumerate() {
            if wi.abs() > cfg.w_max {
                r.push(
                    &format!("{name}.{i}"),
                    format!("|{wi}| exceeds w_max = {}", cfg.w_max),
                );
            }
        }
    }
    r.require(
        cfg.qubit_winding.iter().any(|&w| w != 0),
        "qubit_winding",
        "all-zero winding is its own negation; the stored pair would be a single vector",
    );
    let negated: Vec<i32> = cfg.qubit_winding.iter().map(|w| -w).collect();
    r.require(
        cfg.control_winding != cfg.qubit_winding && cfg.control_winding != negated,
        "control_winding",
        "must lie outside the qubit orbit {w, -w}",
    );
    r.require(
        cfg.noise_strength >= 0.0 && cfg.noise_strength.is_finite(),
        "noise_strength",
        format!("must be nonnegative, got {}", cfg.noise_strength),
    );
    r.require(cfg.noise_steps >= 1, "noise_steps", "must be at least 1");
    r.require(cfg.record_every >= 1, "record_every", "must be at least 1");
    r.require(cfg.realizations >= 1, "realizations", "must be at least 1");
    out.append(&mut r.violations);
}

fn check_discharge(cfg: &DischargeConfig, out: &mut Vec<Violation>) {
    let mut r = Report {
        prefix: "topo.discharge",
        violations: Vec::new(),
    };
    r.require(
        cfg.length_cells >= 4,
        "length_cells",
        format!("must be at least 4, got {}", cfg.length_cells),
    );
    r.require(
        cfg.circumference_cells >= 4,
        "circumference_cells",
        format!("must be at least 4, got {}", cfg.circumference_cells),
    );
    r.positive(cfg.cell_size, "cell_size");
    r.require(!cfg.punctures.is_empty(), "punctures", "must be non-empty");
    r.finite(cfg.delta_mu, "delta_mu");
    r.positive(cfg.e2, "e2");
    r.positive(cfg.hbar, "hbar");
    r.finite(cfg.mu, "mu");
    r.positive(cfg.winding_pitch_l, "winding_pitch_l");
    r.require(
        !cfg.pulse_charges.is_empty(),
        "pulse_charges",
        "must be non-empty",
    );
    for (i, q) in cfg.pulse_charges.iter().enumerate() {
        if !q.is_finite() {
            r.push(
                &format!("pulse_charges.{i}"),
                format!("must be finite, got {q}"),
            );
        }
    }
    r.positive(cfg.pulse_duration, "pulse_duration");
    r.positive(cfg.pulse_dt, "pulse_dt");
    if cfg.pulse_duration > 0.0 && cfg.pulse_dt > 0.0 {
        let samples = (cfg.pulse_duration / cfg.pulse_dt).ceil();
        r.require(
            samples >= MIN_PULSE_SAMPLES as f64,
            "pulse_dt",
            format!(
                "resolves the pulse by {samples} samples; at least {MIN_PULSE_SAMPLES} required"
            ),
        );
    }
    r.require(
        cfg.target_puncture < cfg.punctures.len(),
        "target_puncture",
        format!(
            "index {} out of range ({} punctures)",
            cfg.target_puncture,
            cfg.punctures.len()
        ),
    );
    r.require(
        cfg.w_max >= 1,
        "w_max",
        format!("must be at least 1, got {}", cfg.w_max),
    );
    out.append(&mut r.violations);
}

fn check_gates(cfg: &GatesConfig, out: &mut Vec<Violation>) {
    let mut r = Report {
        prefix: "spins.gates",
        violations: Vec::new(),
    };
    r.positive(cfg.exchange, "exchange");
    r.finite(cfg.b_z, "b_z");
    r.positive(cfg.dt, "dt");
    r.positive(cfg.transfer_peak, "transfer_peak");
    r.require(
        cfg.detuned_area_factor >= 0.0 && cfg.detuned_area_factor.is_finite(),
        "detuned_area_factor",
        format!("must be nonnegative, got {}", cfg.detuned_area_factor),
    );
    out.append(&mut r.violations);
}

fn check_singlet(cfg: &SingletConfig, out: &mut Vec<Violation>) {
    let mut r = Report {
        prefix: "spins.singlet",
        violations: Vec::new(),
    };
    r.finite(cfg.gamma, "gamma");
    r.require(
        cfg.sigma >= 0.0 && cfg.sigma.is_finite(),
        "sigma",
        format!("must be nonnegative, got {}", cfg.sigma),
    );
    r.positive(cfg.tau, "tau");
    r.positive(cfg.dt, "dt");
    r.require(cfg.steps >= 1, "steps", "must be at least 1");
    r.require(cfg.realizations >= 1, "realizations", "must be at least 1");
    r.require(cfg.record_every >= 1, "record_every", "must be at least 1");
    r.finite(cfg.resting_potential, "resting_potential");
    out.append(&mut r.violations);
}

fn check_spectator(cfg: &SpectatorConfig, out: &mut Vec<Violation>) {
    let mut r = Report {
        prefix: "spins.spectator",
        violations: Vec::new(),
    };
    let total = cfg.m_spectators + 2;
    r.require(
        total <= MAX_SPINS,
        "m_spectators",
        format!(
            "{} spectators plus the encoded pair is {total} spins; the cap is {MAX_SPINS}",
            cfg.m_spectators
        ),
    );
    r.positive(cfg.min_distance, "min_distance");
    r.require(
        cfg.max_distance >= cfg.min_distance && cfg.max_distance.is_finite(),
        "max_distance",
        format!(
            "must be at least min_distance = {}, got {}",
            cfg.min_distance, cfg.max_distance
        ),
    );
    r.finite(cfg.prefactor, "prefactor");
    r.positive(cfg.duration, "duration");
    r.positive(cfg.dt, "dt");
    r.require(cfg.realizations >= 1, "realizations", "must be at least 1");
    r.require(cfg.record_every >= 1, "record_every", "must be at least 1");
    out.append(&mut r.violations);
}

fn check_anneal(cfg: &PlacementConfig, out: &mut Vec<Violation>) {
    if let Err(e) = cfg.validate() {
        out.push(Violation {
            path: "anneal".to_string(),
            message: e.to_string(),
        });
    }
    if let Err(e) = cfg.validate_schedule_order() {
        out.push(Violation {
            path: "anneal".to_string(),
            message: e.to_string(),
        });
    }
}

/// Schema and physics sanity checks that run without executing anything:
/// solver stability bound, spin dimension cap, anneal temperature ordering,
/// and per-field domains.
pub fn check(cfg: &RunConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    if cfg.schema_version != SCHEMA_VERSION {
        out.push(Violation {
            path: "schema_version".to_string(),
            message: format!(
                "unsupported version {} (this binary reads {SCHEMA_VERSION})",
                cfg.schema_version
            ),
        });
    }
    let missing = |out: &mut Vec<Violation>, table: &str| {
        out.push(Violation {
            path: table.to_string(),
            message: format!("experiment = \"{table}\" requires a [{table}] table"),
        });
    };
    match cfg.experiment {
        Experiment::Fdtd => match &cfg.fdtd {
            Some(c) => check_fdtd(c, &mut out),
            None => missing(&mut out, "fdtd"),
        },
        Experiment::Dispersion => match &cfg.dispersion {
            Some(c) => check_dispersion(c, &mut out),
            None => missing(&mut out, "dispersion"),
        },
        Experiment::Topo => match &cfg.topo {
            Some(c) => match (c.mode, &c.protection, &c.discharge) {
                (TopoMode::Protection, Some(p), _) => check_protection(p, &mut out),
                (TopoMode::Protection, None, _) => out.push(Violation {
                    path: "topo.protection".to_string(),
                    message: "mode = \"protection\" requires a [topo.protection] table".to_string(),
                }),
                (TopoMode::Discharge, _, Some(d)) => check_discharge(d, &mut out),
                (TopoMode::Discharge, _, None) => out.push(Violation {
                    path: "topo.discharge".to_string(),
                    message: "mode = \"discharge\" requires a [topo.discharge] table".to_string(),
                }),
            },
            None => missing(&mut out, "topo"),
        },
        Experiment::Spins => match &cfg.spins {
            Some(c) => match (c.mode, &c.gates, &c.singlet, &c.spectator) {
                (SpinsMode::Gates, Some(g), _, _) => check_gates(g, &mut out),
                (SpinsMode::Gates, None, _, _) => out.push(Violation {
                    path: "spins.gates".to_string(),
                    message: "mode = \"gates\" requires a [spins.gates] table".to_string(),
                }),
                (SpinsMode::Singlet, _, Some(s), _) => check_singlet(s, &mut out),
                (SpinsMode::Singlet, _, None, _) => out.push(Violation {
                    path: "spins.singlet".to_string(),
                    message: "mode = \"singlet\" requires a [spins.singlet] table".to_string(),
                }),
                (SpinsMode::Spectator, _, _, Some(s)) => check_spectator(s, &mut out),
                (SpinsMode::Spectator, _, _, None) => out.push(Violation {
                    path: "spins.spectator".to_string(),
                    message: "mode = \"spectator\" requires a [spins.spectator] table".to_string(),
                }),
            },
            None => missing(&mut out, "spins"),
        },
        Experiment::Anneal => match &cfg.anneal {
            Some(c) => check_anneal(c, &mut out),
            None => missing(&mut out, "anneal"),
        },
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_config(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    const DISPERSION: &str = "\
schema_version = 1
experiment = \"dispersion\"

[dispersion]
mu_values = [0.0, 0.5]
b0 = 0.1
k_min = 0.0
k_max = 2.0
n_k = 16
";

    #[test]
    fn loads_and_passes_checks() {
        let f = write_config(DISPERSION);
        let loaded = load(f.path(), &[], None, None).unwrap();
        assert_eq!(loaded.config.experiment, Experiment::Dispersion);
        assert_eq!(loaded.config.seed, 0);
        assert_eq!(loaded.config.output_dir, PathBuf::from("bioq-out"));
        assert!(loaded.config.emit.csv && loaded.config.emit.json);
        assert!(check(&loaded.config).is_empty());
    }

    #[test]
    fn flag_overrides_beat_file_values() {
        let f = write_config(DISPERSION);
        let sets = vec![
            "dispersion.n_k=64".to_string(),
            "dispersion.mu_values.1=0.25".to_string(),
            "emit.csv=false".to_string(),
        ];
        let loaded = load(f.path(), &sets, Some(7), Some(Path::new("elsewhere"))).unwrap();
        let d = loaded.config.dispersion.unwrap();
        assert_eq!(d.n_k, 64);
        assert_eq!(d.mu_values[1], 0.25);
        assert!(!loaded.config.emit.csv);
        assert_eq!(loaded.config.seed, 7);
        assert_eq!(loaded.config.output_dir, PathBuf::from("elsewhere"));
    }

    #[test]
    fn override_value_forms() {
        assert_eq!(parse_override_value("3"), toml::Value::Integer(3));
        assert_eq!(parse_override_value("3.5"), toml::Value::Float(3.5));
        assert_eq!(parse_override_value("true"), toml::Value::Boolean(true));
        assert_eq!(
            parse_override_value("\"wave\""),
            toml::Value::String("wave".to_string())
        );
        // bare words fall back to strings
        assert_eq!(
            parse_override_value("wave"),
            toml::Value::String("wave".to_string())
        );
        assert_eq!(
            parse_override_value("[1, 2]"),
            toml::Value::Array(vec![toml::Value::Integer(1), toml::Value::Integer(2)])
        );
    }

    #[test]
    fn bad_override_paths_are_config_errors() {
        let f = write_config(DISPERSION);
        for assignment in [
            "no_equals",
            "dispersion.mu_values.9=1.0",
            "dispersion.mu_values.x=1.0",
            "schema_version.deep=1",
        ] {
            let err = load(f.path(), &[assignment.to_string()], None, None).unwrap_err();
            assert_eq!(err.category(), "config-error", "override {assignment}");
        }
    }

    #[test]
    fn unknown_and_missing_fields_name_the_field() {
        let f = write_config("schema_version = 1\nexperiment = \"dispersion\"\n[dispersion]\nb0 = 0.0\nk_min = 0.0\nk_max = 1.0\nn_k = 4\n");
        let err = load(f.path(), &[], None, None).unwrap_err();
        assert!(err.message().contains("mu_values"), "{}", err.message());

        let f = write_config(&format!("{DISPERSION}\n[dispersion.extra]\nx = 1\n"));
        assert!(load(f.path(), &[], None, None).is_err());
    }

    #[test]
    fn check_flags_missing_experiment_table() {
        let f = write_config("schema_version = 1\nexperiment = \"fdtd\"\n");
        let loaded = load(f.path(), &[], None, None).unwrap();
        let v = check(&loaded.config);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].path, "fdtd");
    }

    #[test]
    fn check_flags_stability_and_dimension_and_ordering() {
        // dt above the stability bound
        let f = write_config(
            "schema_version = 1\nexperiment = \"fdtd\"\n[fdtd]\nlength_cells = 8\ncircumference_cells = 8\nmu = 0.3\ndt = 0.8\nsteps = 10\n",
        );
        let loaded = load(f.path(), &[], None, None).unwrap();
        let v = check(&loaded.config);
        assert!(
            v.iter()
                .any(|x| x.path == "fdtd.dt" && x.message.contains("stability")),
            "{v:?}"
        );

        // 13 spectators + encoded pair = 15 spins, over the cap
        let f = write_config(
            "schema_version = 1\nexperiment = \"spins\"\n[spins]\nmode = \"spectator\"\n[spins.spectator]\nm_spectators = 13\nmin_distance = 8.0\nmax_distance = 12.0\nprefactor = 100.0\nduration = 1.0\ndt = 0.01\nrealizations = 2\n",
        );
        let loaded = load(f.path(), &[], None, None).unwrap();
        let v = check(&loaded.config);
        assert!(
            v.iter()
                .any(|x| x.path == "spins.spectator.m_spectators" && x.message.contains("15")),
            "{v:?}"
        );

        // schema version gate
        let f = write_config(&DISPERSION.replace("schema_version = 1", "schema_version = 9"));
        let loaded = load(f.path(), &[], None, None).unwrap();
        assert!(check(&loaded.config)
            .iter()
            .any(|x| x.path == "schema_version"));
    }

    #[test]
    fn protection_checks_reject_degenerate_encodings() {
        let base = "schema_version = 1\nexperiment = \"topo\"\n[topo]\nmode = \"protection\"\n[topo.protection]\nqubit_winding = [1, 0]\ncontrol_winding = [0, 0]\nnoise_strength = 0.05\nnoise_steps = 100\nrealizations = 4\n";
        let f = write_config(base);
        let loaded = load(f.path(), &[], None, None).unwrap();
        assert!(check(&loaded.config).is_empty());

        // control inside the qubit orbit
        let f =
            write_config(&base.replace("control_winding = [0, 0]", "control_winding = [-1, 0]"));
        let loaded = load(f.path(), &[], None, None).unwrap();
        assert!(!check(&loaded.config).is_empty());

        // winding beyond the cutoff
        let f = write_config(&base.replace("qubit_winding = [1, 0]", "qubit_winding = [9, 0]"));
        let loaded = load(f.path(), &[], None, None).unwrap();
        assert!(!check(&loaded.config).is_empty());
    }
}
