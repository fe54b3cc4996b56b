//! Time-domain field runs: gap ringdowns, wave propagation, conservation
//! diagnostics, and the optional gap-vs-mu sweep.

use serde_json::json;

use bioq_core::geometry::{build_lattice, ChiralityField, Leaflet};
use bioq_core::mcs::{dispersion, measure_gap_from_run, EmState, Solver, XBoundary};
use bioq_core::signal::{fit_frequency, linear_fit};

use crate::config::{BoundaryKind, FdtdConfig, FdtdInit, RunConfig};
use crate::error::CliError;
use crate::output::{fmt_f64, OutputDir};

use super::ExperimentOutput;

struct RunTrace {
    /// Rows for the CSV: (step, time, probe_outer, probe_inner, energy,
    /// gauss_residual), thinned by record_every.
    rows: Vec<Vec<String>>,
    /// Full-resolution outer probe, for frequency fitting.
    probe: Vec<f64>,
    energy_initial: f64,
    energy_final: f64,
    max_gauss_residual: f64,
}

fn chirality(cfg: &FdtdConfig, mu: f64) -> Result<ChiralityField, CliError> {
    // the outer leaflet carries surface coefficient +mu (the inner leaflet
    // gets the opposite sign from the folded orientation)
    ChiralityField::new(cfg.delta_mu, cfg.e2, cfg.hbar, -mu, cfg.winding_pitch_l)
        .map_err(CliError::from)
}

fn boundary(kind: BoundaryKind) -> XBoundary {
    match kind {
        BoundaryKind::Periodic => XBoundary::PeriodicX,
        BoundaryKind::Caps => XBoundary::ConductorCaps,
    }
}

fn single_run(
    cfg: &FdtdConfig,
    mu: f64,
    init: FdtdInit,
    record: bool,
) -> Result<RunTrace, CliError> {
    let lattice = build_lattice(
        cfg.length_cells,
        cfg.circumference_cells,
        cfg.cell_size,
        Vec::new(),
    )?;
    let field = chirality(cfg, mu)?;
    let solver = Solver::new(&lattice, &field, boundary(cfg.boundary), cfg.dt)?;
    let mut state = EmState::new(&lattice);
    match init {
        FdtdInit::Uniform => {
            state.outer.set_uniform_e_x(cfg.amplitude);
            state.inner.set_uniform_e_x(cfg.amplitude);
        }
        FdtdInit::Wave => {
            state
                .outer
                .set_angular_wave_e_x(cfg.wave_mode, cfg.amplitude);
            state
                .inner
                .set_angular_wave_e_x(cfg.wave_mode, cfg.amplitude);
        }
    }
    solver.prime_magnetic(&mut state);

    let probe_point = (cfg.length_cells / 2, 0);
    let probe_of = |leaflet: &bioq_core::mcs::LeafletState| match init {
        FdtdInit::Uniform => leaflet.mean_e_x(),
        FdtdInit::Wave => leaflet.e_x[probe_point],
    };

    let mut trace = RunTrace {
        rows: Vec::new(),
        probe: Vec::with_capacity(cfg.steps + 1),
        energy_initial: solver.energy(&state),
        energy_final: 0.0,
        max_gauss_residual: 0.0,
    };
    for step in 0..=cfg.steps {
        let energy = solver.energy(&state);
        let residual = solver.gauss_residual(&state);
        trace.max_gauss_residual = trace.max_gauss_residual.max(residual);
        trace.probe.push(probe_of(&state.outer));
        if record && step % cfg.record_every == 0 {
            trace.rows.push(vec![
                step.to_string(),
                fmt_f64(state.time),
                fmt_f64(probe_of(&state.outer)),
                fmt_f64(probe_of(&state.inner)),
                fmt_f64(energy),
                fmt_f64(residual),
            ]);
        }
        if step == cfg.steps {
            trace.energy_final = energy;
            break;
        }
        solver.step(&mut state)?;
    }
    Ok(trace)
}

pub fn run(
    cfg: &FdtdConfig,
    run_cfg: &RunConfig,
    out: &OutputDir,
) -> Result<ExperimentOutput, CliError> {
    let trace = single_run(cfg, cfg.mu, cfg.init, true)?;
    let mut outputs = Vec::new();
    if run_cfg.emit.csv {
        outputs.push(out.write_csv(
            "fields.csv",
            &[
                "step",
                "time",
                "probe_outer",
                "probe_inner",
                "energy",
                "gauss_residual",
            ],
            &trace.rows,
        )?);
    }

    let drift_scale = trace.energy_initial.abs().max(f64::MIN_POSITIVE);
    let energy_rel_drift = (trace.energy_final - trace.energy_initial).abs() / drift_scale;

    let measured = match cfg.init {
        FdtdInit::Uniform => {
            let gap = measure_gap_from_run(&trace.probe, cfg.dt);
            json!({
                "kind": "gap",
                "value": gap.gap,
                "expected": cfg.mu.abs(),
                "periods": gap.periods,
                "resolved": gap.resolved,
            })
        }
        FdtdInit::Wave => {
            let k = cfg.wave_mode as f64 * std::f64::consts::TAU
                / (cfg.circumference_cells as f64 * cfg.cell_size);
            let expected = dispersion(k, cfg.mu, 0.0).omega_plus;
            let fit = fit_frequency(&trace.probe, cfg.dt);
            json!({
                "kind": "omega",
                "value": fit.as_ref().map(|f| f.omega),
                "expected": expected,
                "k": k,
                "periods": fit.as_ref().map(|f| f.periods),
                "resolved": fit.as_ref().is_some_and(|f| f.periods >= bioq_core::mcs::MIN_PERIODS_RESOLVED),
            })
        }
    };

    let sweep = if cfg.mu_sweep.is_empty() {
        serde_json::Value::Null
    } else {
        let mut rows = Vec::with_capacity(cfg.mu_sweep.len());
        let mut mu_abs = Vec::with_capacity(cfg.mu_sweep.len());
        let mut gaps = Vec::with_capacity(cfg.mu_sweep.len());
        for &mu in &cfg.mu_sweep {
            let sweep_trace = single_run(cfg, mu, FdtdInit::Uniform, false)?;
            let gap = measure_gap_from_run(&sweep_trace.probe, cfg.dt);
            rows.push(vec![
                fmt_f64(mu),
                fmt_f64(gap.gap),
                fmt_f64(gap.periods),
                gap.resolved.to_string(),
            ]);
            mu_abs.push(mu.abs());
            gaps.push(gap.gap);
        }
        if run_cfg.emit.csv {
            outputs.push(out.write_csv(
                "gaps.csv",
                &["mu", "gap", "periods", "resolved"],
                &rows,
            )?);
        }
        let fit = linear_fit(&mu_abs, &gaps);
        json!({
            "points": cfg.mu_sweep.len(),
            "slope": fit.as_ref().map(|f| f.slope),
            "intercept": fit.as_ref().map(|f| f.intercept),
            "r2": fit.as_ref().map(|f| f.r2),
        })
    };

    let summary = json!({
        "surface_mu": {
            "outer": cfg.mu,
            "inner": -cfg.mu,
        },
        "leaflets": [Leaflet::Outer, Leaflet::Inner],
        "steps": cfg.steps,
        "dt": cfg.dt,
        "energy_initial": trace.energy_initial,
        "energy_final": trace.energy_final,
        "energy_rel_drift": energy_rel_drift,
        "max_gauss_residual": trace.max_gauss_residual,
        "measured": measured,
        "sweep": sweep,
    });
    Ok(ExperimentOutput { outputs, summary })
}
