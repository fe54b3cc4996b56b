//! Closed-form dispersion sweep over (k, mu) at fixed b0.

use serde_json::json;

use bioq_core::mcs::dispersion;

use crate::config::{DispersionConfig, RunConfig};
use crate::error::CliError;
use crate::output::{fmt_f64, OutputDir};

use super::ExperimentOutput;

pub fn run(
    cfg: &DispersionConfig,
    run_cfg: &RunConfig,
    out: &OutputDir,
) -> Result<ExperimentOutput, CliError> {
    let mut rows = Vec::with_capacity(cfg.mu_values.len() * cfg.n_k);
    let mut unstable = 0usize;
    for &mu in &cfg.mu_values {
        for i in 0..cfg.n_k {
            let k = cfg.k_min + (cfg.k_max - cfg.k_min) * i as f64 / (cfg.n_k - 1) as f64;
            let d = dispersion(k, mu, cfg.b0);
            if d.unstable {
                unstable += 1;
            }
            rows.push(vec![
                fmt_f64(d.k),
                fmt_f64(d.mu),
                fmt_f64(d.omega_plus),
                fmt_f64(d.omega_minus),
            ]);
        }
    }
    let mut outputs = Vec::new();
    if run_cfg.emit.csv {
        outputs.push(out.write_csv(
            "dispersion.csv",
            &["k", "mu", "omega_plus", "omega_minus"],
            &rows,
        )?);
    }
    let gaps: Vec<f64> = cfg.mu_values.iter().map(|mu| mu.abs()).collect();
    let summary = json!({
        "b0": cfg.b0,
        "n_rows": rows.len(),
        "unstable_modes": unstable,
        "gaps": gaps,
    });
    Ok(ExperimentOutput { outputs, summary })
}
