//! The five experiment families behind the `run` subcommand.

mod anneal;
mod dispersion;
mod fdtd;
mod spins;
mod topo;

use serde_json::Value;

use crate::config::{Experiment, RunConfig};
use crate::error::CliError;
use crate::output::{OutputDir, OutputRecord};

/// Files written plus a JSON summary for the manifest.
pub struct ExperimentOutput {
    pub outputs: Vec<OutputRecord>,
    pub summary: Value,
}

/// Runs the configured experiment. The caller has already validated the
/// config, so a missing sub-table here is a bug, not user error.
pub fn run_experiment(cfg: &RunConfig, out: &OutputDir) -> Result<ExperimentOutput, CliError> {
    let missing = |table: &str| {
        CliError::config(format!(
            "experiment = \"{table}\" requires a [{table}] table"
        ))
    };
    match cfg.experiment {
        Experiment::Fdtd => {
            let sub = cfg.fdtd.as_ref().ok_or_else(|| missing("fdtd"))?;
            fdtd::run(sub, cfg, out)
        }
        Experiment::Dispersion => {
            let sub = cfg
                .dispersion
                .as_ref()
                .ok_or_else(|| missing("dispersion"))?;
            dispersion::run(sub, cfg, out)
        }
        Experiment::Topo => {
            let sub = cfg.topo.as_ref().ok_or_else(|| missing("topo"))?;
            topo::run(sub, cfg, out)
        }
        Experiment::Spins => {
            let sub = cfg.spins.as_ref().ok_or_else(|| missing("spins"))?;
            spins::run(sub, cfg, out)
        }
        Experiment::Anneal => {
            let sub = cfg.anneal.as_ref().ok_or_else(|| missing("anneal"))?;
            anneal::run(sub, cfg, out)
        }
    }
}
