//! Output directory handling: atomic file writes, CSV emission, and the
//! reproduction manifest that accompanies every run.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;

/// All artifacts of a run land under this directory; nothing is written
/// outside it. Files appear atomically (write to a temp name, then rename).
pub struct OutputDir {
    root: PathBuf,
}

/// One emitted file, named in the manifest.
#[derive(Clone, Debug)]
pub struct OutputRecord {
    pub file: String,
    pub rows: usize,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<OutputDir, CliError> {
        std::fs::create_dir_all(root)
            .map_err(|e| CliError::other(format!("cannot create {}: {e}", root.display())))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write_atomic(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let target = self.root.join(name);
        let tmp = self.root.join(format!(".{name}.tmp"));
        std::fs::write(&tmp, bytes)
            .map_err(|e| CliError::other(format!("cannot write {}: {e}", tmp.display())))?;
        std::fs::rename(&tmp, &target)
            .map_err(|e| CliError::other(format!("cannot rename to {}: {e}", target.display())))?;
        Ok(())
    }

    /// Writes a CSV file with the given header and rows; returns the record
    /// for the manifest. Quoting follows the csv crate's default
    /// quote-when-needed policy.
    pub fn write_csv(
        &self,
        name: &str,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> Result<OutputRecord, CliError> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header)?;
        for row in rows {
            writer.write_record(row)?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| CliError::other(e.to_string()))?;
        self.write_atomic(name, &bytes)?;
        Ok(OutputRecord {
            file: name.to_string(),
            rows: rows.len(),
        })
    }

    pub fn write_json(&self, name: &str, value: &Value) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write_atomic(name, &bytes)
    }
}

/// Compact decimal form for CSV cells: shortest string that round-trips the
/// double, so reruns are byte-identical and readers lose nothing.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// The manifest paired with every run: the effective config (after flag
/// overrides), the seed, what was written, an experiment summary, and
/// enough provenance to reproduce the outputs exactly.
pub fn manifest(
    config: &RunConfig,
    outputs: &[OutputRecord],
    summary: &Value,
    wall_time: Duration,
) -> Result<Value, CliError> {
    let outputs: Vec<Value> = outputs
        .iter()
        .map(|o| json!({ "file": o.file, "rows": o.rows }))
        .collect();
    Ok(json!({
        "config": serde_json::to_value(config)?,
        "experiment": config.experiment.to_string(),
        "outputs": outputs,
        "schema_version": config.schema_version,
        "seed": config.seed,
        "summary": summary,
        "versions": {
            "bioq-cli": env!("CARGO_PKG_VERSION"),
            "bioq-core": bioq_core::VERSION,
        },
        "wall_time_seconds": wall_time.as_secs_f64(),
        "workers": 1,
    }))
}
