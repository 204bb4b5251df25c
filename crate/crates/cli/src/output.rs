//! Run artifacts: headered RFC-4180 CSV files for series, plus one JSON
//! summary per run carrying the config hash so every emitted number is
//! traceable to the exact inputs that produced it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub struct RunWriter {
    dir: PathBuf,
    experiment: String,
    config_hash: String,
    series: BTreeMap<String, Value>,
    scalars: BTreeMap<String, Value>,
}

/// Seconds since the epoch; honors SOURCE_DATE_EPOCH so reproducible runs
/// can pin the timestamp.
fn timestamp() -> u64 {
    if let Ok(v) = std::env::var("SOURCE_DATE_EPOCH") {
        if let Ok(t) = v.parse() {
            return t;
        }
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl RunWriter {
    pub fn new(dir: &Path, experiment: &str, canonical_config: &str) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        let mut hasher = Sha256::new();
        hasher.update(canonical_config.as_bytes());
        let config_hash = format!("{:x}", hasher.finalize());
        Ok(RunWriter {
            dir: dir.to_path_buf(),
            experiment: experiment.to_string(),
            config_hash,
            series: BTreeMap::new(),
            scalars: BTreeMap::new(),
        })
    }

    /// Writes one CSV series and records its file name and a note describing
    /// what the series verifies in the summary metadata.
    pub fn write_csv(
        &mut self,
        name: &str,
        note: &str,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> Result<()> {
        let path = self.dir.join(format!("{name}.csv"));
        let mut w = csv::Writer::from_path(&path)
            .with_context(|| format!("cannot write {}", path.display()))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        self.series.insert(
            name.to_string(),
            json!({ "file": format!("{name}.csv"), "note": note, "rows": rows.len() }),
        );
        Ok(())
    }

    pub fn scalar(&mut self, key: &str, value: Value) {
        self.scalars.insert(key.to_string(), value);
    }

    /// Writes the single JSON summary for the run.
    pub fn finish(self, seed: u64) -> Result<PathBuf> {
        let path = self.dir.join(format!("{}_summary.json", self.experiment));
        let summary = json!({
            "experiment": self.experiment,
            "config_hash": self.config_hash,
            "timestamp": timestamp(),
            "seed": seed,
            "outputs": self.scalars,
            "series": self.series,
        });
        let mut text = serde_json::to_string_pretty(&summary)?;
        text.push('\n');
        std::fs::write(&path, text)
            .with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}

/// JSON value for an extended real: finite numbers as numbers, infinity as
/// the string "inf".
pub fn json_real(v: f64) -> Value {
    if v.is_infinite() && v > 0.0 {
        Value::String("inf".into())
    } else if v.is_nan() {
        Value::String("nan".into())
    } else {
        json!(v)
    }
}

/// Fixed-format float for CSV cells: shortest round-trip representation,
/// deterministic across runs.
pub fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}
