use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};

/// One CSV row: `replication, statistic, value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub replication: usize,
    pub statistic: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    pub threshold: f64,
    pub detail: String,
}

/// Full description of a violated deterministic contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub suite: String,
    pub draw: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: ExperimentKind,
    pub config_hash: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub summary: BTreeMap<String, f64>,
    pub criteria: Vec<CriterionOutcome>,
    pub witnesses: Vec<Witness>,
    #[serde(skip)]
    pub rows: Vec<Row>,
}

impl ResultRecord {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            experiment: config.experiment,
            config_hash: config.config_hash(),
            seed: config.seed,
            config: config.clone(),
            summary: BTreeMap::new(),
            criteria: Vec::new(),
            witnesses: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn criterion(&self, name: &str) -> Option<&CriterionOutcome> {
        self.criteria.iter().find(|c| c.name == name)
    }

    pub(crate) fn push_row(&mut self, replication: usize, statistic: impl Into<String>, value: f64) {
        self.rows.push(Row { replication, statistic: statistic.into(), value });
    }

    pub(crate) fn note(&mut self, key: impl Into<String>, value: f64) {
        self.summary.insert(key.into(), value);
    }

    /// Records `observed ≤ threshold` (or the given verdict) as a named criterion.
    pub(crate) fn judge(&mut self, name: &str, passed: bool, observed: f64, threshold: f64, detail: impl Into<String>) {
        self.criteria.push(CriterionOutcome {
            name: name.into(),
            passed,
            observed,
            threshold,
            detail: detail.into(),
        });
    }

    /// Bit-level fingerprint of every statistic, row and verdict.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.config_hash.as_bytes());
        h.update(self.seed.to_le_bytes());
        for (k, v) in &self.summary {
            h.update(k.as_bytes());
            h.update(v.to_bits().to_le_bytes());
        }
        for c in &self.criteria {
            h.update(c.name.as_bytes());
            h.update([c.passed as u8]);
            h.update(c.observed.to_bits().to_le_bytes());
            h.update(c.threshold.to_bits().to_le_bytes());
            h.update(c.detail.as_bytes());
        }
        for w in &self.witnesses {
            h.update(w.suite.as_bytes());
            h.update(w.draw.to_le_bytes());
            h.update(w.detail.as_bytes());
        }
        for r in &self.rows {
            h.update(r.replication.to_le_bytes());
            h.update(r.statistic.as_bytes());
            h.update(r.value.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn summary_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("record serializes");
        value["digest"] = serde_json::Value::String(self.digest());
        serde_json::to_string_pretty(&value).expect("record serializes")
    }

    /// Writes `<kind>_replications.csv`, `<kind>_summary.json` and the
    /// effective `<kind>_config.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let io = |e: std::io::Error| Error::InvalidArgument(format!("{}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(io)?;
        let stem = self.experiment.to_string();
        let csv_path = dir.join(format!("{stem}_replications.csv"));
        let mut writer = csv::Writer::from_path(&csv_path).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        for row in &self.rows {
            writer.serialize(row).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        }
        writer.flush().map_err(io)?;
        let json_path = dir.join(format!("{stem}_summary.json"));
        fs::write(&json_path, self.summary_json()).map_err(io)?;
        let config_path = dir.join(format!("{stem}_config.json"));
        fs::write(&config_path, self.config.to_json()).map_err(io)?;
        Ok(vec![csv_path, json_path, config_path])
    }
}
