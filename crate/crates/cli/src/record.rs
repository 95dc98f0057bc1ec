//! Result records: one JSON file per run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::CliError;

pub const SCHEMA: &str = "fluxindex.result/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum Status {
    Ok,
    Error { message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema: String,
    pub config: ExperimentConfig,
    pub status: Status,
    /// The headline value of the experiment (index, σ, ρ, phase, ...).
    #[serde(default)]
    pub value: Option<f64>,
    /// Finite scalar diagnostics, sorted by name.
    #[serde(default)]
    pub diagnostics: BTreeMap<String, f64>,
    /// Pass/fail of each tolerance check.
    #[serde(default)]
    pub gates: BTreeMap<String, bool>,
    /// Full library reports.
    #[serde(default)]
    pub report: serde_json::Value,
    pub wall_clock_seconds: f64,
}

impl ResultRecord {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            schema: SCHEMA.into(),
            config,
            status: Status::Ok,
            value: None,
            diagnostics: BTreeMap::new(),
            gates: BTreeMap::new(),
            report: serde_json::Value::Object(Default::default()),
            wall_clock_seconds: 0.0,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }

    /// Stores `v` unless it is NaN or infinite.
    pub fn diag(&mut self, name: &str, v: f64) {
        if v.is_finite() {
            self.diagnostics.insert(name.into(), v + 0.0);
        }
    }

    pub fn gate(&mut self, name: &str, pass: bool) {
        self.gates.insert(name.into(), pass);
    }

    pub fn attach(&mut self, name: &str, report: impl Serialize) {
        let v = serde_json::to_value(report).unwrap_or(serde_json::Value::Null);
        if let serde_json::Value::Object(m) = &mut self.report {
            m.insert(name.into(), v);
        }
    }

    /// Everything except the wall clock, serialized; identical for identical runs.
    pub fn numeric_payload(&self) -> String {
        let mut r = self.clone();
        r.wall_clock_seconds = 0.0;
        serde_json::to_string(&r).expect("records always serialize")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let r: ResultRecord = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        if r.schema != SCHEMA {
            return Err(CliError::Parse(format!("unsupported schema {:?}, expected {SCHEMA:?}", r.schema)));
        }
        Ok(r)
    }

    pub fn write(&self, dir: &Path, stem: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{stem}.json"));
        std::fs::write(&path, self.to_json())?;
        Ok(path)
    }
}
