//! Parameter sweeps over one or more config fields.

use std::collections::BTreeSet;
use std::io::Write;

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::record::{ResultRecord, Status};
use crate::run::run_experiment;
use crate::CliError;

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub value: String,
    /// `Err` when the point's config was rejected.
    pub record: Result<ResultRecord, String>,
}

/// Sets `path` (dotted, e.g. `model.l1`) in a TOML table. The value is read as a TOML
/// literal, falling back to a plain string.
pub fn set_field(table: &mut toml::Table, path: &str, value: &str) -> Result<(), CliError> {
    let parsed = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    let mut keys: Vec<&str> = path.split('.').collect();
    let last = keys.pop().filter(|k| !k.is_empty()).ok_or_else(|| CliError::Invalid {
        field: path.into(),
        message: "empty field path".into(),
    })?;
    let mut cur = table;
    for k in keys {
        cur = cur
            .entry(k)
            .or_insert_with(|| toml::Value::Table(Default::default()))
            .as_table_mut()
            .ok_or_else(|| CliError::Invalid {
                field: path.into(),
                message: format!("{k} is not a table"),
            })?;
    }
    cur.insert(last.to_string(), parsed);
    Ok(())
}

/// Config for one sweep point: every path in `axes` is set to `value`.
pub fn point_config(template: &toml::Table, axes: &[String], value: &str) -> Result<ExperimentConfig, CliError> {
    let mut t = template.clone();
    for a in axes {
        set_field(&mut t, a, value)?;
    }
    ExperimentConfig::from_toml(&toml::to_string(&t).map_err(|e| CliError::Parse(e.to_string()))?)
}

/// Runs the points on a pool of `workers` threads; output order follows `values`.
pub fn sweep(template: &toml::Table, axes: &[String], values: &[String], workers: usize) -> Result<Vec<SweepPoint>, CliError> {
    if axes.is_empty() {
        return Err(CliError::Invalid {
            field: "axis".into(),
            message: "a sweep needs at least one field".into(),
        });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Invalid { field: "workers".into(), message: e.to_string() })?;
    let points = pool.install(|| {
        values
            .par_iter()
            .map(|v| SweepPoint {
                value: v.clone(),
                record: point_config(template, axes, v)
                    .and_then(|cfg| run_experiment(&cfg))
                    .map_err(|e| e.to_string()),
            })
            .collect()
    });
    Ok(points)
}

/// CSV with one row per point: value, status, headline value, then every diagnostic
/// seen in any record (sorted by name).
pub fn write_csv(points: &[SweepPoint], out: impl Write) -> Result<(), CliError> {
    let keys: BTreeSet<&str> = points
        .iter()
        .filter_map(|p| p.record.as_ref().ok())
        .flat_map(|r| r.diagnostics.keys().map(String::as_str))
        .collect();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["value", "status", "result"];
    header.extend(keys.iter().copied());
    w.write_record(&header)?;
    for p in points {
        let mut row = vec![p.value.clone()];
        match &p.record {
            Ok(r) => {
                row.push(match &r.status {
                    Status::Ok => "ok".into(),
                    Status::Error { message } => format!("error: {message}"),
                });
                row.push(r.value.map(|v| v.to_string()).unwrap_or_default());
                for k in &keys {
                    row.push(r.diagnostics.get(*k).map(|v| v.to_string()).unwrap_or_default());
                }
            }
            Err(e) => {
                row.push(format!("invalid: {e}"));
                row.extend(std::iter::repeat(String::new()).take(keys.len() + 1));
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_paths() {
        let mut t: toml::Table = "kind = \"lsm\"\n[model]\nl1 = 4\n".parse().unwrap();
        set_field(&mut t, "model.l1", "8").unwrap();
        set_field(&mut t, "model.flux", "1/4").unwrap();
        set_field(&mut t, "tolerances.integrality", "1e-3").unwrap();
        assert_eq!(t["model"]["l1"].as_integer(), Some(8));
        assert_eq!(t["model"]["flux"].as_str(), Some("1/4"));
        assert_eq!(t["tolerances"]["integrality"].as_float(), Some(1e-3));
        assert!(set_field(&mut t, "kind.x", "1").is_err());
        assert!(set_field(&mut t, "", "1").is_err());
    }
}
