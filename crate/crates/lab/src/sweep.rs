//! Parameter sweeps over a config template.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use stein_core::bounds::{ClassKind, Formula};

use crate::config::{ConfigError, ExperimentConfig};
use crate::runner::{run, RunOptions, RunReport};

/// One grid point: its parameters and either the summary or the error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameters: BTreeMap<String, String>,
    pub sigma: Option<f64>,
    pub delta_half_line: Option<f64>,
    pub delta_interval: Option<f64>,
    /// The symbolic half-line bound.
    pub bound: Option<f64>,
    pub vacuous: Option<bool>,
    pub pass: Option<bool>,
    pub error: Option<String>,
    #[serde(skip)]
    pub report: Option<RunReport>,
}

/// Parses `path=v1,v2,...`; values are read as TOML scalars.
pub fn parse_assignment(text: &str) -> Result<(String, Vec<toml::Value>), ConfigError> {
    let bad = |m: &str| ConfigError::Invalid { field: "sweep".into(), message: format!("{m}: {text:?}") };
    let (path, values) = text.split_once('=').ok_or_else(|| bad("expected path=v1,v2"))?;
    let mut out = Vec::new();
    for v in values.split(',') {
        let v = v.trim();
        let parsed: toml::Value = toml::from_str::<toml::Table>(&format!("x = {v}"))
            .ok()
            .and_then(|mut t| t.remove("x"))
            .unwrap_or_else(|| toml::Value::String(v.into()));
        out.push(parsed);
    }
    if path.trim().is_empty() || out.is_empty() {
        return Err(bad("empty path or value list"));
    }
    Ok((path.trim().into(), out))
}

fn set_path(root: &mut toml::Value, path: &str, value: toml::Value) -> Result<(), String> {
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (k, part) in parts.iter().enumerate() {
        let table = cur.as_table_mut().ok_or_else(|| format!("{path}: not a table at {part}"))?;
        if k + 1 == parts.len() {
            table.insert((*part).into(), value);
            return Ok(());
        }
        cur = table.entry(*part).or_insert_with(|| toml::Value::Table(Default::default()));
    }
    Ok(())
}

fn show(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Cartesian product of the grid, in key order with the last key fastest.
pub fn grid_points(grid: &BTreeMap<String, Vec<toml::Value>>) -> Vec<Vec<(String, toml::Value)>> {
    let mut points: Vec<Vec<(String, toml::Value)>> = vec![Vec::new()];
    for (key, values) in grid {
        let mut next = Vec::with_capacity(points.len() * values.len());
        for p in &points {
            for v in values {
                let mut q = p.clone();
                q.push((key.clone(), v.clone()));
                next.push(q);
            }
        }
        points = next;
    }
    points
}

/// One run per grid point; a failing point yields an error row and the sweep goes on.
pub fn sweep(
    template: &ExperimentConfig,
    grid: &BTreeMap<String, Vec<toml::Value>>,
    opts: &RunOptions,
) -> Result<Vec<SweepRow>, ConfigError> {
    if grid.is_empty() || grid.values().any(|v| v.is_empty()) {
        return Err(ConfigError::Invalid { field: "sweep.parameters".into(), message: "grid is empty".into() });
    }
    let mut base = template.clone();
    base.sweep = None;
    let base_value = toml::Value::try_from(&base)
        .map_err(|e| ConfigError::Invalid { field: "sweep".into(), message: e.to_string() })?;
    let mut rows = Vec::new();
    for point in grid_points(grid) {
        let parameters: BTreeMap<String, String> = point.iter().map(|(k, v)| (k.clone(), show(v))).collect();
        let mut value = base_value.clone();
        let mut row = SweepRow {
            parameters: parameters.clone(),
            sigma: None,
            delta_half_line: None,
            delta_interval: None,
            bound: None,
            vacuous: None,
            pass: None,
            error: None,
            report: None,
        };
        let outcome = point
            .iter()
            .try_for_each(|(k, v)| set_path(&mut value, k, v.clone()))
            .and_then(|_| value.try_into::<ExperimentConfig>().map_err(|e| e.to_string()))
            .and_then(|mut cfg| {
                let suffix: Vec<String> = parameters.iter().map(|(k, v)| format!("{}={v}", k.rsplit('.').next().unwrap_or(k))).collect();
                cfg.id = format!("{}[{}]", cfg.id, suffix.join(","));
                run(&cfg, opts).map_err(|e| e.to_string())
            });
        match outcome {
            Ok(report) => {
                row.sigma = Some(report.sigma);
                row.delta_half_line = report.distances.first().map(|d| d.value);
                row.delta_interval = report.distances.get(1).map(|d| d.value);
                let main = report
                    .bounds
                    .iter()
                    .find(|b| b.class == ClassKind::HalfLines && matches!(b.report.formula, Formula::ZeroMain | Formula::SizeMain))
                    .or(report.bounds.first());
                row.bound = main.map(|b| b.report.delta_bound);
                row.vacuous = main.map(|b| b.report.vacuous);
                row.pass = Some(report.passed);
                row.report = Some(report);
            }
            Err(e) => row.error = Some(e),
        }
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignments_parse_scalars() {
        let (p, v) = parse_assignment("model.n=50, 100,200").unwrap();
        assert_eq!(p, "model.n");
        assert_eq!(v, vec![toml::Value::Integer(50), toml::Value::Integer(100), toml::Value::Integer(200)]);
        let (_, v) = parse_assignment("model.payoff=ascent,0.5").unwrap();
        assert_eq!(v, vec![toml::Value::String("ascent".into()), toml::Value::Float(0.5)]);
        assert!(parse_assignment("nothing").is_err());
    }

    #[test]
    fn grid_is_a_cartesian_product() {
        let mut g = BTreeMap::new();
        g.insert("a".to_string(), vec![toml::Value::Integer(1), toml::Value::Integer(2)]);
        g.insert("b".to_string(), vec![toml::Value::Integer(3), toml::Value::Integer(4), toml::Value::Integer(5)]);
        let pts = grid_points(&g);
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[1], vec![("a".into(), toml::Value::Integer(1)), ("b".into(), toml::Value::Integer(4))]);
    }
}
