//! Report writers: JSON, JSON lines, CSV and plain-text tables.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use stein_core::bounds::ClassKind;
use stein_core::verify::Metric;

use crate::runner::{EvaluatedBound, RunError, RunReport};
use crate::sweep::SweepRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub fn checks_jsonl(report: &RunReport) -> Result<String, serde_json::Error> {
    let mut out = String::new();
    for c in &report.checks {
        out.push_str(&serde_json::to_string(c)?);
        out.push('\n');
    }
    Ok(out)
}

fn csv_string(rows: Vec<Vec<String>>) -> Result<String, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r).map_err(|e| std::io::Error::other(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn checks_csv(reports: &[RunReport]) -> Result<String, RunError> {
    let mut rows = vec![["id", "check", "passed", "observed", "threshold", "details"].map(String::from).to_vec()];
    for r in reports {
        for c in &r.checks {
            rows.push(vec![
                r.id.clone(),
                c.name.clone(),
                c.passed.to_string(),
                format!("{:e}", c.observed),
                format!("{:e}", c.threshold),
                c.details.clone(),
            ]);
        }
    }
    csv_string(rows)
}

fn class_name(c: ClassKind) -> &'static str {
    match c {
        ClassKind::HalfLines => "half-lines",
        ClassKind::Intervals => "intervals",
        ClassKind::Custom => "custom",
    }
}

pub fn bounds_csv(id: &str, bounds: &[EvaluatedBound]) -> Result<String, RunError> {
    let mut rows = vec![["id", "formula", "class", "delta_bound", "A", "B", "a", "mu", "sigma", "Delta", "precondition_ok", "vacuous"]
        .map(String::from)
        .to_vec()];
    for b in bounds {
        let r = &b.report;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        rows.push(vec![
            id.into(),
            r.formula.id().into(),
            class_name(b.class).into(),
            format!("{:e}", r.delta_bound),
            format!("{:e}", r.big_a),
            format!("{:e}", r.big_b),
            format!("{:e}", r.a),
            opt(r.mu),
            format!("{:e}", r.sigma),
            opt(r.delta),
            r.precondition_ok.to_string(),
            r.vacuous.to_string(),
        ]);
    }
    csv_string(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String, RunError> {
    let params: Vec<String> = rows.first().map(|r| r.parameters.keys().cloned().collect()).unwrap_or_default();
    let mut header = params.clone();
    header.extend(["sigma", "delta_half_line", "delta_interval", "bound", "vacuous", "pass", "error"].map(String::from));
    let mut out = vec![header];
    for r in rows {
        let mut line: Vec<String> = params.iter().map(|p| r.parameters.get(p).cloned().unwrap_or_default()).collect();
        let f = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        let b = |v: Option<bool>| v.map(|x| x.to_string()).unwrap_or_default();
        line.extend([
            f(r.sigma),
            f(r.delta_half_line),
            f(r.delta_interval),
            f(r.bound),
            b(r.vacuous),
            b(r.pass),
            r.error.clone().unwrap_or_default(),
        ]);
        out.push(line);
    }
    csv_string(out)
}

/// Human-readable summary.
pub fn table(report: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} ({:?}), seed {}, {} draws: mu = {:.6}, sigma = {:.6} ({:?})",
        report.id, report.construction, report.seed, report.replicates, report.mu, report.sigma, report.moments.method
    );
    for d in &report.distances {
        let m = match d.metric {
            Metric::HalfLine => "half-line",
            Metric::Interval => "interval",
        };
        let _ = writeln!(s, "  distance {m:<10} {:.6}  (DKW band {:.6})", d.value, d.dkw_band);
    }
    if !report.bounds.is_empty() {
        let _ = writeln!(s, "  {:<16} {:<11} {:>12} {:>10} {:>6} {:>8}", "bound", "class", "value", "A", "pre", "vacuous");
        for b in &report.bounds {
            let r = &b.report;
            let _ = writeln!(
                s,
                "  {:<16} {:<11} {:>12.5e} {:>10.3e} {:>6} {:>8}",
                r.formula.id(),
                class_name(b.class),
                r.delta_bound,
                r.big_a,
                r.precondition_ok,
                r.vacuous
            );
        }
    }
    for c in &report.checks {
        let _ = writeln!(
            s,
            "  [{}] {:<40} observed {:.4e} threshold {:.4e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.observed,
            c.threshold
        );
    }
    let _ = writeln!(s, "  overall: {}", if report.passed { "PASS" } else { "FAIL" });
    s
}

/// Writes `<id>.json`, `<id>.checks.jsonl` and, for CSV, `<id>.checks.csv`
/// and `<id>.bounds.csv`; returns the paths written.
pub fn write_run(report: &RunReport, dir: &Path, format: Format) -> Result<Vec<PathBuf>, RunError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let json = dir.join(format!("{}.json", report.id));
    std::fs::write(&json, serde_json::to_string_pretty(report)?)?;
    written.push(json);
    let lines = dir.join(format!("{}.checks.jsonl", report.id));
    std::fs::write(&lines, checks_jsonl(report)?)?;
    written.push(lines);
    if format == Format::Csv {
        let p = dir.join(format!("{}.checks.csv", report.id));
        std::fs::write(&p, checks_csv(std::slice::from_ref(report))?)?;
        written.push(p);
        let p = dir.join(format!("{}.bounds.csv", report.id));
        std::fs::write(&p, bounds_csv(&report.id, &report.bounds)?)?;
        written.push(p);
    }
    Ok(written)
}

/// Reads stored reports from a file or every `*.json` in a directory.
pub fn read_reports(path: &Path) -> Result<Vec<RunReport>, RunError> {
    let mut files = Vec::new();
    if path.is_dir() {
        for e in std::fs::read_dir(path)? {
            let p = e?.path();
            if p.extension().is_some_and(|x| x == "json") {
                files.push(p);
            }
        }
        files.sort();
    } else {
        files.push(path.to_path_buf());
    }
    files.iter().map(|f| Ok(serde_json::from_str(&std::fs::read_to_string(f)?)?)).collect()
}
