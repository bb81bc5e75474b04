use std::collections::BTreeMap;
use std::path::Path;

use stein_lab::config::ExperimentConfig;
use stein_lab::runner::{run, RunOptions};
use stein_lab::sweep::{parse_assignment, sweep};

fn window() -> ExperimentConfig {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/bundled/window-n100-m2.toml");
    let mut cfg = ExperimentConfig::load(&p).unwrap();
    cfg.replicates = 40_000;
    cfg.checks = Some(vec![]);
    cfg
}

#[test]
fn window_distance_shrinks_with_n() {
    let cfg = window();
    let (k, v) = parse_assignment("model.n=50,200,800").unwrap();
    let rows = sweep(&cfg, &BTreeMap::from([(k, v)]), &RunOptions::default()).unwrap();
    assert_eq!(rows.len(), 3);
    let d: Vec<f64> = rows.iter().map(|r| r.delta_half_line.unwrap()).collect();
    assert!(d[0] > d[2], "{d:?}");
    let b: Vec<f64> = rows.iter().map(|r| r.bound.unwrap()).collect();
    assert!(b[0] > b[1] && b[1] > b[2], "{b:?}");
    assert!(rows.iter().all(|r| r.error.is_none()));
    assert_eq!(rows[1].report.as_ref().unwrap().id, "window-n100-m2[n=200]");
}

#[test]
fn single_point_sweep_equals_plain_run() {
    let mut cfg = window();
    cfg.replicates = 5_000;
    let (k, v) = parse_assignment("model.n=100").unwrap();
    let rows = sweep(&cfg, &BTreeMap::from([(k, v)]), &RunOptions::default()).unwrap();
    let swept = rows[0].report.as_ref().unwrap();
    let direct = run(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(swept.distances, direct.distances);
    assert_eq!(swept.sigma, direct.sigma);
}

#[test]
fn invalid_point_becomes_an_error_row() {
    let mut cfg = window();
    cfg.replicates = 2_000;
    let (k, v) = parse_assignment("model.m=2,0").unwrap();
    let rows = sweep(&cfg, &BTreeMap::from([(k, v)]), &RunOptions::default()).unwrap();
    assert!(rows[0].error.is_none());
    assert!(rows[1].error.is_some());
    assert!(rows[1].pass.is_none());
}

#[test]
fn empty_grid_is_rejected() {
    assert!(sweep(&window(), &BTreeMap::new(), &RunOptions::default()).is_err());
    assert!(parse_assignment("model.n").is_err());
}
