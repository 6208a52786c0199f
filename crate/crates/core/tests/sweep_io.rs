use std::path::Path;

use dicke_ngs::config::{AxisSpec, Param};
use dicke_ngs::sweep::{run_sweep, PointStatus};
use dicke_ngs::{Backend, Config, PresetKind, SweepPlan};
use proptest::prelude::*;

fn dicke_sweep(dir: &Path, workers: usize) -> Config {
    let mut cfg = Config::default();
    cfg.model.preset = PresetKind::Dicke;
    cfg.model.n = 40;
    cfg.solver.backend = Backend::Collective;
    cfg.sweep.axes = vec![AxisSpec { param: Param::G, min: 0.2, max: 0.8, step: 0.1 }];
    cfg.output.dir = dir.to_path_buf();
    cfg.output.workers = Some(workers);
    cfg
}

fn read_all(dir: &Path) -> Vec<(String, String)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn sweep_creates_nested_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("x/y/z");
    let outcome = run_sweep(&SweepPlan::new(dicke_sweep(&dir, 2)).unwrap()).unwrap();
    assert!(outcome.all_ok());
    assert_eq!(outcome.rows.len(), 7);
    for f in &outcome.files {
        assert!(f.exists(), "{}", f.display());
    }
    let b = &outcome.boundary.points;
    assert_eq!(b.len(), 1);
    assert!((b[0].crossing - 0.5).abs() < 0.1);
    assert!(outcome.rows.iter().all(|r| r.status == PointStatus::Ok));
}

#[test]
fn sweep_bytes_do_not_depend_on_pool_width() {
    if std::env::var_os("DICKE_NGS_WORKERS").is_some() {
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("out");
    let mut runs = Vec::new();
    for w in [1, 4, 2] {
        run_sweep(&SweepPlan::new(dicke_sweep(&dir, w)).unwrap()).unwrap();
        runs.push(read_all(&dir));
        std::fs::remove_dir_all(&dir).unwrap();
    }
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn scaling_detector_needs_four_sizes() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = dicke_sweep(tmp.path(), 1);
    cfg.sweep.detector = dicke_ngs::config::Detector::Scaling;
    // the model size counts as one of the sizes
    cfg.sweep.sizes = vec![10, 20, 40];
    assert!(SweepPlan::new(cfg.clone()).is_err());
    cfg.sweep.sizes.push(30);
    assert!(SweepPlan::new(cfg).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn config_survives_toml_round_trip(
        n in 2usize..400, g in 0.0..2.0f64, j in -2.0..2.0f64, jz in -10.0..10.0f64,
        step in 0.001..0.2f64, workers in proptest::option::of(1usize..64),
    ) {
        let mut cfg = Config::default();
        cfg.model.preset = PresetKind::DickeXxz;
        cfg.model.n = n;
        cfg.model.g = g;
        cfg.model.j = j;
        cfg.model.jz = jz;
        cfg.sweep.axes = vec![AxisSpec { param: Param::Jz, min: jz, max: jz + 1.0, step }];
        cfg.output.workers = workers;
        let text = cfg.to_toml();
        let back = Config::from_toml(&text, Path::new("round-trip.toml")).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
