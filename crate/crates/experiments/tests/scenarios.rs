use std::fs;

use freelab_experiments::config::MeasureSpec;
use freelab_experiments::{emit_plot_data, run_scenario, PlotKind, RunManifest, RunStatus, ScenarioConfig, ScenarioId};

fn small(id: ScenarioId, dir: &std::path::Path) -> ScenarioConfig {
    let mut c = ScenarioConfig::default_for(id);
    c.n = 128;
    c.replicates = 2;
    c.out = Some(dir.to_path_buf());
    c
}

#[test]
fn rerun_is_bit_identical() {
    for id in [ScenarioId::Lemma1, ScenarioId::Theorem2Smoothness, ScenarioId::Fact1Freeness] {
        let dir = tempfile::tempdir().unwrap();
        let first = run_scenario(&small(id, &dir.path().join("a")));
        let again = RunManifest::read(&dir.path().join("a/manifest.json")).unwrap();
        assert_eq!(again, first);
        let rerun = run_scenario(&again.config.clone());
        assert_eq!(rerun.without_timings(), first.without_timings(), "{id}");
        assert!(first.exit_code() <= 1, "{id}: {:?}", first.error);
    }
}

#[test]
fn lemma1_point_mass_targets() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small(ScenarioId::Lemma1, dir.path());
    c.n = 512;
    c.measure = Some(MeasureSpec::PointMass { at: 1.0 });
    let m = run_scenario(&c);
    assert_eq!(m.status, RunStatus::Passed, "{:?}", m.criteria);
    let table = &m.moment_tables[0];
    assert_eq!(table.name, "shifted");
    let exact: Vec<&str> = table.rows.iter().map(|r| r.exact.as_str()).collect();
    assert_eq!(exact, ["0", "2", "0", "8", "0", "40"]);
    let csv = fs::read_to_string(emit_plot_data(&m, PlotKind::MomentTable, dir.path()).unwrap()).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn fact3_uniform_second_moment() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small(ScenarioId::Fact3Separable, dir.path());
    c.kmax = 2;
    let m = run_scenario(&c);
    let row = &m.moment_tables[0].rows[1];
    assert_eq!(row.exact, "9/4");
    assert!(m.passed(), "{:?}", m.criteria);
}

#[test]
fn wigner_overlay_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let m = run_scenario(&small(ScenarioId::WignerSanity, dir.path()));
    assert!(m.passed());
    let o = &m.overlays[0];
    // the reference column is the semicircle density at the bin centers
    for (x, d) in o.x.iter().zip(&o.density) {
        let exact = if x.abs() < 2.0 { (4.0 - x * x).sqrt() / (2.0 * std::f64::consts::PI) } else { 0.0 };
        assert!((d - exact).abs() < 1e-12);
    }
    for f in ["manifest.json", "histogram.csv", "density_overlay.csv", "moment_table.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let hist = fs::read_to_string(dir.path().join("histogram.csv")).unwrap();
    let mass: f64 = hist.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap()).sum();
    assert!((mass - 1.0).abs() < 1e-9);
}

#[test]
fn failures_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small(ScenarioId::PropositionSumMult, dir.path());
    c.delta = Some(1.2);
    let m = run_scenario(&c);
    assert_eq!(m.status, RunStatus::Error);
    assert_eq!(m.exit_code(), 2);
    assert!(m.criteria.is_empty());
    let on_disk = RunManifest::read(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(on_disk.error, m.error);

    let mut c = small(ScenarioId::WignerSanity, &dir.path().join("tight"));
    c.tolerance_scale = 1e-9;
    let m = run_scenario(&c);
    assert_eq!(m.status, RunStatus::Failed);
    assert_eq!(m.exit_code(), 1);
}
