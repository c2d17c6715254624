use std::collections::BTreeSet;

use semiesc_core::harness::{catalog, default_config, resolve_config, run_scenario, scenario_ids};
use semiesc_core::Error;

#[test]
fn catalog_matches_anchor_list() {
    let listed: BTreeSet<&str> = include_str!("fixtures/catalog_ids.txt").lines().filter(|l| !l.is_empty()).collect();
    let ids: BTreeSet<&str> = scenario_ids().into_iter().collect();
    assert_eq!(ids, listed);
    assert_eq!(catalog().len(), listed.len(), "duplicate ids in catalog");
    assert!(catalog().iter().all(|d| !d.statement.is_empty() && !d.checks.is_empty()));
}

#[test]
fn unknown_id_is_rejected() {
    assert!(matches!(default_config("nonexistent"), Err(Error::UnknownScenario(ref id)) if id == "nonexistent"));
    assert!(matches!(resolve_config("nonexistent", None), Err(Error::UnknownScenario(_))));
}

#[test]
fn lemma_scenario_passes_with_defaults() {
    let report = run_scenario("lemma_F_bound", &default_config("lemma_F_bound").unwrap(), None).unwrap();
    assert!(report.passed());
    assert!(report.metrics["max_excess"] <= 1e-9);
    assert_eq!(report.config_echo.seed, 0);
}

#[test]
fn closure_has_no_bounded_components() {
    let report = run_scenario("closure_no_bounded", &default_config("closure_no_bounded").unwrap(), None).unwrap();
    assert!(report.passed(), "{:?}", report.metrics);
}

#[test]
fn artifacts_and_report_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = resolve_config("psb_example", Some(&serde_json::json!({"resolution": [32, 32]}))).unwrap();
    let report = run_scenario("psb_example", &cfg, Some(dir.path())).unwrap();
    assert_eq!(report.artifacts.len(), 2);
    for a in &report.artifacts {
        assert!(std::path::Path::new(a).exists(), "{a}");
    }
    let text = std::fs::read_to_string(dir.path().join("psb_example.report.json")).unwrap();
    let back: semiesc_core::ScenarioReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);
    assert_eq!(back.fingerprints["f"].len(), 64);
}

#[test]
fn empty_scenario_passes_with_small_grid() {
    let cfg = resolve_config("empty_IG", Some(&serde_json::json!({"resolution": [96, 96]}))).unwrap();
    let report = run_scenario("empty_IG", &cfg, None).unwrap();
    assert!(report.passed(), "{:?}", report.metrics);
    assert_eq!(report.metrics["overlap_pixels"], 0.0);
}
