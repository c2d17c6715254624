use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const EXP: &str = r#"{"family":"exp_affine","a":[1,0],"b":[0,0],"c":[0,0]}"#;

fn semiesc(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semiesc")).args(args).current_dir(cwd).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn render_writes_png_and_raster() {
    let dir = tempfile::tempdir().unwrap();
    let o = semiesc(&["render", "--map", EXP, "--window", "-4,4,-4,4", "--size", "24x16", "--out", "e.png", "--raster-json", "e.json"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let png = fs::read(dir.path().join("e.png")).unwrap();
    assert_eq!(&png[1..4], b"PNG");
    assert_eq!(u32::from_be_bytes(png[16..20].try_into().unwrap()), 24);
    assert_eq!(u32::from_be_bytes(png[20..24].try_into().unwrap()), 16);
    let raster: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("e.json")).unwrap()).unwrap();
    assert_eq!(raster["w"], 24);
    assert_eq!(raster["h"], 16);
}

#[test]
fn render_map_from_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("map.json"), r#"{"family":"sine_affine","lambda":[3,0],"c":[0,0]}"#).unwrap();
    let o = semiesc(&["render", "--map", "map.json", "--size", "8x8", "--out", "s.ppm"], dir.path());
    assert!(o.status.success());
    assert!(fs::read(dir.path().join("s.ppm")).unwrap().starts_with(b"P6\n8 8\n255\n"));
}

#[test]
fn components_of_rendered_raster() {
    let dir = tempfile::tempdir().unwrap();
    assert!(semiesc(&["render", "--map", EXP, "--size", "16x16", "--out", "e.png", "--raster-json", "e.json"], dir.path()).status.success());
    let o = semiesc(&["components", "--raster", "e.json", "--connectivity", "8"], dir.path());
    assert!(o.status.success());
    let cs: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(cs["components"].as_array().unwrap().iter().all(|c| c["touches_border"] == true));
}

#[test]
fn orbit_reports_escape_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = semiesc(&["orbit", "--map", EXP, "--z", "0,0", "--iters", "20", "--csv", "o.csv"], dir.path());
    assert!(o.status.success());
    let record: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(record["status"], "escaped");
    let csv = fs::read_to_string(dir.path().join("o.csv")).unwrap();
    assert!(csv.starts_with("n,re,im,modulus\n0,0,0,0\n1,1,0,1\n"));
}

#[test]
fn conjugate_prints_semigroup() {
    let dir = tempfile::tempdir().unwrap();
    let g = format!(r#"{{"generators":[{EXP}]}}"#);
    let o = semiesc(&["conjugate", "--semigroup", &g, "--phi", "2,1"], dir.path());
    assert!(o.status.success());
    let out: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let f = &out["generators"][0];
    assert_eq!(f["a"][0], 0.5);
    assert_eq!(f["c"][0], 1.0);
    assert!((f["b"][0].as_f64().unwrap() - (2f64.ln() - 0.5)).abs() < 1e-15);
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let pass = semiesc(&["verify", "lemma_F_bound", "--out-dir", "out"], dir.path());
    assert_eq!(pass.status.code(), Some(0));
    assert!(stdout(&pass).starts_with("PASS"));
    assert!(dir.path().join("out/lemma_F_bound.report.json").exists());

    fs::write(dir.path().join("strict.json"), r#"{"thresholds":{"max_excess":-1.0},"samples":100}"#).unwrap();
    let fail = semiesc(&["verify", "lemma_F_bound", "--config", "strict.json"], dir.path());
    assert_eq!(fail.status.code(), Some(1));

    fs::write(dir.path().join("bad.json"), r#"{"resolutoin":[4,4]}"#).unwrap();
    let bad = semiesc(&["verify", "lemma_F_bound", "--config", "bad.json"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("resolutoin"));

    assert_eq!(semiesc(&["verify", "nonexistent"], dir.path()).status.code(), Some(2));
    assert_eq!(semiesc(&["render", "--out", "x.png"], dir.path()).status.code(), Some(2));
}

#[test]
fn verify_json_reports_echo_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), r#"{"seed":7,"samples":50}"#).unwrap();
    let o = semiesc(&["verify", "halfplane_invariance", "--config", "c.json", "--json", "--jobs", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let reports: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(reports[0]["config_echo"]["seed"], 7);
    assert_eq!(reports[0]["verdict"], "PASS");
}
