//! Scenario runner: resolved configuration, threshold checks and reports.

mod metrics;
mod scenarios;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::escape::{Budget, Raster, Window, MAX_DEPTH, MAX_PIXELS};
use crate::render::{render, Palette};

pub use scenarios::{catalog, ScenarioDef};

/// Fully resolved run configuration; echoed verbatim in every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub budget: Budget,
    pub depth: usize,
    pub window: Window,
    pub resolution: [usize; 2],
    pub seed: u64,
    pub samples: usize,
    pub thresholds: BTreeMap<String, f64>,
    pub params: BTreeMap<String, f64>,
}

fn bad(key: impl Into<String>, reason: impl ToString) -> Error {
    Error::InvalidConfig { key: key.into(), reason: reason.to_string() }
}

fn parse<T: serde::de::DeserializeOwned>(key: &str, v: &Value) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| bad(key, e))
}

fn merge_known(map: &mut BTreeMap<String, f64>, v: &Value, section: &str) -> Result<()> {
    let obj = v.as_object().ok_or_else(|| bad(section, "expected an object"))?;
    for (k, x) in obj {
        let key = format!("{section}.{k}");
        let slot = map.get_mut(k).ok_or_else(|| bad(&key, "unknown key for this scenario"))?;
        *slot = parse(&key, x)?;
    }
    Ok(())
}

impl Config {
    /// Merges a JSON object of overrides. Every key must already exist.
    pub fn apply_overrides(&mut self, overrides: &Value) -> Result<()> {
        let obj = overrides.as_object().ok_or_else(|| bad("<root>", "expected a JSON object"))?;
        for (key, v) in obj {
            match key.as_str() {
                "budget" => {
                    let b = v.as_object().ok_or_else(|| bad("budget", "expected an object"))?;
                    for (k, x) in b {
                        let full = format!("budget.{k}");
                        match k.as_str() {
                            "max_iter" => self.budget.max_iter = parse(&full, x)?,
                            "r_escape" => self.budget.r_escape = parse(&full, x)?,
                            "r_bound" => self.budget.r_bound = parse(&full, x)?,
                            _ => return Err(bad(full, "unknown key")),
                        }
                    }
                }
                "depth" => self.depth = parse(key, v)?,
                "window" => self.window = parse(key, v)?,
                "resolution" => self.resolution = parse(key, v)?,
                "seed" => self.seed = parse(key, v)?,
                "samples" => self.samples = parse(key, v)?,
                "thresholds" => merge_known(&mut self.thresholds, v, "thresholds")?,
                "params" => merge_known(&mut self.params, v, "params")?,
                _ => return Err(bad(key.as_str(), "unknown key")),
            }
        }
        Ok(())
    }

    fn validate_for(&self, def: &ScenarioDef) -> Result<()> {
        self.budget.validate().map_err(|e| bad("budget", e))?;
        if self.depth == 0 || self.depth > MAX_DEPTH {
            return Err(bad("depth", format!("must be in 1..={MAX_DEPTH}")));
        }
        let [w, h] = self.resolution;
        if w == 0 || h == 0 || w.saturating_mul(h) > MAX_PIXELS {
            return Err(bad("resolution", format!("need 1 <= w*h <= {MAX_PIXELS}")));
        }
        if self.samples == 0 {
            return Err(bad("samples", "must be positive"));
        }
        let expect_keys = |section: &str, have: &BTreeMap<String, f64>, want: BTreeSet<&str>| -> Result<()> {
            for k in have.keys() {
                if !want.contains(k.as_str()) {
                    return Err(bad(format!("{section}.{k}"), "unknown key for this scenario"));
                }
            }
            for k in want {
                match have.get(k) {
                    None => return Err(bad(format!("{section}.{k}"), "missing")),
                    Some(v) if v.is_nan() => return Err(bad(format!("{section}.{k}"), "NaN")),
                    _ => {}
                }
            }
            Ok(())
        };
        expect_keys("thresholds", &self.thresholds, def.checks.iter().map(|c| c.metric).collect())?;
        expect_keys("params", &self.params, def.params.iter().map(|(k, _)| *k).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<")]
    Lt,
}

impl Op {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Op::Le => value <= threshold,
            Op::Ge => value >= threshold,
            Op::Lt => value < threshold,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CheckDef {
    pub metric: &'static str,
    pub op: Op,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub metric: String,
    pub op: Op,
    pub threshold: f64,
    #[serde(with = "metrics::value")]
    pub value: f64,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario_id: String,
    /// The statement under test, in mathematical notation.
    pub statement: String,
    pub verdict: Verdict,
    #[serde(with = "metrics::map")]
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
    /// SHA-256 of each raster's run-length JSON.
    pub fingerprints: BTreeMap<String, String>,
    pub config_echo: Config,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// State handed to a scenario body.
pub(crate) struct Ctx<'a> {
    pub cfg: &'a Config,
    id: &'static str,
    out_dir: Option<&'a Path>,
    metrics: BTreeMap<String, f64>,
    artifacts: Vec<String>,
    fingerprints: BTreeMap<String, String>,
}

impl Ctx<'_> {
    pub fn param(&self, key: &str) -> f64 {
        self.cfg.params[key]
    }

    pub fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.to_string(), value);
    }

    fn artifact_path(&self, name: &str) -> Option<PathBuf> {
        self.out_dir.map(|d| d.join(format!("{}_{}", self.id, name)))
    }

    pub fn raster(&mut self, name: &str, r: &Raster) -> Result<()> {
        let json = r.to_json()?;
        self.fingerprints.insert(name.to_string(), hex(&Sha256::digest(json.as_bytes())));
        if let Some(path) = self.artifact_path(&format!("{name}.json")) {
            fs::write(&path, json)?;
            self.artifacts.push(path.display().to_string());
            let png = self.artifact_path(&format!("{name}.png")).expect("out dir present");
            render(r, Palette::Heat, &png)?;
            self.artifacts.push(png.display().to_string());
        }
        Ok(())
    }

    pub fn text(&mut self, name: &str, content: &str) -> Result<()> {
        if let Some(path) = self.artifact_path(name) {
            fs::write(&path, content)?;
            self.artifacts.push(path.display().to_string());
        }
        Ok(())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn scenario(id: &str) -> Result<&'static ScenarioDef> {
    catalog().iter().find(|d| d.id == id).ok_or_else(|| Error::UnknownScenario(id.to_string()))
}

pub fn scenario_ids() -> Vec<&'static str> {
    catalog().iter().map(|d| d.id).collect()
}

pub fn default_config(id: &str) -> Result<Config> {
    Ok(scenario(id)?.default_config())
}

/// Defaults for `id` with `overrides` merged in and validated.
pub fn resolve_config(id: &str, overrides: Option<&Value>) -> Result<Config> {
    let def = scenario(id)?;
    let mut cfg = def.default_config();
    if let Some(v) = overrides {
        cfg.apply_overrides(v)?;
    }
    cfg.validate_for(def)?;
    Ok(cfg)
}

/// Resolves one override object against every scenario. Threshold and
/// parameter keys apply only where the scenario defines them, but each must
/// be known to at least one scenario.
pub fn resolve_all(overrides: Option<&Value>) -> Result<Vec<(&'static str, Config)>> {
    let Some(v) = overrides else {
        return Ok(catalog().iter().map(|d| (d.id, d.default_config())).collect());
    };
    let obj = v.as_object().ok_or_else(|| bad("<root>", "expected a JSON object"))?;
    for section in ["thresholds", "params"] {
        let Some(entries) = obj.get(section) else { continue };
        let entries = entries.as_object().ok_or_else(|| bad(section, "expected an object"))?;
        for k in entries.keys() {
            let known = catalog().iter().any(|d| {
                let cfg = d.default_config();
                let map = if section == "params" { &cfg.params } else { &cfg.thresholds };
                map.contains_key(k)
            });
            if !known {
                return Err(bad(format!("{section}.{k}"), "unknown key"));
            }
        }
    }
    catalog()
        .iter()
        .map(|d| {
            let base = d.default_config();
            let mut local = obj.clone();
            for (section, map) in [("thresholds", &base.thresholds), ("params", &base.params)] {
                if let Some(Value::Object(entries)) = local.get_mut(section) {
                    entries.retain(|k, _| map.contains_key(k));
                }
            }
            Ok((d.id, resolve_config(d.id, Some(&Value::Object(local)))?))
        })
        .collect()
}

fn evaluate(defs: &[CheckDef], cfg: &Config, metrics: &BTreeMap<String, f64>) -> (Vec<Check>, Verdict) {
    let checks: Vec<Check> = defs
        .iter()
        .map(|s| {
            let threshold = cfg.thresholds[s.metric];
            let value = metrics.get(s.metric).copied().unwrap_or(f64::NAN);
            Check { metric: s.metric.to_string(), op: s.op, threshold, value, passed: s.op.holds(value, threshold) }
        })
        .collect();
    let verdict = if checks.iter().all(|c| c.passed) {
        Verdict::Pass
    } else if checks.iter().any(|c| !c.passed && !c.value.is_nan()) {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    (checks, verdict)
}

/// Runs one scenario. With `out_dir`, rasters (JSON and PNG), auxiliary
/// files and `<id>.report.json` are written there.
pub fn run_scenario(id: &str, config: &Config, out_dir: Option<&Path>) -> Result<ScenarioReport> {
    let def = scenario(id)?;
    config.validate_for(def)?;
    if let Some(d) = out_dir {
        fs::create_dir_all(d)?;
    }
    let mut ctx = Ctx {
        cfg: config,
        id: def.id,
        out_dir,
        metrics: BTreeMap::new(),
        artifacts: Vec::new(),
        fingerprints: BTreeMap::new(),
    };
    (def.run)(&mut ctx)?;
    let (checks, verdict) = evaluate(def.checks, config, &ctx.metrics);
    let report = ScenarioReport {
        scenario_id: def.id.to_string(),
        statement: def.statement.to_string(),
        verdict,
        metrics: ctx.metrics,
        checks,
        artifacts: ctx.artifacts,
        fingerprints: ctx.fingerprints,
        config_echo: config.clone(),
    };
    if let Some(d) = out_dir {
        fs::write(d.join(format!("{}.report.json", def.id)), serde_json::to_string_pretty(&report)?)?;
    }
    Ok(report)
}

/// Runs scenarios on a pool of `jobs` threads, preserving input order.
pub fn run_many(runs: &[(&str, Config)], out_dir: Option<&Path>, jobs: usize) -> Result<Vec<Result<ScenarioReport>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(pool.install(|| {
        if jobs <= 1 {
            runs.iter().map(|(id, cfg)| run_scenario(id, cfg, out_dir)).collect()
        } else {
            runs.par_iter().map(|(id, cfg)| run_scenario(id, cfg, out_dir)).collect()
        }
    }))
}
