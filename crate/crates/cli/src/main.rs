use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde_json::Value;

use semiesc_core::conjugacy::conjugate_semigroup;
use semiesc_core::escape::{classify_orbit_traced, compute_grid, DEFAULT_DEPTH};
use semiesc_core::harness::{resolve_all, resolve_config, run_many, Verdict};
use semiesc_core::render::{render, Palette};
use semiesc_core::topology::{connected_components, label_mask, mask_of, Connectivity};
use semiesc_core::{AffineMap, Budget, Cell, ComplexValue, EntireMap, Raster, Semigroup, Subject, Window};

#[derive(Parser)]
#[command(name = "semiesc", version, about = "Escaping-set experiments for semigroups of entire maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a window and write an image.
    Render {
        /// Map as inline JSON or a path to a JSON file.
        #[arg(long, conflicts_with = "semigroup", required_unless_present = "semigroup")]
        map: Option<String>,
        /// Semigroup as inline JSON or a path; classified over all branches.
        #[arg(long)]
        semigroup: Option<String>,
        #[arg(long, default_value = "-4,4,-4,4", allow_hyphen_values = true)]
        window: String,
        #[arg(long, default_value = "256x256")]
        size: String,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long, default_value = "heat")]
        palette: Palette,
        /// Output image; a `.ppm` extension writes PPM, anything else PNG.
        #[arg(long)]
        out: PathBuf,
        /// Also write the run-length raster JSON here.
        #[arg(long)]
        raster_json: Option<PathBuf>,
    },
    /// Run catalog scenarios.
    Verify {
        /// Scenario id, or `all`.
        id: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Print full reports as JSON instead of one line per scenario.
        #[arg(long)]
        json: bool,
    },
    /// Iterate one map from one point.
    Orbit {
        #[arg(long)]
        map: String,
        /// Start point as `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, default_value_t = 200)]
        iters: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Connected components of a raster's cells.
    Components {
        #[arg(long)]
        raster: PathBuf,
        /// 4 or 8.
        #[arg(long, default_value_t = 8)]
        connectivity: u8,
        /// E, B or U.
        #[arg(long, default_value = "E")]
        cell: char,
    },
    /// Conjugate every generator of a semigroup by `z ↦ αz + β`.
    Conjugate {
        #[arg(long)]
        semigroup: String,
        /// `alpha,beta`; each may be complex, e.g. `2,1` or `1+1i,0`.
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
    },
}

/// Inline JSON when it parses, otherwise the contents of a file.
fn json_arg(arg: &str) -> Result<Value> {
    if let Ok(v) = serde_json::from_str(arg) {
        return Ok(v);
    }
    let text = fs::read_to_string(arg).with_context(|| format!("{arg:?} is neither JSON nor a readable file"))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {arg}"))
}

fn parse_floats(s: &str, n: usize, what: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("bad {what} {s:?}"))?;
    if parts.len() != n {
        bail!("{what} needs {n} comma-separated numbers, got {s:?}");
    }
    Ok(parts)
}

fn parse_size(s: &str) -> Result<(usize, usize)> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| anyhow!("size must look like 256x256"))?;
    Ok((w.trim().parse()?, h.trim().parse()?))
}

fn parse_complex(s: &str) -> Result<Complex64> {
    s.trim().parse::<Complex64>().map_err(|_| anyhow!("bad complex number {s:?}"))
}

fn num(v: f64) -> String {
    if v == 0.0 || (1e-3..1e6).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn verify(id: &str, config: Option<&Path>, out_dir: Option<&Path>, jobs: usize, json: bool) -> Result<ExitCode> {
    let overrides = config
        .map(|p| -> Result<Value> { serde_json::from_str(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?).context("config file") })
        .transpose()?;
    let runs = if id == "all" { resolve_all(overrides.as_ref())? } else { vec![(id, resolve_config(id, overrides.as_ref())?)] };
    let results = run_many(&runs, out_dir, jobs)?;
    let mut reports = Vec::new();
    for r in results {
        reports.push(r?);
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&reports)?);
    } else {
        for r in &reports {
            let verdict = match r.verdict {
                Verdict::Pass => "PASS",
                Verdict::Fail => "FAIL",
                Verdict::Inconclusive => "INCONCLUSIVE",
            };
            let checks: Vec<String> = r
                .checks
                .iter()
                .map(|c| format!("{}={} ({} {})", c.metric, num(c.value), serde_json::to_value(c.op).unwrap_or_default().as_str().unwrap_or("?"), num(c.threshold)))
                .collect();
            println!("{verdict:<12} {:<28} {}", r.scenario_id, checks.join(", "));
        }
    }
    Ok(if reports.iter().all(|r| r.passed()) { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Render { map, semigroup, window, size, depth, max_iter, palette, out, raster_json } => {
            let subject = match (map, semigroup) {
                (Some(m), _) => Subject::Map(serde_json::from_value::<EntireMap>(json_arg(&m)?)?),
                (None, Some(g)) => Subject::Semigroup(serde_json::from_value::<Semigroup>(json_arg(&g)?)?),
                (None, None) => bail!("one of --map or --semigroup is required"),
            };
            let w = parse_floats(&window, 4, "window")?;
            let window = Window::new(w[0], w[1], w[2], w[3])?;
            let (width, height) = parse_size(&size)?;
            let budget = max_iter.map_or(Budget::default(), |n| Budget::default().with_max_iter(n));
            let raster = compute_grid(&subject, window, width, height, depth, &budget)?;
            render(&raster, palette, &out)?;
            if let Some(p) = raster_json {
                fs::write(&p, raster.to_json()?).with_context(|| format!("writing {}", p.display()))?;
            }
            eprintln!("ESC {} BND {} UND {}", raster.count(Cell::Esc), raster.count(Cell::Bnd), raster.count(Cell::Und));
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { id, config, out_dir, jobs, json } => verify(&id, config.as_deref(), out_dir.as_deref(), jobs, json),
        Command::Orbit { map, z, iters, csv } => {
            let f: EntireMap = serde_json::from_value(json_arg(&map)?)?;
            let z = parse_floats(&z, 2, "z")?;
            let z = Complex64::new(z[0], z[1]);
            let budget = Budget::default().with_max_iter(iters);
            budget.validate()?;
            let record = classify_orbit_traced(&f, ComplexValue::Finite(z), &budget);
            if let Some(path) = csv {
                let mut text = String::from("n,re,im,modulus\n");
                for (n, w) in f.orbit(z, iters).iter().enumerate() {
                    match w.finite() {
                        Some(w) => text.push_str(&format!("{n},{},{},{}\n", w.re, w.im, w.norm())),
                        None => text.push_str(&format!("{n},nan,nan,inf\n")),
                    }
                }
                fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            }
            println!("{}", serde_json::to_string(&record)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Components { raster, connectivity, cell } => {
            let r: Raster = serde_json::from_str(&fs::read_to_string(&raster).with_context(|| format!("reading {}", raster.display()))?)?;
            let conn = Connectivity::try_from(connectivity)?;
            let cell = Cell::from_code(cell.to_ascii_uppercase()).ok_or_else(|| anyhow!("cell must be E, B or U"))?;
            let cs = if cell == Cell::Esc { connected_components(&r, conn) } else { label_mask(&mask_of(&r, cell), r.width, r.height, conn) };
            println!("{}", serde_json::to_string_pretty(&cs)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Conjugate { semigroup, phi } => {
            let g: Semigroup = serde_json::from_value(json_arg(&semigroup)?)?;
            let (alpha, beta) = phi.split_once(',').ok_or_else(|| anyhow!("phi must be alpha,beta"))?;
            let phi = AffineMap::new(parse_complex(alpha)?, parse_complex(beta)?)?;
            println!("{}", serde_json::to_string_pretty(&conjugate_semigroup(&g, &phi)?)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
