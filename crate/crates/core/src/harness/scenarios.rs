//! The built-in scenario catalog.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{CheckDef, Config, Ctx, Op};
use crate::conjugacy::{equivariance_check, sample_window};
use crate::error::{Error, Result};
use crate::escape::{classify_branches, compute_grid, forward_invariance_check, BranchStatus, Budget, Cell, Raster, Subject, Window};
use crate::maps::{AffineMap, ComplexValue, EntireMap};
use crate::postsingular::{
    is_hyperbolic_proxy, is_postsingularly_finite_proxy, postsingular_power_check, postsingular_translation_check,
    singular_orbits, Aggregate, ProxyVerdict,
};
use crate::topology::{boundary, dilate4, hausdorff_px, label_mask, mask_of, Connectivity, PixelSet};
use crate::words::{eval_normal_form, eval_word, normal_form, Semigroup, Word};

/// A catalog entry: defaults, thresholds and the experiment that fills in metrics.
pub struct ScenarioDef {
    pub id: &'static str,
    pub statement: &'static str,
    pub window: [f64; 4],
    pub resolution: [usize; 2],
    pub depth: usize,
    pub samples: usize,
    pub params: &'static [(&'static str, f64)],
    pub checks: &'static [CheckDef],
    pub(crate) run: fn(&mut Ctx) -> Result<()>,
}

impl ScenarioDef {
    pub fn default_config(&self) -> Config {
        let [a, b, c, d] = self.window;
        Config {
            budget: Budget::default(),
            depth: self.depth,
            window: Window::new(a, b, c, d).expect("catalog windows are valid"),
            resolution: self.resolution,
            seed: 0,
            samples: self.samples,
            thresholds: self.checks.iter().map(|c| (c.metric.to_string(), c.threshold)).collect(),
            params: self.params.iter().map(|&(k, v)| (k.to_string(), v)).collect::<BTreeMap<_, _>>(),
        }
    }
}

const fn le(metric: &'static str, threshold: f64) -> CheckDef {
    CheckDef { metric, op: Op::Le, threshold }
}

const fn ge(metric: &'static str, threshold: f64) -> CheckDef {
    CheckDef { metric, op: Op::Ge, threshold }
}

const fn lt(metric: &'static str, threshold: f64) -> CheckDef {
    CheckDef { metric, op: Op::Lt, threshold }
}

const SQUARE4: [f64; 4] = [-4.0, 4.0, -4.0, 4.0];
const SQUARE8: [f64; 4] = [-8.0, 8.0, -8.0, 8.0];

const FAMILY_SWEEP: &[(&str, f64)] = &[
    ("exponent_re_min", -3.0),
    ("exponent_re_max", -0.1),
    ("exponent_im_max", PI),
    ("constant_re_min", 1.0),
    ("constant_re_max", 3.0),
    ("constant_im_max", 3.0),
    ("z_re_max", 10.0),
    ("z_im_max", 10.0),
];

const EXP_G: &[(&str, f64)] = &[("lambda_re", 1.0), ("lambda_im", 0.0), ("s", 1.0)];

const CONJ_PARAMS: &[(&str, f64)] = &[
    ("lambda_re", 1.0),
    ("lambda_im", 0.0),
    ("s", 1.0),
    ("phi_alpha_re", 2.0),
    ("phi_alpha_im", 0.0),
    ("phi_beta_re", 1.0),
    ("phi_beta_im", 0.0),
];

static CATALOG: &[ScenarioDef] = &[
    ScenarioDef {
        id: "lemma_F_bound",
        statement: "f = e^{-z+λ}+ξ, Re λ<0, Re ξ≥1, Re z>0 ⇒ |f^k(z)| ≤ 1+|ξ| for all k≥1",
        window: SQUARE4,
        resolution: [1, 1],
        depth: 6,
        samples: 10_000,
        params: FAMILY_SWEEP,
        checks: &[le("max_excess", 1e-9)],
        run: |ctx| halfplane_family_sweep(ctx, &[false]),
    },
    ScenarioDef {
        id: "lemma_Fprime_bound",
        statement: "f = e^{z+μ}+ζ, Re μ<0, Re ζ≤−1, Re z<0 ⇒ |f^k(z)| ≤ 1+|ζ| for all k≥1",
        window: SQUARE4,
        resolution: [1, 1],
        depth: 6,
        samples: 10_000,
        params: FAMILY_SWEEP,
        checks: &[le("max_excess", 1e-9)],
        run: |ctx| halfplane_family_sweep(ctx, &[true]),
    },
    ScenarioDef {
        id: "halfplane_invariance",
        statement: "f({Re z>0}) ⊂ {Re z>0} for f∈F and f({Re z<0}) ⊂ {Re z<0} for f∈F′",
        window: SQUARE4,
        resolution: [1, 1],
        depth: 6,
        samples: 10_000,
        params: FAMILY_SWEEP,
        checks: &[le("halfplane_violations", 0.0)],
        run: |ctx| halfplane_family_sweep(ctx, &[false, true]),
    },
    ScenarioDef {
        id: "empty_IG",
        statement: "G = [e^{-z+λ}+ξ, e^{z+μ}+ζ] with both generators in F, F′ ⇒ I(G) = ∅",
        window: SQUARE8,
        resolution: [512, 512],
        depth: 6,
        samples: 1,
        params: &[
            ("lambda_re", -0.5),
            ("lambda_im", 0.0),
            ("xi_re", 1.0),
            ("xi_im", 0.0),
            ("mu_re", -0.5),
            ("mu_im", 0.0),
            ("zeta_re", -1.0),
            ("zeta_im", 0.0),
        ],
        checks: &[le("overlap_pixels", 0.0), le("esc_G_pixels", 0.0)],
        run: empty_ig,
    },
    ScenarioDef {
        id: "IG_equals_If_exp",
        statement: "G = [e^{λz}, e^{λz}+2πi/λ] ⇒ I(G) = I(f) ≠ ∅",
        window: SQUARE4,
        resolution: [256, 256],
        depth: 6,
        samples: 1,
        params: EXP_G,
        checks: &[ge("agreement", 0.99), ge("esc_pixels", 1.0)],
        run: |ctx| {
            let f = EntireMap::exp_lambda(lambda(ctx))?;
            raster_equality(ctx, f)
        },
    },
    ScenarioDef {
        id: "IG_equals_If_sine",
        statement: "G = [λ sin z, λ sin z + 2π] ⇒ I(G) = I(f) ≠ ∅",
        window: SQUARE4,
        resolution: [256, 256],
        depth: 6,
        samples: 1,
        params: &[("lambda_re", 3.0), ("lambda_im", 0.0), ("s", 1.0)],
        checks: &[ge("agreement", 0.99), ge("esc_pixels", 1.0)],
        run: |ctx| {
            let f = EntireMap::sine_affine(lambda(ctx), Complex64::new(0.0, 0.0))?;
            raster_equality(ctx, f)
        },
    },
    ScenarioDef {
        id: "periodic_translate_identity",
        statement: "g = f^s + c with f(z+c) = f(z) ⇒ f^l∘g^m = f^{l+ms}, g^m∘f^l = f^{l+ms} + c",
        window: SQUARE4,
        resolution: [1, 1],
        depth: 6,
        samples: 100,
        params: &[
            ("lambda_re", 1.0),
            ("lambda_im", 0.0),
            ("s", 2.0),
            ("words", 100.0),
            ("max_len", 6.0),
            ("radius", 2.0),
            ("exclude_modulus", 1e8),
        ],
        checks: &[le("max_rel_deviation", 1e-9), ge("retained_fraction", 0.8)],
        run: periodic_translate_identity,
    },
    ScenarioDef {
        id: "unbounded_components",
        statement: "G = [e^z, e^z+2πi] ⇒ every component of I(G) is unbounded",
        window: SQUARE4,
        resolution: [512, 512],
        depth: 6,
        samples: 1,
        params: EXP_G,
        checks: &[le("bounded_components", 0.0)],
        run: unbounded_components,
    },
    ScenarioDef {
        id: "psb_example",
        statement: "f = e^{λz}, λ > 1/e ⇒ f^n(0) → ∞, f is not postsingularly bounded and F(f) = ∅",
        window: SQUARE4,
        resolution: [128, 128],
        depth: 6,
        samples: 1,
        params: &[("lambda_re", 1.0), ("lambda_im", 0.0)],
        checks: &[le("postsingularly_bounded", 0.0), le("bnd_pixels", 0.0)],
        run: psb_example,
    },
    ScenarioDef {
        id: "psf_inheritance",
        statement: "P(f^k) = P(f) for k ≥ 1; P(f) finite ⇒ P(f^k) finite",
        window: SQUARE4,
        resolution: [1, 1],
        depth: 6,
        samples: 1,
        params: &[("lambda_re", 0.25), ("lambda_im", 0.0), ("cycle_tol", 1e-8), ("k_max", 4.0)],
        checks: &[le("power_max_deviation", 1e-9), ge("psf_proxy_powers", 4.0)],
        run: psf_inheritance,
    },
    ScenarioDef {
        id: "hyperbolic_translation",
        statement: "g = f^s + c with c a period of f ⇒ P(g) = P(f) + c; e^{z/4} has an attracting fixed point q = e^{q/4}",
        window: SQUARE4,
        resolution: [1, 1],
        depth: 6,
        samples: 1,
        params: &[("lambda_re", 0.25), ("lambda_im", 0.0), ("cycle_tol", 1e-8), ("s_max", 3.0)],
        checks: &[ge("hyperbolic", 1.0), le("multiplier_error", 1e-6), le("translation_max_deviation", 1e-9)],
        run: hyperbolic_translation,
    },
    ScenarioDef {
        id: "forward_invariance",
        statement: "h(I(G)) ⊂ I(G) for every h ∈ G",
        window: SQUARE4,
        resolution: [1, 1],
        depth: 6,
        samples: 500,
        params: EXP_G,
        checks: &[ge("escaping_samples", 500.0), le("violations", 0.0)],
        run: forward_invariance,
    },
    ScenarioDef {
        id: "boundary_julia",
        statement: "J(G) = ∂I(G), with J(G) = closure(I(G))",
        window: SQUARE4,
        resolution: [256, 256],
        depth: 6,
        samples: 1,
        params: EXP_G,
        checks: &[le("hausdorff_px", 2.0)],
        run: boundary_julia,
    },
    ScenarioDef {
        id: "escape_in_julia",
        statement: "I(G) ⊂ J(G)",
        window: SQUARE4,
        resolution: [256, 256],
        depth: 6,
        samples: 1,
        params: EXP_G,
        checks: &[le("esc_outside_julia", 0.0)],
        run: escape_in_julia,
    },
    ScenarioDef {
        id: "closure_no_bounded",
        statement: "closure(I(G)) has no bounded components",
        window: SQUARE4,
        resolution: [256, 256],
        depth: 6,
        samples: 1,
        params: EXP_G,
        checks: &[le("bounded_components", 0.0)],
        run: closure_no_bounded,
    },
    ScenarioDef {
        id: "conjugacy_equivariance",
        statement: "G′ = φ∘G∘φ^{-1} ⇒ φ(closure I(G)) = closure I(G′)",
        window: SQUARE4,
        resolution: [1, 1],
        depth: 6,
        samples: 10_000,
        params: CONJ_PARAMS,
        checks: &[ge("agreement", 0.995), lt("und_fraction", 0.1)],
        run: conjugacy_equivariance,
    },
];

pub fn catalog() -> &'static [ScenarioDef] {
    CATALOG
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn lambda(ctx: &Ctx) -> Complex64 {
    c(ctx.param("lambda_re"), ctx.param("lambda_im"))
}

fn count_param(ctx: &Ctx, key: &str) -> Result<usize> {
    let v = ctx.param(key);
    if v.fract() != 0.0 || !(1.0..=1e9).contains(&v) {
        return Err(Error::InvalidConfig { key: format!("params.{key}"), reason: "expected a positive integer".into() });
    }
    Ok(v as usize)
}

/// `[e^{λz}, e^{λz·s} + 2πi/λ]`.
fn exp_semigroup(ctx: &Ctx) -> Result<Semigroup> {
    let l = lambda(ctx);
    let s = count_param(ctx, "s")? as u32;
    Semigroup::periodic_translate(EntireMap::exp_lambda(l)?, s, c(0.0, TAU) / l)
}

fn grid(ctx: &Ctx, subject: &Subject) -> Result<Raster> {
    let cfg = ctx.cfg;
    let [w, h] = cfg.resolution;
    compute_grid(subject, cfg.window, w, h, cfg.depth, &cfg.budget)
}

fn count(r: &Raster, cell: Cell) -> f64 {
    r.count(cell) as f64
}

fn halfplane_family_sweep(ctx: &mut Ctx, mirrors: &[bool]) -> Result<()> {
    let p = |k: &str| ctx.param(k);
    let (cfg, iters) = (ctx.cfg, ctx.cfg.budget.max_iter);
    let mut max_excess = f64::NEG_INFINITY;
    let mut violations = 0usize;
    let mut min_margin = f64::INFINITY;
    for (idx, &mirror) in mirrors.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(idx as u64));
        for _ in 0..cfg.samples {
            let shift = c(rng.random_range(p("exponent_re_min")..=p("exponent_re_max")), rng.random_range(-p("exponent_im_max")..=p("exponent_im_max")));
            let constant = c(rng.random_range(p("constant_re_min")..=p("constant_re_max")), rng.random_range(-p("constant_im_max")..=p("constant_im_max")));
            let x = p("z_re_max") * (1.0 - rng.random::<f64>());
            let y = rng.random_range(-p("z_im_max")..=p("z_im_max"));
            let (f, z, sign) = if mirror {
                (EntireMap::exp_affine(c(1.0, 0.0), shift, -constant.conj())?, c(-x, y), -1.0)
            } else {
                (EntireMap::exp_affine(c(-1.0, 0.0), shift, constant)?, c(x, y), 1.0)
            };
            let bound = 1.0 + constant.norm();
            for w in f.orbit(z, iters).into_iter().skip(1) {
                max_excess = max_excess.max(w.modulus() - bound);
                match w.finite() {
                    Some(w) if sign * w.re > 0.0 => min_margin = min_margin.min(sign * w.re),
                    _ => violations += 1,
                }
            }
        }
    }
    ctx.metric("orbits", (cfg.samples * mirrors.len()) as f64);
    ctx.metric("iterations", iters as f64);
    ctx.metric("max_excess", max_excess);
    ctx.metric("halfplane_violations", violations as f64);
    ctx.metric("min_halfplane_margin", min_margin);
    Ok(())
}

/// Fraction of ESC pixels inside the strips where the exponential term
/// pushes orbits across the imaginary axis.
fn strip_fraction(r: &Raster, inside: impl Fn(Complex64) -> bool) -> f64 {
    let mut esc = 0usize;
    let mut hit = 0usize;
    for j in 0..r.height {
        for i in 0..r.width {
            if r.get(i, j) == Cell::Esc {
                esc += 1;
                hit += usize::from(inside(r.window.pixel_center(i, j, r.width, r.height)));
            }
        }
    }
    if esc == 0 {
        f64::NAN
    } else {
        hit as f64 / esc as f64
    }
}

fn empty_ig(ctx: &mut Ctx) -> Result<()> {
    let lam = c(ctx.param("lambda_re"), ctx.param("lambda_im"));
    let mu = c(ctx.param("mu_re"), ctx.param("mu_im"));
    let f = EntireMap::exp_affine(c(-1.0, 0.0), lam, c(ctx.param("xi_re"), ctx.param("xi_im")))?;
    let g = EntireMap::exp_affine(c(1.0, 0.0), mu, c(ctx.param("zeta_re"), ctx.param("zeta_im")))?;
    let rf = grid(ctx, &Subject::Map(f.clone()))?;
    let rg = grid(ctx, &Subject::Map(g.clone()))?;
    let rs = grid(ctx, &Subject::Semigroup(Semigroup::new(vec![f, g])?))?;
    let overlap = rf.cells.iter().zip(&rg.cells).filter(|(a, b)| **a == Cell::Esc && **b == Cell::Esc).count();
    let mod_2pi = |t: f64| t.rem_euclid(TAU);
    let f_strip = |z: Complex64| z.re < 0.0 && (PI / 2.0..1.5 * PI).contains(&mod_2pi(z.im - lam.im));
    let g_strip = |z: Complex64| z.re > 0.0 && mod_2pi(z.im + mu.im + PI / 2.0) < PI;
    ctx.metric("overlap_pixels", overlap as f64);
    ctx.metric("esc_f_pixels", count(&rf, Cell::Esc));
    ctx.metric("esc_g_pixels", count(&rg, Cell::Esc));
    ctx.metric("esc_G_pixels", count(&rs, Cell::Esc));
    ctx.metric("und_G_pixels", count(&rs, Cell::Und));
    ctx.metric("esc_f_strip_fraction", strip_fraction(&rf, f_strip));
    ctx.metric("esc_g_strip_fraction", strip_fraction(&rg, g_strip));
    ctx.raster("f", &rf)?;
    ctx.raster("g", &rg)?;
    ctx.raster("G", &rs)
}

/// ESC agreement between `[f, f^s + p]` and `f`, where `p` is the period of `f`.
fn raster_equality(ctx: &mut Ctx, f: EntireMap) -> Result<()> {
    let period = f.period().ok_or(Error::NotStructured)?;
    let s = count_param(ctx, "s")? as u32;
    let g = Semigroup::periodic_translate(f.clone(), s, period)?;
    let rf = grid(ctx, &Subject::Map(f))?;
    let rg = grid(ctx, &Subject::Semigroup(g))?;
    let agree = rf.cells.iter().zip(&rg.cells).filter(|(a, b)| (**a == Cell::Esc) == (**b == Cell::Esc)).count();
    ctx.metric("agreement", agree as f64 / rf.cells.len() as f64);
    ctx.metric("esc_pixels", count(&rg, Cell::Esc));
    ctx.metric("esc_f_pixels", count(&rf, Cell::Esc));
    ctx.metric("und_pixels", count(&rg, Cell::Und));
    ctx.raster("f", &rf)?;
    ctx.raster("G", &rg)
}

fn periodic_translate_identity(ctx: &mut Ctx) -> Result<()> {
    let l = lambda(ctx);
    let s = count_param(ctx, "s")? as u32;
    let n_words = count_param(ctx, "words")?;
    let max_len = count_param(ctx, "max_len")?;
    let g = Semigroup::periodic_translate(EntireMap::exp_lambda(l)?, s, c(0.0, TAU) / l)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    let words: Vec<Word> = (0..n_words)
        .map(|_| {
            let len = rng.random_range(1..=max_len);
            Word::new((0..len).map(|_| rng.random_range(0..2)).collect::<Vec<_>>())
        })
        .collect();
    let radius = ctx.param("radius");
    let points: Vec<Complex64> = (0..ctx.cfg.samples)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            Complex64::from_polar(r, TAU * rng.random::<f64>())
        })
        .collect();
    let cap = ctx.param("exclude_modulus");
    let (mut kept, mut worst) = (0usize, 0.0f64);
    for w in &words {
        let nf = normal_form(&g, w)?;
        for &z in &points {
            let a = eval_word(&g, w, ComplexValue::Finite(z))?;
            let b = eval_normal_form(&g, nf, ComplexValue::Finite(z))?;
            let (Some(a), Some(b)) = (a.finite(), b.finite()) else { continue };
            if a.norm() > cap || b.norm() > cap {
                continue;
            }
            kept += 1;
            worst = worst.max((a - b).norm() / (1.0 + a.norm()));
        }
    }
    let trials = words.len() * points.len();
    ctx.metric("trials", trials as f64);
    ctx.metric("retained", kept as f64);
    ctx.metric("retained_fraction", kept as f64 / trials as f64);
    ctx.metric("max_rel_deviation", worst);
    Ok(())
}

fn unbounded_components(ctx: &mut Ctx) -> Result<()> {
    let r = grid(ctx, &Subject::Semigroup(exp_semigroup(ctx)?))?;
    let cs = label_mask(&mask_of(&r, Cell::Esc), r.width, r.height, Connectivity::Eight);
    let bounded = cs.components.iter().filter(|c| !c.touches_border).count();
    ctx.metric("components", cs.components.len() as f64);
    ctx.metric("bounded_components", bounded as f64);
    ctx.metric("esc_pixels", count(&r, Cell::Esc));
    ctx.metric("und_pixels", count(&r, Cell::Und));
    ctx.text("components.json", &serde_json::to_string_pretty(&cs)?)?;
    ctx.raster("G", &r)
}

fn psb_example(ctx: &mut Ctx) -> Result<()> {
    let f = EntireMap::exp_lambda(lambda(ctx))?;
    let verdict = singular_orbits(&f, &ctx.cfg.budget)?;
    let escape_step = verdict.orbits.iter().find_map(|o| match o.record.status {
        crate::escape::OrbitStatus::Escaped { step } => Some(step as f64),
        _ => None,
    });
    ctx.metric("postsingularly_bounded", f64::from(u8::from(verdict.aggregate == Aggregate::Bounded)));
    ctx.metric("singular_escape_step", escape_step.unwrap_or(f64::NAN));
    let r = grid(ctx, &Subject::Map(f))?;
    ctx.metric("bnd_pixels", count(&r, Cell::Bnd));
    ctx.metric("esc_pixels", count(&r, Cell::Esc));
    ctx.raster("f", &r)
}

fn psf_inheritance(ctx: &mut Ctx) -> Result<()> {
    let f = EntireMap::exp_lambda(lambda(ctx))?;
    let b = ctx.cfg.budget;
    let tol = ctx.param("cycle_tol");
    let k_max = count_param(ctx, "k_max")? as u32;
    let proxy = |m: &EntireMap| is_postsingularly_finite_proxy(m, &b, tol).map(|v| v == ProxyVerdict::Yes);
    let base_finite = proxy(&f)?;
    let mut worst = 0.0f64;
    let mut inherited = 0usize;
    for k in 1..=k_max {
        worst = worst.max(postsingular_power_check(&f, k, &b)?.max_deviation);
        let power = EntireMap::iter_translate(f.clone(), k, c(0.0, 0.0))?;
        inherited += usize::from(proxy(&power)?);
    }
    ctx.metric("power_max_deviation", worst);
    ctx.metric("psf_proxy", f64::from(u8::from(base_finite)));
    ctx.metric("psf_proxy_powers", inherited as f64);
    ctx.metric("postsingularly_bounded", f64::from(u8::from(singular_orbits(&f, &b)?.aggregate == Aggregate::Bounded)));
    Ok(())
}

/// Real root of `q = e^{λq}` below `1/λ`, by bisection.
fn attracting_fixed_point(lambda: f64) -> f64 {
    let h = |q: f64| (lambda * q).exp() - q;
    let (mut lo, mut hi) = (0.0, 1.0 / lambda);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn hyperbolic_translation(ctx: &mut Ctx) -> Result<()> {
    let l = lambda(ctx);
    let f = EntireMap::exp_lambda(l)?;
    let b = ctx.cfg.budget;
    let report = is_hyperbolic_proxy(&f, &b, ctx.param("cycle_tol"))?;
    let multiplier = report.cycles.first().and_then(|c| c.as_ref()).map_or(f64::NAN, |c| c.multiplier);
    ctx.metric("hyperbolic", f64::from(u8::from(report.verdict == ProxyVerdict::Yes)));
    ctx.metric("multiplier", multiplier);
    if l.im == 0.0 && l.re > 0.0 && l.re < (-1.0f64).exp() {
        let expected = l.re * attracting_fixed_point(l.re);
        ctx.metric("expected_multiplier", expected);
        ctx.metric("multiplier_error", (multiplier - expected).abs());
    } else {
        ctx.metric("multiplier_error", f64::NAN);
    }
    let period = f.period().ok_or(Error::NotStructured)?;
    let mut worst = 0.0f64;
    for s in 1..=count_param(ctx, "s_max")? as u32 {
        worst = worst.max(postsingular_translation_check(&f, s, period, &b)?.max_deviation);
    }
    ctx.metric("translation_max_deviation", worst);
    Ok(())
}

fn forward_invariance(ctx: &mut Ctx) -> Result<()> {
    let g = exp_semigroup(ctx)?;
    let cfg = ctx.cfg;
    let candidates = sample_window(&cfg.window, cfg.samples.saturating_mul(20), cfg.seed);
    let escaping: Vec<bool> = candidates
        .par_iter()
        .map(|&z| Ok(classify_branches(&g, ComplexValue::Finite(z), cfg.depth, &cfg.budget)?.status == BranchStatus::AllBranchesEscape))
        .collect::<Result<_>>()?;
    let samples: Vec<ComplexValue> = candidates
        .iter()
        .zip(&escaping)
        .filter(|(_, &e)| e)
        .map(|(&z, _)| ComplexValue::Finite(z))
        .take(cfg.samples)
        .collect();
    let report = forward_invariance_check(&g, &samples, cfg.depth, &cfg.budget)?;
    ctx.metric("candidates", candidates.len() as f64);
    ctx.metric("escaping_samples", samples.len() as f64);
    ctx.metric("violations", report.violations.len() as f64);
    Ok(())
}

/// The all-branch raster and its Julia proxy: the ESC mask dilated by one pixel.
fn julia_proxy(ctx: &mut Ctx) -> Result<(Raster, Vec<bool>)> {
    let r = grid(ctx, &Subject::Semigroup(exp_semigroup(ctx)?))?;
    let julia = dilate4(&mask_of(&r, Cell::Esc), r.width, r.height);
    ctx.metric("esc_pixels", count(&r, Cell::Esc));
    ctx.metric("bnd_pixels", count(&r, Cell::Bnd));
    ctx.metric("und_pixels", count(&r, Cell::Und));
    ctx.metric("julia_pixels", julia.iter().filter(|&&b| b).count() as f64);
    ctx.raster("G", &r)?;
    Ok((r, julia))
}

fn boundary_julia(ctx: &mut Ctx) -> Result<()> {
    let (r, julia) = julia_proxy(ctx)?;
    let edge = boundary(&r);
    let hausdorff = match hausdorff_px(&edge, &PixelSet::from_mask(&julia, r.width)) {
        Ok(h) => h,
        Err(Error::EmptySet) => f64::NAN,
        Err(e) => return Err(e),
    };
    ctx.metric("boundary_pixels", edge.len() as f64);
    ctx.metric("hausdorff_px", hausdorff);
    ctx.text("boundary.csv", &edge.to_csv())
}

fn escape_in_julia(ctx: &mut Ctx) -> Result<()> {
    let (r, julia) = julia_proxy(ctx)?;
    let outside = r.cells.iter().zip(&julia).filter(|(c, &j)| **c == Cell::Esc && !j).count();
    ctx.metric("esc_outside_julia", outside as f64);
    Ok(())
}

fn closure_no_bounded(ctx: &mut Ctx) -> Result<()> {
    let (r, julia) = julia_proxy(ctx)?;
    let cs = label_mask(&julia, r.width, r.height, Connectivity::Eight);
    ctx.metric("components", cs.components.len() as f64);
    ctx.metric("bounded_components", cs.components.iter().filter(|c| !c.touches_border).count() as f64);
    Ok(())
}

fn conjugacy_equivariance(ctx: &mut Ctx) -> Result<()> {
    let g = exp_semigroup(ctx)?;
    let phi = AffineMap::new(c(ctx.param("phi_alpha_re"), ctx.param("phi_alpha_im")), c(ctx.param("phi_beta_re"), ctx.param("phi_beta_im")))?;
    let cfg = ctx.cfg;
    let report = equivariance_check(&g, &phi, cfg.samples, cfg.depth, &cfg.budget, &cfg.window, cfg.seed)?;
    ctx.metric("agreement", report.agreement);
    ctx.metric("und_fraction", report.und_fraction);
    ctx.metric("compared", report.compared as f64);
    ctx.metric("approximately_abelian", f64::from(u8::from(report.approximately_abelian)));
    Ok(())
}
