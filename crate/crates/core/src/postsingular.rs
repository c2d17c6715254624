//! Orbits of singular values: boundedness, preperiodicity, attracting-cycle
//! capture and the translation identity for `f^s + c`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::escape::{classify_orbit, Budget, OrbitRecord, OrbitStatus};
use crate::maps::{pair, ComplexValue, EntireMap};

pub const DEFAULT_CYCLE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    Bounded,
    Escaping,
    Mixed,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularOrbit {
    #[serde(with = "pair")]
    pub value: Complex64,
    pub record: OrbitRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostsingularVerdict {
    pub orbits: Vec<SingularOrbit>,
    pub aggregate: Aggregate,
    /// Largest modulus over all singular orbits when the aggregate is bounded.
    pub bound: Option<f64>,
}

fn singular_set(f: &EntireMap) -> Result<Vec<Complex64>> {
    let set = f.singular_values()?;
    if set.is_empty() {
        return Err(Error::NoSingularValues);
    }
    Ok(set)
}

fn aggregate(orbits: &[SingularOrbit]) -> Aggregate {
    let bounded = orbits.iter().filter(|o| o.record.bounded()).count();
    let escaped = orbits.iter().filter(|o| o.record.escaped()).count();
    if bounded == orbits.len() {
        Aggregate::Bounded
    } else if escaped == orbits.len() {
        Aggregate::Escaping
    } else if bounded > 0 && escaped > 0 {
        Aggregate::Mixed
    } else {
        Aggregate::Undetermined
    }
}

pub fn singular_orbits(f: &EntireMap, b: &Budget) -> Result<PostsingularVerdict> {
    let orbits: Vec<SingularOrbit> = singular_set(f)?
        .into_iter()
        .map(|value| SingularOrbit { value, record: classify_orbit(f, ComplexValue::Finite(value), b) })
        .collect();
    let aggregate = aggregate(&orbits);
    let bound = (aggregate == Aggregate::Bounded).then(|| {
        orbits
            .iter()
            .filter_map(|o| match o.record.status {
                OrbitStatus::Bounded { max_modulus } => Some(max_modulus),
                _ => None,
            })
            .fold(0.0, f64::max)
    });
    Ok(PostsingularVerdict { orbits, aggregate, bound })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preperiodicity {
    pub preperiod: usize,
    pub period: usize,
    pub tolerance: f64,
}

/// Smallest preperiod `n`, then smallest period `p`, such that the orbit
/// repeats with period `p` from `n` on for `p + 1` consecutive points.
pub fn detect_preperiodicity(orbit: &[Complex64], tol: f64) -> Option<Preperiodicity> {
    let len = orbit.len();
    for n in 0..len {
        for p in 1.. {
            if n + 2 * p >= len {
                break;
            }
            if (n..=n + p).all(|i| (orbit[i + p] - orbit[i]).norm() <= tol) {
                return Some(Preperiodicity { preperiod: n, period: p, tolerance: tol });
            }
        }
    }
    None
}

fn finite_prefix(orbit: &[ComplexValue]) -> Vec<Complex64> {
    orbit.iter().map_while(|v| v.finite()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxyVerdict {
    Yes,
    No,
    Undetermined,
}

/// Every singular orbit preperiodic within the budget → `Yes`; any escaping → `No`.
pub fn is_postsingularly_finite_proxy(f: &EntireMap, b: &Budget, tol: f64) -> Result<ProxyVerdict> {
    let mut all_found = true;
    for v in singular_set(f)? {
        if classify_orbit(f, ComplexValue::Finite(v), b).escaped() {
            return Ok(ProxyVerdict::No);
        }
        if detect_preperiodicity(&finite_prefix(&f.orbit(v, b.max_iter)), tol).is_none() {
            all_found = false;
        }
    }
    Ok(if all_found { ProxyVerdict::Yes } else { ProxyVerdict::Undetermined })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapturedCycle {
    pub cycle: Preperiodicity,
    /// Modulus of the cycle multiplier.
    pub multiplier: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicReport {
    pub verdict: ProxyVerdict,
    /// One entry per singular value; `None` where no cycle was captured.
    pub cycles: Vec<Option<CapturedCycle>>,
}

/// Attracting-cycle capture of every singular orbit.
///
/// The multiplier is evaluated on the last `p` points of the stored orbit,
/// which sit closest to the cycle.
pub fn is_hyperbolic_proxy(f: &EntireMap, b: &Budget, tol: f64) -> Result<HyperbolicReport> {
    let mut cycles = Vec::new();
    let mut escaped = false;
    for v in singular_set(f)? {
        if classify_orbit(f, ComplexValue::Finite(v), b).escaped() {
            escaped = true;
            cycles.push(None);
            continue;
        }
        let orbit = finite_prefix(&f.orbit(v, b.max_iter));
        let captured = detect_preperiodicity(&orbit, tol).and_then(|cycle| {
            let tail = &orbit[orbit.len() - cycle.period..];
            let multiplier = tail
                .iter()
                .map(|&z| f.derivative(ComplexValue::Finite(z)).modulus())
                .product::<f64>();
            multiplier.is_finite().then_some(CapturedCycle { cycle, multiplier })
        });
        cycles.push(captured);
    }
    let verdict = if escaped {
        ProxyVerdict::No
    } else if cycles.iter().all(|c| c.as_ref().is_some_and(|c| c.multiplier < 1.0)) {
        ProxyVerdict::Yes
    } else {
        ProxyVerdict::Undetermined
    };
    Ok(HyperbolicReport { verdict, cycles })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub max_deviation: f64,
    pub pairs: usize,
}

fn deviation(a: ComplexValue, b: ComplexValue) -> Option<f64> {
    match (a, b) {
        (ComplexValue::Overflow, ComplexValue::Overflow) => None,
        (ComplexValue::Finite(x), ComplexValue::Finite(y)) => Some((x - y).norm()),
        _ => Some(f64::INFINITY),
    }
}

/// Max over `(n, m)` of the nearest-point distance, in both directions.
fn two_sided(xs: &[ComplexValue], ys: &[ComplexValue]) -> f64 {
    let nearest = |p: &ComplexValue, set: &[ComplexValue]| set.iter().filter_map(|q| deviation(*p, *q)).fold(f64::INFINITY, f64::min);
    let one = |from: &[ComplexValue], to: &[ComplexValue]| {
        from.iter().filter(|p| !p.is_overflow()).map(|p| nearest(p, to)).fold(0.0, f64::max)
    };
    one(xs, ys).max(one(ys, xs))
}

/// Samples `P(g)` for `g = f^s + c` and compares it with `P(f) + c`.
///
/// Each singular value `f^k(v) + c` of `g` is iterated under `g`; the point
/// `g^n(f^k(v) + c)` is paired with `f^{ns+k}(v) + c`. The reported deviation
/// is the larger of the pairwise maximum and the two-sided set distance.
pub fn postsingular_translation_check(f: &EntireMap, s: u32, c: Complex64, b: &Budget) -> Result<DeviationReport> {
    let g = EntireMap::iter_translate(f.clone(), s, c)?;
    let s = s as usize;
    let mut pairwise = 0.0f64;
    let mut pairs = 0;
    let mut from_g = Vec::new();
    let mut from_f = Vec::new();
    for v in singular_set(f)? {
        let reference: Vec<ComplexValue> = (0..=b.max_iter)
            .scan(ComplexValue::Finite(v), |w, _| {
                let cur = *w;
                *w = f.eval(cur);
                Some(cur.map(|z| z + c))
            })
            .collect();
        from_f.extend_from_slice(&reference);
        for k in 0..s.min(b.max_iter + 1) {
            let mut x = reference[k];
            for n in 0..=(b.max_iter - k) / s {
                if let Some(d) = deviation(x, reference[n * s + k]) {
                    pairwise = pairwise.max(d);
                    pairs += 1;
                }
                from_g.push(x);
                x = g.eval(x);
            }
        }
    }
    Ok(DeviationReport { max_deviation: pairwise.max(two_sided(&from_g, &from_f)), pairs })
}

/// Samples `P(f^k)` and compares it with `P(f)` on the common subsequence.
pub fn postsingular_power_check(f: &EntireMap, k: u32, b: &Budget) -> Result<DeviationReport> {
    let power = EntireMap::iter_translate(f.clone(), k, Complex64::new(0.0, 0.0))?;
    let k = k as usize;
    let mut pairwise = 0.0f64;
    let mut pairs = 0;
    let mut from_power = Vec::new();
    let mut from_f = Vec::new();
    for v in singular_set(f)? {
        let reference = f.orbit(v, b.max_iter);
        from_f.extend_from_slice(&reference);
        for l in 0..k.min(reference.len()) {
            let mut x = reference[l];
            let mut n = 0;
            while n * k + l < reference.len() {
                if let Some(d) = deviation(x, reference[n * k + l]) {
                    pairwise = pairwise.max(d);
                    pairs += 1;
                }
                from_power.push(x);
                x = power.eval(x);
                n += 1;
            }
        }
    }
    Ok(DeviationReport { max_deviation: pairwise.max(two_sided(&from_power, &from_f)), pairs })
}
