//! Closed parametric families of entire maps.
//!
//! Every evaluation is overflow safe: magnitudes beyond [`OVERFLOW_MODULUS`]
//! come back as [`ComplexValue::Overflow`] instead of non-finite floats, so
//! orbits never get contaminated by `inf`/`NaN` arithmetic.

use std::f64::consts::{LN_2, PI, TAU};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus still represented as a finite value.
pub const OVERFLOW_MODULUS: f64 = 1e300;

/// Real part of an exponent beyond which `exp` is reported as overflow.
pub const EXP_REAL_LIMIT: f64 = 690.0;

/// Relative tolerance of the periodicity witness.
pub const PERIOD_TOLERANCE: f64 = 1e-9;

const SIN_EXP_FORM_THRESHOLD: f64 = 20.0;

/// A point of the plane, or the marker for a value too large to represent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ComplexValue {
    Finite(Complex64),
    Overflow,
}

impl ComplexValue {
    pub fn new(re: f64, im: f64) -> Self {
        Self::from_complex(Complex64::new(re, im))
    }

    /// Wraps `z`, mapping non-finite or oversized values to `Overflow`.
    pub fn from_complex(z: Complex64) -> Self {
        if z.re.is_finite() && z.im.is_finite() && z.norm() <= OVERFLOW_MODULUS {
            ComplexValue::Finite(z)
        } else {
            ComplexValue::Overflow
        }
    }

    pub fn finite(self) -> Option<Complex64> {
        match self {
            ComplexValue::Finite(z) => Some(z),
            ComplexValue::Overflow => None,
        }
    }

    pub fn is_overflow(self) -> bool {
        matches!(self, ComplexValue::Overflow)
    }

    /// Modulus, with `Overflow` reported as `+inf`.
    pub fn modulus(self) -> f64 {
        match self {
            ComplexValue::Finite(z) => z.norm(),
            ComplexValue::Overflow => f64::INFINITY,
        }
    }

    pub fn map(self, f: impl FnOnce(Complex64) -> Complex64) -> Self {
        match self {
            ComplexValue::Finite(z) => Self::from_complex(f(z)),
            ComplexValue::Overflow => ComplexValue::Overflow,
        }
    }
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        Self::from_complex(z)
    }
}

impl fmt::Display for ComplexValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComplexValue::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
            ComplexValue::Overflow => f.write_str("overflow"),
        }
    }
}

impl Serialize for ComplexValue {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ComplexValue::Finite(z) => [z.re, z.im].serialize(serializer),
            ComplexValue::Overflow => serializer.serialize_str("overflow"),
        }
    }
}

impl<'de> Deserialize<'de> for ComplexValue {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Pair([f64; 2]),
            Marker(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Pair([re, im]) => Ok(ComplexValue::new(re, im)),
            Repr::Marker(s) if s == "overflow" => Ok(ComplexValue::Overflow),
            Repr::Marker(s) => Err(serde::de::Error::custom(format!("expected [re, im] or \"overflow\", got {s:?}"))),
        }
    }
}

/// Serde adapter writing a `Complex64` as `[re, im]`.
pub mod pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

/// `exp(w)`, or `Overflow` when `Re w` exceeds [`EXP_REAL_LIMIT`].
pub(crate) fn exp_guarded(w: Complex64) -> ComplexValue {
    if !(w.re.is_finite() && w.im.is_finite()) || w.re > EXP_REAL_LIMIT {
        return ComplexValue::Overflow;
    }
    ComplexValue::from_complex(w.exp())
}

/// `scale * sin(z)` with the overflow guard applied to the exponential form.
fn scaled_sin(scale: Complex64, z: Complex64) -> ComplexValue {
    let y = z.im.abs();
    if y <= SIN_EXP_FORM_THRESHOLD {
        return ComplexValue::from_complex(scale * z.sin());
    }
    if y - LN_2 + scale.norm().ln() > EXP_REAL_LIMIT {
        return ComplexValue::Overflow;
    }
    // sin z = (e^{iz} - e^{-iz}) / 2i
    let i = Complex64::i();
    let half = scale / (2.0 * i);
    let shift = half.ln();
    let (Some(p), Some(q)) = (exp_guarded(i * z + shift).finite(), exp_guarded(-i * z + shift).finite()) else {
        return ComplexValue::Overflow;
    };
    ComplexValue::from_complex(p - q)
}

fn scaled_cos(scale: Complex64, z: Complex64) -> ComplexValue {
    scaled_sin(scale, z + PI / 2.0)
}

/// `z ↦ alpha·z + beta` with `alpha ≠ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AffineRepr", into = "AffineRepr")]
pub struct AffineMap {
    pub alpha: Complex64,
    pub beta: Complex64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AffineRepr {
    #[serde(with = "pair")]
    alpha: Complex64,
    #[serde(with = "pair")]
    beta: Complex64,
}

impl TryFrom<AffineRepr> for AffineMap {
    type Error = Error;
    fn try_from(r: AffineRepr) -> Result<Self> {
        AffineMap::new(r.alpha, r.beta)
    }
}

impl From<AffineMap> for AffineRepr {
    fn from(m: AffineMap) -> Self {
        AffineRepr { alpha: m.alpha, beta: m.beta }
    }
}

impl AffineMap {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        check_nonzero("alpha", alpha)?;
        check_finite("beta", beta)?;
        Ok(AffineMap { alpha, beta })
    }

    pub fn identity() -> Self {
        AffineMap { alpha: Complex64::new(1.0, 0.0), beta: Complex64::new(0.0, 0.0) }
    }

    pub fn is_identity(&self) -> bool {
        self.alpha == Complex64::new(1.0, 0.0) && self.beta == Complex64::new(0.0, 0.0)
    }

    pub fn apply(&self, z: ComplexValue) -> ComplexValue {
        z.map(|z| self.alpha * z + self.beta)
    }

    pub fn apply_inverse(&self, z: ComplexValue) -> ComplexValue {
        z.map(|z| (z - self.beta) / self.alpha)
    }

    pub fn inverse(&self) -> AffineMap {
        AffineMap { alpha: self.alpha.inv(), beta: -self.beta / self.alpha }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        AffineMap { alpha: self.alpha * other.alpha, beta: self.alpha * other.beta + self.beta }
    }
}

/// A transcendental entire map from one of the supported families, or an
/// affine map used for conjugation.
///
/// Prefer the checked constructors; they enforce the nonzero-coefficient and
/// periodicity invariants that the variants alone cannot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapRepr", into = "MapRepr")]
pub enum EntireMap {
    /// `z ↦ exp(a·z + b) + c`
    ExpAffine { a: Complex64, b: Complex64, c: Complex64 },
    /// `z ↦ lambda·sin(z) + c`
    SineAffine { lambda: Complex64, c: Complex64 },
    /// `z ↦ base^s(z) + c` where `c` is a period of `base`.
    IterTranslate { base: Box<EntireMap>, s: u32, c: Complex64 },
    /// Conjugating map; not a semigroup generator.
    Affine(AffineMap),
    /// `phi ∘ inner ∘ phi⁻¹`
    Conjugated { inner: Box<EntireMap>, phi: AffineMap },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
enum MapRepr {
    ExpAffine {
        #[serde(with = "pair")]
        a: Complex64,
        #[serde(with = "pair")]
        b: Complex64,
        #[serde(with = "pair")]
        c: Complex64,
    },
    SineAffine {
        #[serde(with = "pair")]
        lambda: Complex64,
        #[serde(with = "pair")]
        c: Complex64,
    },
    IterTranslate {
        base: Box<EntireMap>,
        s: u32,
        #[serde(with = "pair")]
        c: Complex64,
    },
    Affine {
        #[serde(with = "pair")]
        alpha: Complex64,
        #[serde(with = "pair")]
        beta: Complex64,
    },
    Conjugated { inner: Box<EntireMap>, phi: AffineMap },
}

impl TryFrom<MapRepr> for EntireMap {
    type Error = Error;
    fn try_from(r: MapRepr) -> Result<Self> {
        match r {
            MapRepr::ExpAffine { a, b, c } => EntireMap::exp_affine(a, b, c),
            MapRepr::SineAffine { lambda, c } => EntireMap::sine_affine(lambda, c),
            MapRepr::IterTranslate { base, s, c } => EntireMap::iter_translate(*base, s, c),
            MapRepr::Affine { alpha, beta } => Ok(EntireMap::Affine(AffineMap::new(alpha, beta)?)),
            MapRepr::Conjugated { inner, phi } => Ok(EntireMap::conjugated(*inner, phi)),
        }
    }
}

impl From<EntireMap> for MapRepr {
    fn from(m: EntireMap) -> Self {
        match m {
            EntireMap::ExpAffine { a, b, c } => MapRepr::ExpAffine { a, b, c },
            EntireMap::SineAffine { lambda, c } => MapRepr::SineAffine { lambda, c },
            EntireMap::IterTranslate { base, s, c } => MapRepr::IterTranslate { base, s, c },
            EntireMap::Affine(AffineMap { alpha, beta }) => MapRepr::Affine { alpha, beta },
            EntireMap::Conjugated { inner, phi } => MapRepr::Conjugated { inner, phi },
        }
    }
}

fn check_finite(name: &str, z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite")))
    }
}

fn check_nonzero(name: &str, z: Complex64) -> Result<()> {
    check_finite(name, z)?;
    if z.norm() == 0.0 {
        return Err(Error::InvalidParameter(format!("{name} must be nonzero")));
    }
    Ok(())
}

/// Fixed probe points for the periodicity witness.
pub fn probe_points() -> [Complex64; 32] {
    std::array::from_fn(|k| {
        let radius = 0.25 + 1.75 * (k % 8) as f64 / 7.0;
        let angle = TAU * k as f64 / 32.0 + 0.1;
        Complex64::from_polar(radius, angle)
    })
}

/// Relative deviation `max |f(z+p) − f(z)| / (1+|f(z)|)` over the probe set.
///
/// Probes where both sides overflow are skipped; a one-sided overflow counts
/// as infinite deviation.
pub fn period_deviation(map: &EntireMap, p: Complex64) -> f64 {
    probe_points()
        .iter()
        .map(|&z| {
            let lhs = map.eval(ComplexValue::Finite(z + p));
            let rhs = map.eval(ComplexValue::Finite(z));
            match (lhs, rhs) {
                (ComplexValue::Overflow, ComplexValue::Overflow) => 0.0,
                (ComplexValue::Finite(u), ComplexValue::Finite(v)) => (u - v).norm() / (1.0 + v.norm()),
                _ => f64::INFINITY,
            }
        })
        .fold(0.0, f64::max)
}

fn push_unique(set: &mut Vec<Complex64>, z: Complex64) {
    if !set.iter().any(|w| (w - z).norm() <= 1e-12 * (1.0 + z.norm())) {
        set.push(z);
    }
}

impl EntireMap {
    pub fn exp_affine(a: Complex64, b: Complex64, c: Complex64) -> Result<Self> {
        check_nonzero("a", a)?;
        check_finite("b", b)?;
        check_finite("c", c)?;
        Ok(EntireMap::ExpAffine { a, b, c })
    }

    /// `z ↦ exp(lambda·z)`.
    pub fn exp_lambda(lambda: Complex64) -> Result<Self> {
        Self::exp_affine(lambda, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn sine_affine(lambda: Complex64, c: Complex64) -> Result<Self> {
        check_nonzero("lambda", lambda)?;
        check_finite("c", c)?;
        Ok(EntireMap::SineAffine { lambda, c })
    }

    pub fn affine(alpha: Complex64, beta: Complex64) -> Result<Self> {
        Ok(EntireMap::Affine(AffineMap::new(alpha, beta)?))
    }

    /// Builds `base^s + c`, checking that `c` is a period of `base`.
    pub fn iter_translate(base: EntireMap, s: u32, c: Complex64) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidParameter("s must be positive".into()));
        }
        check_finite("c", c)?;
        if matches!(base, EntireMap::Affine(_)) {
            return Err(Error::InvalidParameter("affine maps cannot be iterate-translate bases".into()));
        }
        let deviation = period_deviation(&base, c);
        if deviation.is_nan() || deviation > PERIOD_TOLERANCE {
            return Err(Error::NotAPeriod { value: ComplexValue::Finite(c).to_string(), deviation });
        }
        Ok(EntireMap::IterTranslate { base: Box::new(base), s, c })
    }

    pub fn conjugated(inner: EntireMap, phi: AffineMap) -> Self {
        EntireMap::Conjugated { inner: Box::new(inner), phi }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, EntireMap::Affine(_))
    }

    pub fn eval(&self, z: ComplexValue) -> ComplexValue {
        let Some(z) = z.finite() else {
            return ComplexValue::Overflow;
        };
        match self {
            EntireMap::ExpAffine { a, b, c } => exp_guarded(a * z + b).map(|w| w + c),
            EntireMap::SineAffine { lambda, c } => scaled_sin(*lambda, z).map(|w| w + c),
            EntireMap::IterTranslate { base, s, c } => {
                let mut w = ComplexValue::Finite(z);
                for _ in 0..*s {
                    w = base.eval(w);
                    if w.is_overflow() {
                        return w;
                    }
                }
                w.map(|w| w + c)
            }
            EntireMap::Affine(phi) => phi.apply(ComplexValue::Finite(z)),
            EntireMap::Conjugated { inner, phi } => {
                phi.apply(inner.eval(phi.apply_inverse(ComplexValue::Finite(z))))
            }
        }
    }

    /// Shorthand for evaluating at a finite point.
    pub fn at(&self, z: Complex64) -> ComplexValue {
        self.eval(ComplexValue::from_complex(z))
    }

    pub fn derivative(&self, z: ComplexValue) -> ComplexValue {
        let Some(z) = z.finite() else {
            return ComplexValue::Overflow;
        };
        match self {
            EntireMap::ExpAffine { a, b, .. } => exp_guarded(a * z + b).map(|w| a * w),
            EntireMap::SineAffine { lambda, .. } => scaled_cos(*lambda, z),
            EntireMap::IterTranslate { base, s, .. } => {
                let mut w = ComplexValue::Finite(z);
                let mut d = Complex64::new(1.0, 0.0);
                for _ in 0..*s {
                    match base.derivative(w).finite() {
                        Some(step) => d *= step,
                        None => return ComplexValue::Overflow,
                    }
                    w = base.eval(w);
                }
                ComplexValue::from_complex(d)
            }
            EntireMap::Affine(phi) => ComplexValue::Finite(phi.alpha),
            EntireMap::Conjugated { inner, phi } => inner.derivative(phi.apply_inverse(ComplexValue::Finite(z))),
        }
    }

    /// A primitive period, when the map has one.
    pub fn period(&self) -> Option<Complex64> {
        match self {
            EntireMap::ExpAffine { a, .. } => Some(Complex64::new(0.0, TAU) / a),
            EntireMap::SineAffine { .. } => Some(Complex64::new(TAU, 0.0)),
            EntireMap::IterTranslate { base, .. } => base.period(),
            EntireMap::Affine(_) => None,
            // φ∘f∘φ⁻¹(z + αp) = φ(f(φ⁻¹(z) + p))
            EntireMap::Conjugated { inner, phi } => inner.period().map(|p| phi.alpha * p),
        }
    }

    /// Critical and asymptotic values.
    pub fn singular_values(&self) -> Result<Vec<Complex64>> {
        match self {
            EntireMap::ExpAffine { c, .. } => Ok(vec![*c]),
            EntireMap::SineAffine { lambda, c } => {
                let mut set = vec![lambda + c];
                push_unique(&mut set, -lambda + c);
                Ok(set)
            }
            EntireMap::IterTranslate { base, s, c } => {
                let mut layer = base.singular_values()?;
                let mut out = Vec::new();
                for k in 0..*s {
                    if k > 0 {
                        layer = layer
                            .iter()
                            .map(|&v| base.at(v).finite().ok_or(Error::UnboundedSingularSet))
                            .collect::<Result<_>>()?;
                    }
                    for v in &layer {
                        push_unique(&mut out, v + c);
                    }
                }
                Ok(out)
            }
            EntireMap::Affine(_) => Ok(Vec::new()),
            EntireMap::Conjugated { inner, phi } => inner
                .singular_values()?
                .into_iter()
                .map(|v| phi.apply(ComplexValue::Finite(v)).finite().ok_or(Error::UnboundedSingularSet))
                .collect(),
        }
    }

    /// Membership in the class of maps with a bounded singular set.
    pub fn is_bounded_type(&self) -> bool {
        match self {
            EntireMap::Affine(_) => false,
            EntireMap::Conjugated { inner, .. } => inner.is_bounded_type(),
            EntireMap::IterTranslate { base, .. } if !base.is_bounded_type() => false,
            _ => self.singular_values().is_ok(),
        }
    }

    /// Orbit `z, f(z), …, f^n(z)`; stops early after the first overflow.
    pub fn orbit(&self, z: Complex64, n: usize) -> Vec<ComplexValue> {
        let mut out = Vec::with_capacity(n + 1);
        let mut w = ComplexValue::from_complex(z);
        out.push(w);
        for _ in 0..n {
            if w.is_overflow() {
                break;
            }
            w = self.eval(w);
            out.push(w);
        }
        out
    }

    pub fn iterate(&self, z: ComplexValue, n: usize) -> ComplexValue {
        let mut w = z;
        for _ in 0..n {
            if w.is_overflow() {
                break;
            }
            w = self.eval(w);
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: ComplexValue, b: Complex64, tol: f64) -> bool {
        a.finite().is_some_and(|a| (a - b).norm() <= tol * (1.0 + b.norm()))
    }

    #[test]
    fn eval_examples() {
        let exp = EntireMap::exp_affine(c(1., 0.), c(0., 0.), c(0., 0.)).unwrap();
        assert!(close(exp.at(c(0., 0.)), c(1., 0.), 1e-15));

        let sine = EntireMap::sine_affine(c(1., 0.), c(0., 0.)).unwrap();
        assert!(close(sine.at(c(PI / 2.0, 0.)), c(1., 0.), 1e-15));

        let f = EntireMap::exp_affine(c(-1., 0.), c(-1., 0.), c(1., 0.)).unwrap();
        let v = f.at(c(1., 0.)).finite().unwrap();
        assert!((v - c((-2.0f64).exp() + 1.0, 0.)).norm() < 1e-15);
        assert!((v.re - 1.13534).abs() < 1e-5);
        assert!(v.re > 1.0);
    }

    #[test]
    fn overflow_is_a_value() {
        let exp = EntireMap::exp_lambda(c(1., 0.)).unwrap();
        assert_eq!(exp.at(c(691., 0.)), ComplexValue::Overflow);
        assert!(exp.at(c(689., 3.)).finite().is_some());
        assert_eq!(exp.eval(ComplexValue::Overflow), ComplexValue::Overflow);

        let sine = EntireMap::sine_affine(c(1., 0.), c(0., 0.)).unwrap();
        assert_eq!(sine.at(c(0.3, 800.)), ComplexValue::Overflow);
        assert_eq!(sine.at(c(0.3, -800.)), ComplexValue::Overflow);
        // 1e300 guard holds even when the exponent is below the limit
        let big = EntireMap::sine_affine(c(1e10, 0.), c(0., 0.)).unwrap();
        assert_eq!(big.at(c(0.3, 685.)), ComplexValue::Overflow);
    }

    #[test]
    fn sine_exponential_form_matches_library_sin() {
        let sine = EntireMap::sine_affine(c(0.7, -0.2), c(1., 1.)).unwrap();
        for &z in &[c(0.3, 25.), c(-2.0, -30.), c(10.0, 21.)] {
            let expected = c(0.7, -0.2) * z.sin() + c(1., 1.);
            assert!(close(sine.at(z), expected, 1e-12), "{z}");
        }
    }

    #[test]
    fn derivative_examples() {
        let exp = EntireMap::exp_lambda(c(1., 0.)).unwrap();
        assert!(close(exp.derivative(ComplexValue::new(0., 0.)), c(1., 0.), 1e-15));

        let sine = EntireMap::sine_affine(c(2., 0.), c(0., 0.)).unwrap();
        assert!(close(sine.derivative(ComplexValue::new(0., 0.)), c(2., 0.), 1e-15));

        // chain rule oracle: f'(f(0))·f'(0) = e^1 · e^0
        let g = EntireMap::iter_translate(exp.clone(), 2, c(0., TAU)).unwrap();
        let oracle = exp.derivative(exp.at(c(0., 0.))).finite().unwrap() * exp.derivative(ComplexValue::new(0., 0.)).finite().unwrap();
        let d = g.derivative(ComplexValue::new(0., 0.));
        assert!(close(d, oracle, 1e-15));
        assert!(close(d, c(E, 0.), 1e-15));
    }

    #[test]
    fn period_examples() {
        let lambda = c(0.5, 0.25);
        let f = EntireMap::exp_lambda(lambda).unwrap();
        let p = f.period().unwrap();
        assert!((p - c(0., TAU) / lambda).norm() < 1e-15);
        assert!(period_deviation(&f, p) <= PERIOD_TOLERANCE);

        let s = EntireMap::sine_affine(c(3., 0.), c(1., 0.)).unwrap();
        assert_eq!(s.period(), Some(c(TAU, 0.)));
        assert_eq!(EntireMap::affine(c(2., 0.), c(1., 0.)).unwrap().period(), None);

        let phi = AffineMap::new(c(2., 1.), c(1., 0.)).unwrap();
        let conj = EntireMap::conjugated(f.clone(), phi);
        let q = conj.period().unwrap();
        assert!(period_deviation(&conj, q) <= PERIOD_TOLERANCE);
    }

    #[test]
    fn singular_value_examples() {
        let lambda = c(1.5, 0.);
        let f = EntireMap::exp_lambda(lambda).unwrap();
        assert_eq!(f.singular_values().unwrap(), vec![c(0., 0.)]);

        let period = c(0., TAU) / lambda;
        let g = EntireMap::iter_translate(f.clone(), 3, period).unwrap();
        let expected: Vec<Complex64> = (0..3)
            .map(|k| f.iterate(ComplexValue::new(0., 0.), k).finite().unwrap() + period)
            .collect();
        let got = g.singular_values().unwrap();
        assert_eq!(got.len(), 3);
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-12);
        }

        let sine = EntireMap::sine_affine(c(1., 0.), c(0., 0.)).unwrap();
        let sv = sine.singular_values().unwrap();
        assert_eq!(sv, vec![c(1., 0.), c(-1., 0.)]);
        // critical points π/2 + kπ map onto ±1
        for k in -3..3 {
            let crit = c(PI / 2.0 + k as f64 * PI, 0.);
            assert!(sine.derivative(ComplexValue::Finite(crit)).modulus() < 1e-12);
            let v = sine.at(crit).finite().unwrap();
            assert!(sv.iter().any(|s| (s - v).norm() < 1e-12));
        }
    }

    #[test]
    fn unbounded_singular_set() {
        // 0 ↦ 1 ↦ e ↦ e^e ↦ … overflows after five steps of e^z
        let f = EntireMap::exp_lambda(c(1., 0.)).unwrap();
        let g = EntireMap::iter_translate(f, 8, c(0., TAU)).unwrap();
        assert!(matches!(g.singular_values(), Err(Error::UnboundedSingularSet)));
        assert!(!g.is_bounded_type());
    }

    #[test]
    fn bounded_type_examples() {
        let exp = EntireMap::exp_lambda(c(1., 0.)).unwrap();
        assert!(exp.is_bounded_type());
        assert!(EntireMap::sine_affine(c(3., 0.), c(1., 0.)).unwrap().is_bounded_type());
        assert!(EntireMap::iter_translate(exp, 3, c(0., TAU)).unwrap().is_bounded_type());
        assert!(!EntireMap::affine(c(2., 0.), c(0., 0.)).unwrap().is_bounded_type());
    }

    #[test]
    fn constructor_invariants() {
        assert!(EntireMap::exp_affine(c(0., 0.), c(0., 0.), c(0., 0.)).is_err());
        assert!(EntireMap::sine_affine(c(0., 0.), c(0., 0.)).is_err());
        assert!(EntireMap::affine(c(0., 0.), c(1., 0.)).is_err());
        let f = EntireMap::exp_lambda(c(1., 0.)).unwrap();
        assert!(matches!(EntireMap::iter_translate(f.clone(), 2, c(0., 1.)), Err(Error::NotAPeriod { .. })));
        assert!(EntireMap::iter_translate(f, 0, c(0., TAU)).is_err());
    }

    #[test]
    fn json_format() {
        let f = EntireMap::exp_affine(c(1., 0.), c(0., 0.5), c(-1., 0.)).unwrap();
        let json = serde_json::to_value(&f).unwrap();
        assert_eq!(json, serde_json::json!({"family":"exp_affine","a":[1.0,0.0],"b":[0.0,0.5],"c":[-1.0,0.0]}));

        let g = EntireMap::iter_translate(f.clone(), 2, c(0., TAU)).unwrap();
        let back: EntireMap = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);

        let phi = AffineMap::new(c(2., 0.), c(1., 0.)).unwrap();
        assert_eq!(serde_json::to_value(phi).unwrap(), serde_json::json!({"alpha":[2.0,0.0],"beta":[1.0,0.0]}));

        let bad = r#"{"family":"sine_affine","lambda":[0,0],"c":[0,0]}"#;
        assert!(serde_json::from_str::<EntireMap>(bad).is_err());
        let not_period = r#"{"family":"iter_translate","base":{"family":"exp_affine","a":[1,0],"b":[0,0],"c":[0,0]},"s":2,"c":[0,1]}"#;
        assert!(serde_json::from_str::<EntireMap>(not_period).is_err());
    }
}
