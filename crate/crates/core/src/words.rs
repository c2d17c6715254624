//! Words over semigroup generators and the periodic-translate normal form.
//!
//! A word `[i1, i2, …]` applies `g_{i1}` first, i.e. it denotes
//! `… ∘ g_{i2} ∘ g_{i1}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{ComplexValue, EntireMap};

pub const MAX_WORD_LEN: usize = 12;

/// Generators `[f, f^s + c]` with `c` a period of `f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicTranslate {
    pub s: u32,
}

/// A finitely generated semigroup, kept as its ordered generator list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SemigroupRepr", into = "SemigroupRepr")]
pub struct Semigroup {
    generators: Vec<EntireMap>,
    structure: Option<PeriodicTranslate>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SemigroupRepr {
    generators: Vec<EntireMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    periodic_translate: Option<PeriodicTranslate>,
}

impl TryFrom<SemigroupRepr> for Semigroup {
    type Error = Error;
    fn try_from(r: SemigroupRepr) -> Result<Self> {
        let g = Semigroup::new(r.generators)?;
        match r.periodic_translate {
            None => Ok(g),
            Some(tag) => g.with_structure(tag),
        }
    }
}

impl From<Semigroup> for SemigroupRepr {
    fn from(g: Semigroup) -> Self {
        SemigroupRepr { generators: g.generators, periodic_translate: g.structure }
    }
}

impl Semigroup {
    pub fn new(generators: Vec<EntireMap>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidParameter("a semigroup needs at least one generator".into()));
        }
        if generators.iter().any(EntireMap::is_affine) {
            return Err(Error::InvalidParameter("affine maps are not semigroup generators".into()));
        }
        Ok(Semigroup { generators, structure: None })
    }

    /// `[f, f^s + c]`, tagged for normal-form rewriting.
    pub fn periodic_translate(f: EntireMap, s: u32, c: Complex64) -> Result<Self> {
        let g = EntireMap::iter_translate(f.clone(), s, c)?;
        Ok(Semigroup { generators: vec![f, g], structure: Some(PeriodicTranslate { s }) })
    }

    /// Attaches a structure tag after checking the generators really have that shape.
    pub fn with_structure(mut self, tag: PeriodicTranslate) -> Result<Self> {
        let ok = match self.generators.as_slice() {
            [f, EntireMap::IterTranslate { base, s, c }] => {
                **base == *f && *s == tag.s && EntireMap::iter_translate(f.clone(), *s, *c).is_ok()
            }
            _ => false,
        };
        if !ok {
            return Err(Error::NotStructured);
        }
        self.structure = Some(tag);
        Ok(self)
    }

    pub fn generators(&self) -> &[EntireMap] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn structure(&self) -> Option<PeriodicTranslate> {
        self.structure
    }

    /// The translation `c` of a periodic-translate semigroup.
    pub fn translation(&self) -> Option<Complex64> {
        self.structure?;
        match &self.generators[1] {
            EntireMap::IterTranslate { c, .. } => Some(*c),
            _ => None,
        }
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        if w.is_empty() {
            return Err(Error::InvalidParameter("words are non-empty".into()));
        }
        match w.0.iter().find(|&&i| i >= self.len()) {
            Some(&letter) => Err(Error::InvalidWord { letter, generators: self.len() }),
            None => Ok(()),
        }
    }
}

/// Generator indices, innermost first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn new(letters: impl Into<Vec<usize>>) -> Self {
        Word(letters.into())
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word(self.0.iter().chain(&other.0).copied().collect())
    }
}

/// `f^k` when not translated, `f^k + c` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalForm {
    #[serde(rename = "K")]
    pub k: u64,
    pub translated: bool,
}

/// Every word of length `1..=max_len`, shortest first, then lexicographic.
pub fn enumerate_words(g: &Semigroup, max_len: usize) -> Result<Vec<Word>> {
    if max_len > MAX_WORD_LEN {
        return Err(Error::LimitExceeded { what: "max_len", got: max_len, limit: MAX_WORD_LEN });
    }
    let n = g.len();
    let mut out = Vec::new();
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|prefix| {
                (0..n).map(move |i| {
                    let mut w = prefix.clone();
                    w.push(i);
                    w
                })
            })
            .collect();
        out.extend(layer.iter().cloned().map(Word));
    }
    Ok(out)
}

pub fn eval_word(g: &Semigroup, w: &Word, z: ComplexValue) -> Result<ComplexValue> {
    g.check_word(w)?;
    let mut value = z;
    for &i in w.letters() {
        if value.is_overflow() {
            break;
        }
        value = g.generators[i].eval(value);
    }
    Ok(value)
}

/// Rewrites `w` into `f^K` or `f^K + c`.
///
/// An inner `+c` is absorbed by the next application of `f` since `c` is a
/// period of `f`; only the outermost one survives.
pub fn normal_form(g: &Semigroup, w: &Word) -> Result<NormalForm> {
    let tag = g.structure.ok_or(Error::NotStructured)?;
    g.check_word(w)?;
    let (fs, gs) = w.letters().iter().fold((0u64, 0u64), |(f, h), &i| if i == 0 { (f + 1, h) } else { (f, h + 1) });
    Ok(NormalForm { k: fs + u64::from(tag.s) * gs, translated: w.letters().last() == Some(&1) })
}

pub fn eval_normal_form(g: &Semigroup, nf: NormalForm, z: ComplexValue) -> Result<ComplexValue> {
    let c = g.translation().ok_or(Error::NotStructured)?;
    if nf.k == 0 {
        return Err(Error::InvalidParameter("normal forms have K ≥ 1".into()));
    }
    let f = &g.generators[0];
    let value = f.iterate(z, nf.k as usize);
    Ok(if nf.translated { value.map(|v| v + c) } else { value })
}

/// Superset of the singular values of the composite map `w`, folded with
/// `Sing((h∘k)⁻¹) ⊆ Sing(h⁻¹) ∪ h(Sing(k⁻¹))`.
pub fn word_singular_set(g: &Semigroup, w: &Word) -> Result<Vec<Complex64>> {
    g.check_word(w)?;
    let mut letters = w.letters().iter();
    let first = letters.next().copied().unwrap_or_default();
    let mut set = g.generators[first].singular_values()?;
    for &i in letters {
        let h = &g.generators[i];
        let mut next = h.singular_values()?;
        for v in &set {
            let image = h.at(*v).finite().ok_or(Error::UnboundedSingularSet)?;
            if !next.iter().any(|u| (u - image).norm() <= 1e-12 * (1.0 + image.norm())) {
                next.push(image);
            }
        }
        set = next;
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, TAU};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn exp_pair(s: u32) -> Semigroup {
        Semigroup::periodic_translate(EntireMap::exp_lambda(c(1., 0.)).unwrap(), s, c(0., TAU)).unwrap()
    }

    #[test]
    fn enumeration_counts_and_order() {
        let g = exp_pair(1);
        assert_eq!(enumerate_words(&g, 1).unwrap(), vec![Word::new([0]), Word::new([1])]);
        let two = enumerate_words(&g, 2).unwrap();
        assert_eq!(two.len(), 6);
        assert_eq!(two[2..], [Word::new([0, 0]), Word::new([0, 1]), Word::new([1, 0]), Word::new([1, 1])]);

        let single = Semigroup::new(vec![EntireMap::exp_lambda(c(1., 0.)).unwrap()]).unwrap();
        let words = enumerate_words(&single, 5).unwrap();
        assert_eq!(words.len(), 5);
        assert_eq!(words[4], Word::new([0; 5]));

        assert!(matches!(enumerate_words(&g, 13), Err(Error::LimitExceeded { .. })));
    }

    #[test]
    fn eval_word_examples() {
        let g = exp_pair(1);
        let z = ComplexValue::new(0.3, -0.2);
        assert_eq!(eval_word(&g, &Word::new([0]), z).unwrap(), g.generators()[0].eval(z));

        // e^0 = 1, then e^1 + 2πi
        let v = eval_word(&g, &Word::new([0, 1]), ComplexValue::new(0., 0.)).unwrap().finite().unwrap();
        assert!((v - c(E, TAU)).norm() < 1e-14);

        assert!(matches!(eval_word(&g, &Word::new([2]), z), Err(Error::InvalidWord { letter: 2, .. })));
        assert!(eval_word(&g, &Word::new([]), z).is_err());
    }

    #[test]
    fn normal_form_examples() {
        let g = exp_pair(2);
        assert_eq!(normal_form(&g, &Word::new([0])).unwrap(), NormalForm { k: 1, translated: false });
        assert_eq!(normal_form(&g, &Word::new([1, 0])).unwrap(), NormalForm { k: 3, translated: false });
        assert_eq!(normal_form(&g, &Word::new([0, 1])).unwrap(), NormalForm { k: 3, translated: true });

        let untagged = Semigroup::new(g.generators().to_vec()).unwrap();
        assert!(matches!(normal_form(&untagged, &Word::new([0])), Err(Error::NotStructured)));
    }

    #[test]
    fn eval_normal_form_examples() {
        let g = exp_pair(2);
        let f = &g.generators()[0];
        let z = ComplexValue::new(0.1, 0.4);
        assert_eq!(eval_normal_form(&g, NormalForm { k: 1, translated: false }, z).unwrap(), f.eval(z));

        let w = Word::new([0, 1]);
        let direct = eval_word(&g, &w, z).unwrap().finite().unwrap();
        let via_nf = eval_normal_form(&g, normal_form(&g, &w).unwrap(), z).unwrap().finite().unwrap();
        assert!((direct - via_nf).norm() <= 1e-9 * (1.0 + direct.norm()));

        let v = eval_normal_form(&g, NormalForm { k: 2, translated: false }, ComplexValue::new(0., 0.)).unwrap();
        assert!((v.finite().unwrap() - c(E, 0.)).norm() < 1e-15);
    }

    #[test]
    fn singular_set_examples() {
        let g = exp_pair(2);
        assert_eq!(word_singular_set(&g, &Word::new([0])).unwrap(), vec![c(0., 0.)]);
        assert_eq!(word_singular_set(&g, &Word::new([0, 0])).unwrap(), vec![c(0., 0.), c(1., 0.)]);

        // [0, 1]: Sing(g) ∪ g(Sing f)
        let f = &g.generators()[0];
        let gen = &g.generators()[1];
        let mut oracle = gen.singular_values().unwrap();
        oracle.push(gen.at(c(0., 0.)).finite().unwrap());
        let got = word_singular_set(&g, &Word::new([0, 1])).unwrap();
        assert_eq!(got.len(), oracle.len());
        for (a, b) in got.iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-12);
        }
        // Sing(g) itself is {0 + c, f(0) + c}
        assert_eq!(gen.singular_values().unwrap(), vec![c(0., TAU), f.at(c(0., 0.)).finite().unwrap() + c(0., TAU)]);
    }

    #[test]
    fn structure_tag_is_checked() {
        let f = EntireMap::exp_lambda(c(1., 0.)).unwrap();
        let other = EntireMap::exp_lambda(c(2., 0.)).unwrap();
        let g = EntireMap::iter_translate(other, 2, c(0., TAU / 2.0)).unwrap();
        let sg = Semigroup::new(vec![f, g]).unwrap();
        assert!(matches!(sg.with_structure(PeriodicTranslate { s: 2 }), Err(Error::NotStructured)));
    }

    #[test]
    fn json_format() {
        let w = Word::new([0, 1, 1]);
        assert_eq!(serde_json::to_string(&w).unwrap(), "[0,1,1]");
        let nf = NormalForm { k: 5, translated: true };
        assert_eq!(serde_json::to_string(&nf).unwrap(), r#"{"K":5,"translated":true}"#);
        let g = exp_pair(2);
        let back: Semigroup = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }
}
