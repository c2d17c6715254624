//! Affine conjugation of maps and semigroups, and escape-equivariance
//! sampling.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::escape::{classify_branches, BranchStatus, Budget, Window};
use crate::maps::{probe_points, AffineMap, ComplexValue, EntireMap};
use crate::words::Semigroup;

/// `phi ∘ f ∘ phi⁻¹`, kept inside the exponential family when possible.
///
/// `exp(a·z + b) + c` conjugates to `exp((a/α)·z + b − aβ/α + log α) + αc + β`
/// with the principal branch of `log α`; other branches only shift `b` by
/// `2πik`, which leaves the map unchanged.
pub fn conjugate_map(f: &EntireMap, phi: &AffineMap) -> EntireMap {
    if phi.is_identity() {
        return f.clone();
    }
    match f {
        EntireMap::ExpAffine { a, b, c } => {
            let (alpha, beta) = (phi.alpha, phi.beta);
            EntireMap::ExpAffine { a: a / alpha, b: b - a * beta / alpha + alpha.ln(), c: alpha * c + beta }
        }
        EntireMap::Affine(psi) => EntireMap::Affine(phi.compose(psi).compose(&phi.inverse())),
        EntireMap::Conjugated { inner, phi: psi } => {
            let composed = phi.compose(psi);
            if composed.is_identity() {
                (**inner).clone()
            } else {
                EntireMap::conjugated((**inner).clone(), composed)
            }
        }
        _ => EntireMap::conjugated(f.clone(), *phi),
    }
}

/// Generator-wise conjugation; order and count are preserved.
pub fn conjugate_semigroup(g: &Semigroup, phi: &AffineMap) -> Result<Semigroup> {
    if phi.is_identity() {
        return Ok(g.clone());
    }
    Semigroup::new(g.generators().iter().map(|f| conjugate_map(f, phi)).collect())
}

/// Largest relative commutator `|g_i(g_j(z)) − g_j(g_i(z))|` over the probe
/// set and all generator pairs. Overflowing probes are skipped.
pub fn commutator_deviation(g: &Semigroup) -> f64 {
    let gens = g.generators();
    let mut worst = 0.0f64;
    for (i, gi) in gens.iter().enumerate() {
        for gj in &gens[i + 1..] {
            for z in probe_points() {
                let z = ComplexValue::Finite(z);
                if let (Some(u), Some(v)) = (gi.eval(gj.eval(z)).finite(), gj.eval(gi.eval(z)).finite()) {
                    worst = worst.max((u - v).norm() / (1.0 + u.norm()));
                }
            }
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceReport {
    pub samples: usize,
    pub seed: u64,
    /// Pairs where neither side was undetermined.
    pub compared: usize,
    pub agreeing: usize,
    pub und_pairs: usize,
    pub agreement: f64,
    pub und_fraction: f64,
    /// Flag only: the generators commute up to 1e-9 on the probe set.
    pub approximately_abelian: bool,
}

fn same_class(a: &BranchStatus, b: &BranchStatus) -> bool {
    matches!(
        (a, b),
        (BranchStatus::AllBranchesEscape, BranchStatus::AllBranchesEscape)
            | (BranchStatus::SomeBranchBounded(_), BranchStatus::SomeBranchBounded(_))
    )
}

/// Uniform points in `window` from a seeded ChaCha stream.
pub fn sample_window(window: &Window, n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let re = rng.random_range(window.re_min..window.re_max);
            let im = rng.random_range(window.im_min..window.im_max);
            Complex64::new(re, im)
        })
        .collect()
}

/// Compares `classify_branches(G, z)` with `classify_branches(G′, φ(z))` on
/// seeded samples from `window`. Undetermined pairs are excluded from the
/// agreement ratio.
pub fn equivariance_check(
    g: &Semigroup,
    phi: &AffineMap,
    samples: usize,
    depth: usize,
    b: &Budget,
    window: &Window,
    seed: u64,
) -> Result<EquivarianceReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let conjugate = conjugate_semigroup(g, phi)?;
    let points = sample_window(window, samples, seed);
    let outcomes: Vec<Option<bool>> = points
        .par_iter()
        .map(|&z| {
            let z = ComplexValue::Finite(z);
            let here = classify_branches(g, z, depth, b)?.status;
            let there = classify_branches(&conjugate, phi.apply(z), depth, b)?.status;
            let und = matches!(here, BranchStatus::Undetermined) || matches!(there, BranchStatus::Undetermined);
            Ok((!und).then(|| same_class(&here, &there)))
        })
        .collect::<Result<_>>()?;
    let compared = outcomes.iter().flatten().count();
    let agreeing = outcomes.iter().flatten().filter(|&&same| same).count();
    let und_pairs = samples - compared;
    Ok(EquivarianceReport {
        samples,
        seed,
        compared,
        agreeing,
        und_pairs,
        agreement: if compared == 0 { 0.0 } else { agreeing as f64 / compared as f64 },
        und_fraction: und_pairs as f64 / samples as f64,
        approximately_abelian: commutator_deviation(g) <= 1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{eval_word, Word};
    use std::f64::consts::{LN_2, TAU};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn exp_pair() -> Semigroup {
        Semigroup::periodic_translate(EntireMap::exp_lambda(c(1., 0.)).unwrap(), 1, c(0., TAU)).unwrap()
    }

    fn rel_close(a: ComplexValue, b: ComplexValue, tol: f64) -> bool {
        match (a, b) {
            (ComplexValue::Finite(x), ComplexValue::Finite(y)) => (x - y).norm() <= tol * (1.0 + y.norm()),
            (ComplexValue::Overflow, ComplexValue::Overflow) => true,
            _ => false,
        }
    }

    #[test]
    fn identity_leaves_map_unchanged() {
        let f = EntireMap::sine_affine(c(3., 0.), c(1., 0.)).unwrap();
        assert_eq!(conjugate_map(&f, &AffineMap::identity()), f);
        let g = exp_pair();
        assert_eq!(conjugate_semigroup(&g, &AffineMap::identity()).unwrap(), g);
    }

    #[test]
    fn doubling_conjugates_exp_in_family() {
        let f = EntireMap::exp_lambda(c(1., 0.)).unwrap();
        let phi = AffineMap::new(c(2., 0.), c(0., 0.)).unwrap();
        let h = conjugate_map(&f, &phi);
        assert_eq!(h, EntireMap::ExpAffine { a: c(0.5, 0.), b: c(LN_2, 0.), c: c(0., 0.) });
        // algebraic oracle 2·e^{z/2}
        for z in probe_points() {
            let oracle = 2.0 * (z / 2.0).exp();
            assert!(rel_close(h.at(z), ComplexValue::Finite(oracle), 1e-14));
        }
    }

    #[test]
    fn translation_conjugate() {
        let (a, b, cc) = (c(0.7, -0.3), c(0.1, 0.2), c(-1., 0.5));
        let f = EntireMap::exp_affine(a, b, cc).unwrap();
        let beta = c(1.5, -2.);
        let phi = AffineMap::new(c(1., 0.), beta).unwrap();
        let h = conjugate_map(&f, &phi);
        let EntireMap::ExpAffine { a: a2, b: b2, c: c2 } = h else { panic!("left the family") };
        assert!((a2 - a).norm() < 1e-15);
        assert!((b2 - (b - a * beta)).norm() < 1e-15);
        assert!((c2 - (cc + beta)).norm() < 1e-15);
    }

    #[test]
    fn semigroup_conjugation_is_generator_wise() {
        let g = exp_pair();
        let phi = AffineMap::new(c(1., 0.), c(1., 0.)).unwrap();
        let h = conjugate_semigroup(&g, &phi).unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h.generators()[0], EntireMap::ExpAffine { a: c(1., 0.), b: c(-1., 0.), c: c(1., 0.) });
        assert_eq!(h.generators()[1], EntireMap::conjugated(g.generators()[1].clone(), phi));

        let single = Semigroup::new(vec![EntireMap::sine_affine(c(2., 0.), c(0., 0.)).unwrap()]).unwrap();
        let h = conjugate_semigroup(&single, &phi).unwrap();
        assert_eq!(h.generators(), &[EntireMap::conjugated(single.generators()[0].clone(), phi)]);
    }

    #[test]
    fn in_family_matches_wrapper() {
        let f = EntireMap::exp_affine(c(1.2, 0.4), c(-0.3, 0.), c(0.5, 0.5)).unwrap();
        let phi = AffineMap::new(c(-0.8, 1.1), c(0.3, -0.7)).unwrap();
        let closed = conjugate_map(&f, &phi);
        let wrapped = EntireMap::conjugated(f, phi);
        for z in probe_points() {
            assert!(rel_close(closed.at(z), wrapped.at(z), 1e-12));
        }
    }

    #[test]
    fn equivariance_identity_and_errors() {
        let b = Budget { max_iter: 60, ..Budget::default() };
        let w = Window::square(4.0);
        let r = equivariance_check(&exp_pair(), &AffineMap::identity(), 50, 3, &b, &w, 7).unwrap();
        assert_eq!(r.agreement, 1.0);
        assert!(!r.approximately_abelian);
        assert!(equivariance_check(&exp_pair(), &AffineMap::identity(), 0, 3, &b, &w, 7).is_err());
    }

    #[test]
    fn commuting_generators_are_flagged() {
        let f = EntireMap::exp_lambda(c(1., 0.)).unwrap();
        let f2 = EntireMap::iter_translate(f.clone(), 2, c(0., 0.)).unwrap();
        assert!(commutator_deviation(&Semigroup::new(vec![f, f2]).unwrap()) <= 1e-9);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn complex(r: f64) -> impl Strategy<Value = Complex64> {
            (-r..r, -r..r).prop_map(|(a, b)| Complex64::new(a, b))
        }

        fn affine() -> impl Strategy<Value = AffineMap> {
            (complex(2.0), complex(2.0))
                .prop_filter("alpha away from 0", |(a, _)| a.norm() > 0.3)
                .prop_map(|(a, b)| AffineMap::new(a, b).unwrap())
        }

        fn generator() -> impl Strategy<Value = EntireMap> {
            prop_oneof![
                (complex(1.5), complex(1.0), complex(1.0))
                    .prop_filter("a away from 0", |(a, _, _)| a.norm() > 0.2)
                    .prop_map(|(a, b, cc)| EntireMap::exp_affine(a, b, cc).unwrap()),
                (complex(2.0), complex(1.0))
                    .prop_filter("lambda away from 0", |(l, _)| l.norm() > 0.2)
                    .prop_map(|(l, cc)| EntireMap::sine_affine(l, cc).unwrap()),
            ]
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn conjugation_is_pointwise(f in generator(), phi in affine(), z in complex(3.0)) {
                let lhs = conjugate_map(&f, &phi).at(z);
                let rhs = phi.apply(f.eval(phi.apply_inverse(ComplexValue::Finite(z))));
                prop_assume!(lhs.modulus() < 1e8 && rhs.modulus() < 1e8);
                prop_assert!(rel_close(lhs, rhs, 1e-12));
            }

            #[test]
            fn conjugation_undoes(f in generator(), phi in affine(), zs in prop::collection::vec(complex(3.0), 100)) {
                let back = conjugate_map(&conjugate_map(&f, &phi), &phi.inverse());
                for z in zs {
                    let (u, v) = (back.at(z), f.at(z));
                    if u.modulus() < 1e8 && v.modulus() < 1e8 {
                        prop_assert!(rel_close(u, v, 1e-10));
                    }
                }
            }

            #[test]
            fn words_are_equivariant(phi in affine(), letters in prop::collection::vec(0usize..2, 1..5), z in complex(2.0)) {
                let g = exp_pair();
                let h = conjugate_semigroup(&g, &phi).unwrap();
                let w = Word::new(letters);
                let direct = eval_word(&h, &w, ComplexValue::Finite(z)).unwrap();
                let via = phi.apply(eval_word(&g, &w, phi.apply_inverse(ComplexValue::Finite(z))).unwrap());
                prop_assume!(direct.modulus() <= 1e8 && via.modulus() <= 1e8);
                prop_assert!(rel_close(direct, via, 1e-9));
            }
        }
    }
}
