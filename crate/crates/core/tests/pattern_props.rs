use std::collections::HashSet;

use num_bigint::BigUint;
use num_rational::BigRational;
use proptest::prelude::*;
use turan_gaps::combinat::{subsets_lex, weak_compositions};
use turan_gaps::pattern::{blow_up, blow_up_count, blowup_density_check, profile};
use turan_gaps::{BlowupSpec, Pattern, RMultiset};

/// Random pattern: a random subset of all r-multisets on `[m]`.
fn pattern_strategy(max_r: u32, max_m: usize) -> impl Strategy<Value = Pattern> {
    (2..=max_r, 1..=max_m)
        .prop_flat_map(|(r, m)| {
            let all = weak_compositions(r, m);
            let n = all.len();
            (Just(r), Just(m), Just(all), prop::collection::vec(any::<bool>(), n))
        })
        .prop_map(|(r, m, all, keep)| {
            let sets =
                all.into_iter().zip(keep).filter(|(_, k)| *k).map(|(mult, _)| RMultiset::new(mult).unwrap()).collect();
            Pattern::new(r, m, sets).unwrap()
        })
}

fn factorial_u(n: u32) -> BigUint {
    let mut acc = BigUint::from(1u32);
    for k in 2..=n {
        acc *= k;
    }
    acc
}

/// Brute force: all r-subsets of `[n]` whose profile lies in the pattern.
fn brute_force_blow_up(spec: &BlowupSpec) -> Vec<Vec<usize>> {
    let part_of = spec.part_assignment();
    let p = spec.pattern();
    subsets_lex(spec.n(), p.r() as usize)
        .into_iter()
        .filter(|e| p.contains(&profile(e, &part_of, p.m()).unwrap()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficients_are_multinomials(p in pattern_strategy(6, 5)) {
        let poly = p.lagrange_polynomial();
        prop_assert_eq!(poly.monomials().len(), p.len());
        for (d, t) in p.multisets().iter().zip(poly.monomials()) {
            let denom = d.multiplicities().iter().fold(BigUint::from(1u32), |a, &k| a * factorial_u(k));
            let expected = BigRational::new(factorial_u(p.r()).into(), denom.into());
            prop_assert_eq!(&t.exponents[..], d.multiplicities());
            prop_assert_eq!(&t.coefficient, &expected);
        }
    }

    #[test]
    fn homogeneity(p in pattern_strategy(5, 5), t in 0.0f64..2.0, raw in prop::collection::vec(0.0f64..1.0, 5)) {
        let x = &raw[..p.m()];
        let scaled: Vec<f64> = x.iter().map(|v| v * t).collect();
        let poly = p.lagrange_polynomial();
        let lhs = poly.eval(&scaled).unwrap();
        let rhs = t.powi(p.r() as i32) * poly.eval(x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1e-300));
    }

    #[test]
    fn uniform_exact_matches_float(p in pattern_strategy(6, 6)) {
        let poly = p.lagrange_polynomial();
        let exact = turan_gaps::scalar::rational_to_f64(&poly.eval_uniform_exact(p.m()).unwrap());
        let float = poly.eval(&vec![1.0 / p.m() as f64; p.m()]).unwrap();
        prop_assert!((exact - float).abs() <= 1e-12 * exact.abs().max(1e-300));
    }

    #[test]
    fn exact_eval_agrees_with_float(p in pattern_strategy(4, 4), raw in prop::collection::vec(1u32..20, 4)) {
        let x = &raw[..p.m()];
        let total: u32 = x.iter().sum();
        let exact_x: Vec<BigRational> = x.iter().map(|&v| BigRational::new(v.into(), total.into())).collect();
        let float_x: Vec<f64> = x.iter().map(|&v| v as f64 / total as f64).collect();
        let poly = p.lagrange_polynomial();
        let exact = turan_gaps::scalar::rational_to_f64(&poly.eval(&exact_x).unwrap());
        prop_assert!((exact - poly.eval(&float_x).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn blow_up_count_formula(p in pattern_strategy(4, 3), sizes in prop::collection::vec(0usize..5, 3)) {
        let sizes = sizes[..p.m()].to_vec();
        prop_assume!(sizes.iter().sum::<usize>() <= 12);
        let spec = BlowupSpec::new(p, sizes).unwrap();
        let built = blow_up(&spec);
        prop_assert_eq!(built.len() as u128, blow_up_count(&spec).unwrap());
        prop_assert_eq!(built, brute_force_blow_up(&spec));
    }

    #[test]
    fn profiles_partition_the_r_sets(sizes in prop::collection::vec(0usize..4, 1..5), r in 2u32..4) {
        let m = sizes.len();
        let n: usize = sizes.iter().sum();
        prop_assume!(n >= r as usize);
        let all: Vec<RMultiset> = weak_compositions(r, m).into_iter().map(|v| RMultiset::new(v).unwrap()).collect();
        // blow-ups of the single multisets are disjoint and cover every r-set
        let mut seen = HashSet::new();
        for d in &all {
            let spec = BlowupSpec::new(Pattern::new(r, m, vec![d.clone()]).unwrap(), sizes.clone()).unwrap();
            for e in blow_up(&spec) {
                prop_assert!(seen.insert(e));
            }
        }
        prop_assert_eq!(seen.len(), subsets_lex(n, r as usize).len());
    }
}

#[test]
fn example_blow_up_matches_brute_force() {
    let p = Pattern::from_element_lists(3, 3, &[vec![0, 0, 1], vec![0, 1, 2]]).unwrap();
    let spec = BlowupSpec::new(p, vec![2, 2, 2]).unwrap();
    let edges = brute_force_blow_up(&spec);
    assert_eq!(edges.len(), 10);
    assert_eq!(blow_up(&spec), edges);
}

#[test]
fn density_error_decays_first_order() {
    let p = Pattern::from_element_lists(3, 3, &[vec![0, 0, 1], vec![0, 1, 2]]).unwrap();
    let rows = blowup_density_check(&p, &[0.5, 0.25, 0.25], &[40, 80, 160, 320]).unwrap();
    for w in rows.windows(2) {
        let ratio = w[0].error / w[1].error;
        assert!((1.6..2.5).contains(&ratio), "ratio {ratio} at n = {}", w[0].n);
    }
}
