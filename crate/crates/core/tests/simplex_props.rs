use num_rational::BigRational;
use proptest::prelude::*;
use turan_gaps::combinat::weak_compositions;
use turan_gaps::simplex::{certify_max_upper, gradient, kkt_residual, maximize, partial_bound, project_to_simplex};
use turan_gaps::{OptimizerConfig, Pattern, RMultiset, StepRule};

fn pattern_strategy(max_r: u32, min_m: usize, max_m: usize) -> impl Strategy<Value = Pattern> {
    (2..=max_r, min_m..=max_m)
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

fn quick() -> OptimizerConfig {
    OptimizerConfig { starts: 12, max_iterations: 3000, ..OptimizerConfig::default() }
}

fn normalized(raw: &[f64]) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gradient_matches_finite_differences(p in pattern_strategy(5, 1, 6), raw in prop::collection::vec(0.05f64..1.0, 6)) {
        let x = normalized(&raw[..p.m()]);
        let poly = p.lagrange_polynomial();
        let g = gradient(&poly, &x).unwrap();
        let h = 1e-6;
        for i in 0..p.m() {
            let mut up = x.clone();
            let mut down = x.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (poly.eval(&up).unwrap() - poly.eval(&down).unwrap()) / (2.0 * h);
            let scale = g[i].abs().max(1e-3);
            prop_assert!((fd - g[i]).abs() <= 1e-5 * scale, "i={} fd={} g={}", i, fd, g[i]);
        }
    }

    #[test]
    fn exact_gradient_agrees_with_float(p in pattern_strategy(4, 1, 4), raw in prop::collection::vec(1i64..30, 4)) {
        let x = &raw[..p.m()];
        let exact_x: Vec<BigRational> = x.iter().map(|&v| BigRational::from_integer(v.into())).collect();
        let float_x: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let poly = p.lagrange_polynomial();
        let exact = gradient(&poly, &exact_x).unwrap();
        let float = gradient(&poly, &float_x).unwrap();
        for (e, f) in exact.iter().zip(&float) {
            let e = turan_gaps::scalar::rational_to_f64(e);
            prop_assert!((e - f).abs() <= 1e-12 * e.abs().max(1.0));
        }
    }

    #[test]
    fn projection_is_nearest(v in prop::collection::vec(-2.0f64..2.0, 1..7), seeds in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 7), 1000)) {
        let p = project_to_simplex(&v);
        let proj = p.coords();
        let s: f64 = proj.iter().sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
        prop_assert!(proj.iter().all(|&c| c >= 0.0));
        let d = dist2(proj, &v);
        for raw in &seeds {
            let mut y: Vec<f64> = raw[..v.len()].to_vec();
            let t: f64 = y.iter().sum();
            if t == 0.0 { continue; }
            y.iter_mut().for_each(|c| *c /= t);
            prop_assert!(d <= dist2(&y, &v) + 1e-12);
        }
    }

    #[test]
    fn lower_bound_below_grid_upper(p in pattern_strategy(4, 1, 4)) {
        let lower = maximize::<f64>(&p, &quick()).unwrap();
        let upper = certify_max_upper(&p, 24).unwrap();
        prop_assert!(lower.value <= upper.bound + 1e-12, "lower {} upper {}", lower.value, upper.bound);
        prop_assert!(upper.grid_max <= lower.value + 1e-9);
    }

    #[test]
    fn lagrangian_monotone_in_pattern(p in pattern_strategy(4, 1, 5), drop in any::<prop::sample::Index>()) {
        prop_assume!(!p.is_empty());
        let mut sets = p.multisets().to_vec();
        sets.remove(drop.index(sets.len()));
        let sub = Pattern::new(p.r(), p.m(), sets).unwrap();
        let big = maximize::<f64>(&p, &quick()).unwrap();
        let small = maximize::<f64>(&sub, &quick()).unwrap();
        prop_assert!(small.value <= big.value + 1e-9, "sub {} full {}", small.value, big.value);
    }

    #[test]
    fn maximizer_is_kkt_point(p in pattern_strategy(4, 1, 5)) {
        let res = maximize::<f64>(&p, &quick()).unwrap();
        let poly = p.lagrange_polynomial();
        prop_assert!(res.kkt_residual <= 1e-6);
        prop_assert_eq!(res.kkt_residual, kkt_residual(&poly, res.point.coords()).unwrap());
        let s: f64 = res.point.coords().iter().sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn seeded_runs_are_bit_identical(p in pattern_strategy(4, 2, 5), seed in any::<u64>()) {
        let cfg = OptimizerConfig { seed, ..quick() };
        let a = maximize::<f64>(&p, &cfg).unwrap();
        let b = maximize::<f64>(&p, &cfg).unwrap();
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
        prop_assert_eq!(a.point, b.point);
        prop_assert_eq!(a.best_start, b.best_start);
    }
}

#[test]
fn motzkin_straus_for_cliques() {
    for m in 2..=8 {
        let p = Pattern::complete_simple(2, m).unwrap();
        let res = maximize::<f64>(&p, &OptimizerConfig::default()).unwrap();
        let expected = (m as f64 - 1.0) / m as f64;
        assert!((res.value - expected).abs() < 1e-9, "m={m}: {}", res.value);
    }
}

#[test]
fn multiplicative_rule_reaches_same_value() {
    let p = Pattern::from_element_lists(3, 3, &[vec![0, 0, 1], vec![0, 1, 2]]).unwrap();
    let armijo = maximize::<f64>(&p, &OptimizerConfig::default()).unwrap();
    let cfg =
        OptimizerConfig { step_rule: StepRule::Multiplicative, max_iterations: 50_000, ..OptimizerConfig::default() };
    let mult = maximize::<f64>(&p, &cfg).unwrap();
    assert!((armijo.value - mult.value).abs() < 1e-7, "{} vs {}", armijo.value, mult.value);
}

#[test]
fn single_precision_tracks_double() {
    let p = Pattern::from_element_lists(3, 3, &[vec![0, 0, 1], vec![0, 1, 2]]).unwrap();
    let double = maximize::<f64>(&p, &OptimizerConfig::default()).unwrap();
    let single = maximize::<f32>(&p, &OptimizerConfig { tolerance: 1e-6, ..OptimizerConfig::default() }).unwrap();
    assert!((double.value - single.value as f64).abs() < 1e-4);
}

/// Brute-force grid oracle for the example pattern `{112, 123}`.
#[test]
fn example_pattern_value_against_fine_grid() {
    let p = Pattern::from_element_lists(3, 3, &[vec![0, 0, 1], vec![0, 1, 2]]).unwrap();
    let n = 600;
    let mut best = 0.0f64;
    for a in 0..=n {
        for b in 0..=n - a {
            let (x, y, z) = (a as f64 / n as f64, b as f64 / n as f64, (n - a - b) as f64 / n as f64);
            best = best.max(3.0 * x * x * y + 6.0 * x * y * z);
        }
    }
    let res = maximize::<f64>(&p, &OptimizerConfig::default()).unwrap();
    assert!(res.value >= best - 1e-12);
    assert!(res.value - best < 1e-4, "{} vs grid {}", res.value, best);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_bound_dominates_partials(p in pattern_strategy(5, 1, 6), raw in prop::collection::vec(0.0f64..1.0, 6)) {
        prop_assume!(raw[..p.m()].iter().sum::<f64>() > 0.0);
        let x = normalized(&raw[..p.m()]);
        let poly = p.lagrange_polynomial();
        let bound = partial_bound(&poly);
        for g in gradient(&poly, &x).unwrap() {
            prop_assert!(g <= bound * (1.0 + 1e-12), "{} > {}", g, bound);
        }
    }
}
