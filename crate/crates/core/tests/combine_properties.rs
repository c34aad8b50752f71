use std::f64::consts::PI;

use proptest::prelude::*;
use sct_core::combine::{
    cct_statistic, normalizer, sct_statistic, sct_test, PValueVector, SctConfig, Truncation,
    WeightVector,
};
use sct_core::simulate::{uniform_null_statistics, Evaluator, Method};
use sct_core::verify::ks_distance;
use sct_core::{EvalPolicy, StableParams};

fn pol() -> EvalPolicy {
    EvalPolicy::default()
}

#[test]
fn cauchy_special_case_matches_cct() {
    let t = Truncation::default();
    let p = PValueVector::new(vec![0.01, 0.3, 0.5, 0.77, 0.999, 1e-9, 0.2]).unwrap();
    let w = WeightVector::normalized(&[1.0, 2.0, 0.5, 1.0, 3.0, 1.0, 0.25]).unwrap();
    let sct = sct_statistic(&p, &w, 1.0, 0.0, &t, &pol()).unwrap();
    let cct = cct_statistic(&p, &w, &t).unwrap();
    assert!(
        (sct - cct).abs() <= 1e-10 * cct.abs().max(1.0),
        "{sct} vs {cct}"
    );
}

#[test]
fn cct_statistic_by_hand() {
    let t = Truncation::default();
    let p = PValueVector::new(vec![0.1, 0.6]).unwrap();
    let w = WeightVector::equal(2).unwrap();
    let want = 0.5 * ((PI * 0.4).tan() + (PI * -0.1).tan());
    assert!((cct_statistic(&p, &w, &t).unwrap() - want).abs() < 1e-14);
}

#[test]
fn single_pvalue_is_returned_unchanged() {
    for (alpha, beta) in [(0.3, 1.0), (1.0, 0.0), (1.5, -0.6), (1.9, 0.4)] {
        let config = SctConfig::new(alpha, beta, 0.05).unwrap();
        let p = PValueVector::new(vec![0.01]).unwrap();
        let w = WeightVector::equal(1).unwrap();
        let out = sct_test(&p, &w, &config, &pol()).unwrap();
        assert!(
            (out.combined_p - 0.01).abs() < 1e-8,
            "{alpha} {beta}: {}",
            out.combined_p
        );
        assert!(out.reject);
    }
}

#[test]
fn forty_halves_give_zero_for_cauchy() {
    let config = SctConfig::new(1.0, 0.0, 0.05).unwrap();
    let p = PValueVector::new(vec![0.5; 40]).unwrap();
    let w = WeightVector::equal(40).unwrap();
    let out = sct_test(&p, &w, &config, &pol()).unwrap();
    assert!(out.statistic.abs() < 1e-14);
    assert!(!out.reject);
    assert!((out.combined_p - 0.5).abs() < 1e-12);
}

#[test]
fn normalizer_bound_examples() {
    let w = WeightVector::new(vec![0.97, 0.01, 0.01, 0.01]).unwrap();
    assert!(normalizer(&w, 1.5) >= 1.0);
    for alpha in [0.3, 1.0, 1.7] {
        let one = WeightVector::equal(1).unwrap();
        assert!((normalizer(&one, alpha) - 1.0).abs() < 1e-15);
        let eq = WeightVector::equal(10).unwrap();
        let bound = 10f64.powf(1.0 - 1.0 / alpha);
        assert!((normalizer(&eq, alpha) - bound).abs() < 1e-12 * bound);
    }
}

#[test]
fn null_statistic_is_stable_under_independence() {
    let t = Truncation::default();
    let draws = 4000;
    for (alpha, beta) in [(0.5, 1.0), (1.0, 0.0), (1.5, 0.6), (1.9, -0.8)] {
        let e = Evaluator::new(Method::Sct { alpha, beta }, 40, 0.05, &t, None, &pol()).unwrap();
        let stats = uniform_null_statistics(&e, 40, draws, 11, &t, 1).unwrap();
        let law = StableParams::standard(alpha, beta).unwrap();
        let d = ks_distance(&stats, |x| law.cdf(x, &pol())).unwrap();
        assert!(d < 1.63 / (draws as f64).sqrt(), "{alpha} {beta}: {d}");
    }
}

fn weights_strategy(n: usize) -> impl Strategy<Value = WeightVector> {
    prop::collection::vec(1e-3f64..1.0, n).prop_map(|raw| WeightVector::normalized(&raw).unwrap())
}

fn pvalues_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-8f64..1.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalizer_lower_bound(w in (1usize..60).prop_flat_map(weights_strategy), alpha in 0.05f64..1.99) {
        let n = w.len() as f64;
        let bound = n.powf(1.0 - 1.0 / alpha).min(1.0);
        prop_assert!(normalizer(&w, alpha) >= bound * (1.0 - 1e-12));
    }

    #[test]
    fn smaller_pvalue_gives_larger_statistic(
        p in pvalues_strategy(8),
        k in 0usize..8,
        shrink in 0.05f64..0.95,
        cell in prop::sample::select(vec![(0.5, 0.0), (1.0, 0.0), (1.5, 1.0), (0.9, -0.6)]),
    ) {
        let t = Truncation::default();
        let w = WeightVector::equal(8).unwrap();
        let mut q = p.clone();
        q[k] *= shrink;
        if t.apply(q[k]) < t.apply(p[k]) {
            let a = sct_statistic(&PValueVector::new(p).unwrap(), &w, cell.0, cell.1, &t, &pol()).unwrap();
            let b = sct_statistic(&PValueVector::new(q).unwrap(), &w, cell.0, cell.1, &t, &pol()).unwrap();
            prop_assert!(b > a, "{b} <= {a}");
        }
    }

    #[test]
    fn decision_agrees_with_combined_pvalue(
        p in pvalues_strategy(6),
        w in weights_strategy(6),
        cell in prop::sample::select(vec![(0.3, 0.6), (1.0, 0.0), (1.3, -0.2), (1.7, 1.0)]),
        level in 0.01f64..0.2,
    ) {
        let config = SctConfig::new(cell.0, cell.1, level).unwrap();
        let out = sct_test(&PValueVector::new(p).unwrap(), &w, &config, &pol()).unwrap();
        // Decisions are compared away from the boundary, where both sides
        // are limited by the evaluator tolerances.
        if (out.combined_p - level).abs() > 1e-7 {
            prop_assert_eq!(out.reject, out.combined_p < level);
        }
    }
}
