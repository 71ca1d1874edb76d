mod common;

use std::sync::Arc;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use urykit::backforth::{almost_isometry, certify_bilip, Certificate, MatchOutcome, MatchPlan, Side};
use urykit::urysohn::{build_levels, DEFAULT_POINT_BUDGET};
use urykit::{FiniteMetricSpace, PartialMap, Rat};

fn a2() -> Arc<FiniteMetricSpace> {
    Arc::new(build_levels(2, DEFAULT_POINT_BUDGET).unwrap().top().clone())
}

#[test]
fn level_two_matches_its_scaled_copy() {
    let x = a2();
    let y = Arc::new(x.scaled(&r(9, 10)));
    for lambda in [r(2, 1), r(3, 2), r(5, 4)] {
        let plan = MatchPlan::geometric(lambda.clone(), 16);
        match almost_isometry(x.clone(), y.clone(), &plan).unwrap() {
            MatchOutcome::Success { map, distortion } => {
                assert_eq!(map.len(), 16);
                let oracle = distortion_of(&x, &y, map.pairs());
                assert_eq!(oracle, distortion);
                assert!(oracle < lambda);
                assert!(matches!(certify_bilip(&map, &lambda), Certificate::Ok { .. }));
            }
            MatchOutcome::Failure(f) => panic!("lambda {lambda}: {f:?}"),
        }
    }
}

#[test]
fn identity_match_has_distortion_one() {
    let x = a2();
    let plan = MatchPlan::geometric(r(5, 4), 16);
    let MatchOutcome::Success { map, distortion } = almost_isometry(x.clone(), x, &plan).unwrap() else {
        panic!("identity match failed");
    };
    assert_eq!(distortion, Rat::one());
    assert!(map.pairs().iter().all(|(a, b)| a == b));
}

#[test]
fn certifier_rejects_exact_boundary() {
    let x = Arc::new(FiniteMetricSpace::from_fn(2, |_, _| r(2, 1)).unwrap());
    let y = Arc::new(FiniteMetricSpace::from_fn(2, |_, _| r(3, 1)).unwrap());
    let m = PartialMap::new(x, y, vec![(0, 0), (1, 1)]).unwrap();
    assert!(matches!(certify_bilip(&m, &r(3, 2)), Certificate::Counterexample(_)));
    assert!(matches!(certify_bilip(&m, &r(8, 5)), Certificate::Ok { .. }));
}

/// A failing step must be a genuine dead end: no unmatched point on the
/// other side keeps the partial map under the step bound.
fn check_failure_is_genuine(
    x: &Arc<FiniteMetricSpace>,
    y: &Arc<FiniteMetricSpace>,
    f: &urykit::backforth::MatchFailure,
) {
    let bound = &f.bound;
    assert!(distortion_of(x, y, &f.partial) < *bound || f.partial.len() < 2);
    match f.side {
        Side::X => {
            for cand in 0..y.len() {
                if f.partial.iter().any(|&(_, b)| b == cand) {
                    continue;
                }
                let mut p = f.partial.clone();
                p.push((f.point, cand));
                assert!(distortion_of(x, y, &p) >= *bound);
            }
        }
        Side::Y => {
            for cand in 0..x.len() {
                if f.partial.iter().any(|&(a, _)| a == cand) {
                    continue;
                }
                let mut p = f.partial.clone();
                p.push((cand, f.point));
                assert!(distortion_of(x, y, &p) >= *bound);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn engine_is_sound(seed in any::<u64>(), which in 0usize..3) {
        let lambda = [r(2, 1), r(3, 2), r(5, 4)][which].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=7);
        let x = Arc::new(banded_space(&mut rng, n));
        let m = rng.gen_range(2..=7);
        let y = Arc::new(banded_space(&mut rng, m));
        let plan = MatchPlan::geometric(lambda.clone(), 8);
        match almost_isometry(x.clone(), y.clone(), &plan).unwrap() {
            MatchOutcome::Success { map, distortion } => {
                prop_assert_eq!(map.len(), x.len().min(y.len()));
                prop_assert_eq!(distortion_of(&x, &y, map.pairs()), distortion.clone());
                prop_assert!(distortion < lambda);
            }
            MatchOutcome::Failure(f) => check_failure_is_genuine(&x, &y, &f),
        }
    }

    #[test]
    fn certifier_agrees_with_oracle(seed in any::<u64>(), num in 1i64..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=6);
        let x = Arc::new(banded_space(&mut rng, n));
        let y = Arc::new(banded_space(&mut rng, n));
        let pairs: Vec<_> = (0..n).map(|i| (i, i)).collect();
        let m = PartialMap::new(x.clone(), y.clone(), pairs.clone()).unwrap();
        let lambda = Rat::one() + r(num, 20);
        let ok = distortion_of(&x, &y, &pairs) < lambda;
        prop_assert_eq!(matches!(certify_bilip(&m, &lambda), Certificate::Ok { .. }), ok);
    }
}
