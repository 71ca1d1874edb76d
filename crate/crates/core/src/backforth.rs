//! Back-and-forth construction of bijective λ-bi-Lipschitz matchings between
//! finite spaces, plus an independent post-hoc certifier.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::check_almost_extension;
use crate::metric::{distortion, Distortion, FiniteMetricSpace, PartialMap};
use crate::rational::Rat;

/// Which side adjoins a point at each step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SideOrder {
    /// X, Y, X, Y, ...
    Alternate,
    /// Only ever extend forward from X.
    ForthOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    X,
    Y,
}

/// Bound schedule for the matching engine. Step `k` must end with distortion
/// below `slack[k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchPlan {
    pub lambda: Rat,
    pub slack: Vec<Rat>,
    pub max_points: usize,
    pub side_order: SideOrder,
}

impl MatchPlan {
    /// Geometric schedule `1 + (λ-1)(1 - 2^{-k-1})`, alternating sides.
    pub fn geometric(lambda: Rat, max_points: usize) -> Self {
        let slack = (0..max_points)
            .map(|k| {
                let tail = Rat::new(1, 2).pow(k as i32 + 1);
                Rat::one() + (&lambda - Rat::one()) * (Rat::one() - tail)
            })
            .collect();
        MatchPlan { lambda, slack, max_points, side_order: SideOrder::Alternate }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda <= Rat::one() {
            return Err(Error::malformed(format!("lambda = {} must exceed 1", self.lambda)));
        }
        if self.slack.len() < self.max_points {
            return Err(Error::malformed(format!(
                "schedule has {} entries for {} points",
                self.slack.len(),
                self.max_points
            )));
        }
        if let Some(first) = self.slack.first() {
            if *first <= Rat::one() {
                return Err(Error::malformed("schedule must start above 1"));
            }
        }
        for (k, w) in self.slack.windows(2).enumerate() {
            if w[0] >= w[1] {
                return Err(Error::malformed(format!("schedule is not increasing at step {k}")));
            }
        }
        if let Some(last) = self.slack.last() {
            if *last >= self.lambda {
                return Err(Error::malformed("schedule must stay below lambda"));
            }
        }
        Ok(())
    }

    fn side(&self, step: usize) -> Side {
        match self.side_order {
            SideOrder::Alternate if step % 2 == 1 => Side::Y,
            _ => Side::X,
        }
    }
}

/// Why the engine stopped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatchFailure {
    pub step: usize,
    pub side: Side,
    /// The point that could not be matched (index on `side`).
    pub point: usize,
    pub bound: Rat,
    pub reason: String,
    /// Pairs matched before the failing step.
    pub partial: Vec<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub enum MatchOutcome {
    Success { map: PartialMap, distortion: Rat },
    Failure(MatchFailure),
}

impl MatchOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, MatchOutcome::Success { .. })
    }
}

/// Builds a bijection between `min(max_points, |X|, |Y|)` points of `x` and
/// of `y`, alternating sides per the plan and adjoining at each step the
/// lowest-index unmatched point of that side. Witnesses are chosen by
/// [`check_almost_extension`]. A success is re-checked with
/// [`certify_bilip`] before it is returned.
pub fn almost_isometry(x: Arc<FiniteMetricSpace>, y: Arc<FiniteMetricSpace>, plan: &MatchPlan) -> Result<MatchOutcome> {
    plan.validate()?;
    let steps = plan.max_points.min(x.len()).min(y.len());
    let mut map = PartialMap::new(x.clone(), y.clone(), Vec::new())?;
    for step in 0..steps {
        let bound = &plan.slack[step];
        let side = plan.side(step);
        let (point, found) = match side {
            Side::X => {
                let point = (0..x.len()).find(|&i| map.image_of(i).is_none()).expect("unmatched X point");
                let pool: Vec<usize> = (0..y.len()).collect();
                (point, check_almost_extension(&map, point, &pool, bound)?.map(|w| (point, w.point)))
            }
            Side::Y => {
                let point = (0..y.len()).find(|&j| map.preimage_of(j).is_none()).expect("unmatched Y point");
                let pool: Vec<usize> = (0..x.len()).collect();
                let inv = map.inverse();
                (point, check_almost_extension(&inv, point, &pool, bound)?.map(|w| (w.point, point)))
            }
        };
        let Some((xi, yj)) = found else {
            return Ok(MatchOutcome::Failure(MatchFailure {
                step,
                side,
                point,
                bound: bound.clone(),
                reason: format!("no unmatched point on the other side keeps distortion below {bound}"),
                partial: map.pairs().to_vec(),
            }));
        };
        map = map.with_pair(xi, yj)?;
        assert!(distortion(&map).is_below(bound), "step {step} broke its bound");
    }
    match certify_bilip(&map, &plan.lambda) {
        Certificate::Ok { distortion } => Ok(MatchOutcome::Success { map, distortion }),
        Certificate::Counterexample(c) => {
            Err(Error::Precondition(format!("engine produced a map failing certification at pair {c:?}")))
        }
    }
}

/// The pair of matched points attaining the worst ratio.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CounterexamplePair {
    pub source: (usize, usize),
    pub target: (usize, usize),
    pub ratio: Distortion,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Certificate {
    Ok { distortion: Rat },
    Counterexample(CounterexamplePair),
}

/// `Ok` iff the map is strictly λ-bi-Lipschitz. Computed by its own pairwise
/// loop, cross-multiplying instead of dividing, so it does not share a code
/// path with [`distortion`].
pub fn certify_bilip(m: &PartialMap, lambda: &Rat) -> Certificate {
    let pairs = m.pairs();
    let mut worst: Option<CounterexamplePair> = None;
    let mut worst_num = Rat::one();
    let mut worst_den = Rat::one();
    for a in 0..pairs.len() {
        for b in a + 1..pairs.len() {
            let (x1, y1) = pairs[a];
            let (x2, y2) = pairs[b];
            let dx = m.source.dist(x1, x2);
            let dy = m.target.dist(y1, y2);
            let (num, den) = if dy >= dx { (dy, dx) } else { (dx, dy) };
            if den.is_zero() {
                if !num.is_zero() {
                    return Certificate::Counterexample(CounterexamplePair {
                        source: (x1, x2),
                        target: (y1, y2),
                        ratio: Distortion::Infinite,
                    });
                }
                continue;
            }
            // num/den > worst_num/worst_den
            if num * &worst_den > &worst_num * den || worst.is_none() {
                worst_num = num.clone();
                worst_den = den.clone();
                worst = Some(CounterexamplePair {
                    source: (x1, x2),
                    target: (y1, y2),
                    ratio: Distortion::Finite(num / den),
                });
            }
        }
    }
    // num/den < lambda  <=>  num < lambda * den
    if worst_num < lambda * &worst_den {
        Certificate::Ok { distortion: worst_num / worst_den }
    } else {
        Certificate::Counterexample(worst.expect("ratio >= lambda > 1 needs a pair"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn two_points(d: Rat) -> Arc<FiniteMetricSpace> {
        Arc::new(FiniteMetricSpace::from_fn(2, |_, _| d.clone()).unwrap())
    }

    #[test]
    fn geometric_schedule_values() {
        let plan = MatchPlan::geometric(rat(2, 1), 3);
        assert_eq!(plan.slack, vec![rat(3, 2), rat(7, 4), rat(15, 8)]);
        plan.validate().unwrap();
    }

    #[test]
    fn bad_plans_are_rejected() {
        assert!(MatchPlan::geometric(rat(1, 1), 2).validate().is_err());
        let mut p = MatchPlan::geometric(rat(2, 1), 3);
        p.slack.swap(0, 1);
        assert!(p.validate().is_err());
        let mut p = MatchPlan::geometric(rat(2, 1), 3);
        p.slack.pop();
        assert!(p.validate().is_err());
        let mut p = MatchPlan::geometric(rat(2, 1), 2);
        p.slack[1] = rat(2, 1);
        assert!(p.validate().is_err());
    }

    #[test]
    fn identity_matching() {
        let s = Arc::new(FiniteMetricSpace::from_fn(5, |i, j| rat((i + j) as i64 + 2, 1)).unwrap());
        let out = almost_isometry(s.clone(), s, &MatchPlan::geometric(rat(101, 100), 5)).unwrap();
        match out {
            MatchOutcome::Success { map, distortion } => {
                assert_eq!(distortion, Rat::one());
                assert_eq!(map.len(), 5);
                assert!(map.pairs().iter().all(|&(a, b)| a == b));
            }
            MatchOutcome::Failure(f) => panic!("{f:?}"),
        }
    }

    #[test]
    fn far_scale_fails_at_step_one() {
        let out = almost_isometry(two_points(rat(1, 1)), two_points(rat(10, 1)), &MatchPlan::geometric(rat(3, 2), 2))
            .unwrap();
        match out {
            MatchOutcome::Failure(f) => {
                assert_eq!(f.step, 1);
                assert_eq!(f.side, Side::Y);
                assert_eq!(f.partial, vec![(0, 0)]);
            }
            MatchOutcome::Success { .. } => panic!("should fail"),
        }
    }

    #[test]
    fn certify_is_strict_at_the_boundary() {
        let m = PartialMap::new(two_points(rat(1, 1)), two_points(rat(3, 2)), vec![(0, 0), (1, 1)]).unwrap();
        assert_eq!(
            certify_bilip(&m, &rat(3, 2)),
            Certificate::Counterexample(CounterexamplePair {
                source: (0, 1),
                target: (0, 1),
                ratio: Distortion::Finite(rat(3, 2)),
            })
        );
        assert_eq!(certify_bilip(&m, &rat(8, 5)), Certificate::Ok { distortion: rat(3, 2) });
    }

    #[test]
    fn certify_identity() {
        let s = two_points(rat(5, 7));
        assert_eq!(
            certify_bilip(&PartialMap::identity(s, 2), &rat(101, 100)),
            Certificate::Ok { distortion: Rat::one() }
        );
    }
}
