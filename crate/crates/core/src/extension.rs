//! Metric types, one-point realization, and bi-Lipschitz extension of finite
//! partial maps by a single point.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{path_completion, WeightedGraph};
use crate::metric::{distortion, pair_ratio, Distortion, FiniteMetricSpace, PartialMap};
use crate::rational::Rat;

/// A candidate distance vector of a new point over a base space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MetricType {
    pub p: Vec<Rat>,
}

impl MetricType {
    pub fn new(p: Vec<Rat>) -> Self {
        MetricType { p }
    }

    /// Checks `p > 0` and `|p(x) - p(y)| <= d(x,y) <= p(x) + p(y)`, returning
    /// the first offending pair.
    pub fn check(&self, base: &FiniteMetricSpace) -> Result<()> {
        if self.p.len() != base.len() {
            return Err(Error::malformed(format!(
                "type has {} values but the space has {} points",
                self.p.len(),
                base.len()
            )));
        }
        for (x, px) in self.p.iter().enumerate() {
            if !px.is_positive() {
                return Err(Error::InvalidType { x, y: x, detail: format!("p({x}) = {px} is not positive") });
            }
        }
        for x in 0..self.p.len() {
            for y in x + 1..self.p.len() {
                let (px, py, d) = (&self.p[x], &self.p[y], base.dist(x, y));
                if (px - py).abs() > *d {
                    return Err(Error::InvalidType { x, y, detail: format!("|{px} - {py}| exceeds d = {d}") });
                }
                if px + py < *d {
                    return Err(Error::InvalidType { x, y, detail: format!("{px} + {py} is below d = {d}") });
                }
            }
        }
        Ok(())
    }
}

/// Adds one point at distance `t.p[x]` from every `x`.
pub fn realize_type(space: &FiniteMetricSpace, t: &MetricType) -> Result<FiniteMetricSpace> {
    t.check(space)?;
    Ok(space.with_point(format!("y{}", space.len()), &t.p))
}

/// Result of [`extend_one_point`].
#[derive(Clone, Debug)]
pub struct OnePointExtension {
    /// The extended map; its target is the old target plus the new point.
    pub map: PartialMap,
    /// Index of the new point in the extended target.
    pub new_point: usize,
    /// The constant strictly between the old distortion and `theta`.
    pub lambda: Rat,
}

/// Extends `m` to the source point `x_new` by adjoining a fresh point to the
/// target.
///
/// The fresh point gets `lambda * d(x_new, x)` to the image of every matched
/// `x`, with `lambda` the midpoint of `distortion(m)` and `theta`; the target
/// is then closed under shortest paths. The old target metric is untouched
/// and the extended map has distortion at most `lambda < theta`.
///
/// An empty map has nothing to anchor against, so the new point is placed at
/// the target's diameter (or 1) from every old point.
pub fn extend_one_point(m: &PartialMap, x_new: usize, theta: &Rat) -> Result<OnePointExtension> {
    if x_new >= m.source.len() {
        return Err(Error::malformed(format!("source point {x_new} is out of range")));
    }
    if m.image_of(x_new).is_some() {
        return Err(Error::Precondition(format!("source point {x_new} is already mapped")));
    }
    if *theta <= Rat::one() {
        return Err(Error::Precondition(format!("theta = {theta} must exceed 1")));
    }
    let current = distortion(m);
    let Some(cur) = current.finite().filter(|d| *d < theta) else {
        return Err(Error::DistortionTooLarge { distortion: current.to_string(), bound: theta.clone() });
    };
    let lambda = Rat::midpoint(cur, theta);

    let target = &m.target;
    let n = target.len();
    let new_point = n;
    let extended = if m.is_empty() {
        let r = if n <= 1 { Rat::one() } else { target.diameter() };
        target.with_point(format!("y{n}"), &vec![r; n])
    } else {
        let mut edges: Vec<(usize, usize, Rat)> = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j, target.dist(i, j).clone()));
            }
        }
        for &(x, y) in m.pairs() {
            edges.push((y, new_point, &lambda * m.source.dist(x_new, x)));
        }
        let mut labels = target.labels().to_vec();
        labels.push(format!("y{n}"));
        path_completion(&WeightedGraph::new(labels, edges)?)?
    };
    debug_assert!(target.is_prefix_of(&extended));

    let mut pairs = m.pairs().to_vec();
    pairs.push((x_new, new_point));
    let map = PartialMap::new(m.source.clone(), Arc::new(extended), pairs)?;
    Ok(OnePointExtension { map, new_point, lambda })
}

/// A pool point that extends a map, with the worst ratio it produces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub point: usize,
    pub worst_ratio: Rat,
}

/// Worst ratio of `f ∪ {(x_new, y)}` over the new pairs only.
fn new_pair_worst(f: &PartialMap, x_new: usize, y: usize) -> Distortion {
    f.pairs()
        .iter()
        .map(|&(x, fx)| pair_ratio(f.source.dist(x_new, x), f.target.dist(y, fx)))
        .max()
        .unwrap_or(Distortion::Finite(Rat::one()))
}

/// Every point of `pool` outside `ran f` for which `f ∪ {(x_new, y)}` stays
/// strictly below `lambda`, with the overall distortion it yields.
pub fn extension_candidates(f: &PartialMap, x_new: usize, pool: &[usize], lambda: &Rat) -> Vec<Witness> {
    let base = distortion(f);
    pool.iter()
        .copied()
        .filter(|&y| f.preimage_of(y).is_none())
        .filter_map(|y| {
            let worst = std::cmp::max(new_pair_worst(f, x_new, y), base.clone());
            match worst {
                Distortion::Finite(r) if r < *lambda => Some(Witness { point: y, worst_ratio: r }),
                _ => None,
            }
        })
        .collect()
}

/// Exhaustive search of `pool` for a point extending `f` at `x_new` with
/// distortion `< lambda`. Among working points the one with the smallest
/// resulting distortion wins, ties going to the lowest index. `None` is a
/// certificate that no pool point works.
pub fn check_almost_extension(f: &PartialMap, x_new: usize, pool: &[usize], lambda: &Rat) -> Result<Option<Witness>> {
    if x_new >= f.source.len() {
        return Err(Error::malformed(format!("source point {x_new} is out of range")));
    }
    if f.image_of(x_new).is_some() {
        return Err(Error::Precondition(format!("source point {x_new} is already mapped")));
    }
    if let Some(&y) = pool.iter().find(|&&y| y >= f.target.len()) {
        return Err(Error::malformed(format!("pool point {y} is out of range")));
    }
    let current = distortion(f);
    if !current.is_below(lambda) {
        return Err(Error::DistortionTooLarge { distortion: current.to_string(), bound: lambda.clone() });
    }
    Ok(extension_candidates(f, x_new, pool, lambda)
        .into_iter()
        .min_by(|a, b| a.worst_ratio.cmp(&b.worst_ratio).then(a.point.cmp(&b.point))))
}
