//! Finite rational approximations `A_0 ⊆ A_1 ⊆ ...` of the Urysohn space.
//!
//! `A_{n+1}` is `A_n` plus one new point for every rational type over `A_n`
//! whose values are positive, at most `n + 1`, and have denominator at most
//! `n + 1`. Two new points sit at distance `min_x p1(x) + p2(x)`.
//!
//! Growth is explosive (`|A_2| = 16`, while `A_3` already needs more than a
//! million new points), so every construction runs under a point budget and
//! fails loudly when the budget would be exceeded. The sampled builder adds a
//! seeded subset of types instead and marks the level as not faithful.

use std::collections::{BTreeSet, HashMap};

use num::bigint::BigInt;
use num::ToPrimitive;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extension::MetricType;
use crate::metric::{require_metric, FiniteMetricSpace};
use crate::rational::Rat;

pub const DEFAULT_POINT_BUDGET: usize = 20_000;

/// All rationals `a/b` with `1 <= b <= denom_bound` and `0 < a/b <= value_bound`,
/// ascending and without repetition.
pub fn candidate_values(value_bound: &Rat, denom_bound: u64) -> Vec<Rat> {
    let mut set = BTreeSet::new();
    for b in 1..=denom_bound {
        let scaled = value_bound * Rat::from_int(b);
        let top = (scaled.numer() / scaled.denom()).to_u64().unwrap_or(0);
        for a in 1..=top {
            set.insert(Rat::new(a, b));
        }
    }
    set.into_iter().collect()
}

/// Depth-first type search over a level; values at each point are tried in
/// the order given by `order` (ascending for the canonical enumeration).
struct TypeSearch<'a> {
    level: &'a FiniteMetricSpace,
    values: &'a [Rat],
}

impl TypeSearch<'_> {
    /// Index range into `values` admissible for point `i` given `prefix`.
    fn admissible(&self, prefix: &[Rat]) -> std::ops::Range<usize> {
        let i = prefix.len();
        let mut lo: Option<Rat> = None;
        let mut hi: Option<Rat> = None;
        for (j, pj) in prefix.iter().enumerate() {
            let d = self.level.dist(i, j);
            let lower = std::cmp::max(pj - d, d - pj);
            let upper = pj + d;
            if lo.as_ref().is_none_or(|l| lower > *l) {
                lo = Some(lower);
            }
            if hi.as_ref().is_none_or(|h| upper < *h) {
                hi = Some(upper);
            }
        }
        let start = lo.map_or(0, |l| self.values.partition_point(|v| *v < l));
        let end = hi.map_or(self.values.len(), |h| self.values.partition_point(|v| *v <= h));
        start..end.max(start)
    }

    /// Canonical lexicographic enumeration, stopping after `limit` types.
    /// Returns `false` when stopped early.
    fn enumerate(&self, limit: usize, out: &mut Vec<MetricType>) -> bool {
        let mut prefix = Vec::with_capacity(self.level.len());
        self.descend(&mut prefix, limit, out)
    }

    fn descend(&self, prefix: &mut Vec<Rat>, limit: usize, out: &mut Vec<MetricType>) -> bool {
        if prefix.len() == self.level.len() {
            if out.len() >= limit {
                return false;
            }
            out.push(MetricType::new(prefix.clone()));
            return true;
        }
        for k in self.admissible(prefix) {
            prefix.push(self.values[k].clone());
            let more = self.descend(prefix, limit, out);
            prefix.pop();
            if !more {
                return false;
            }
        }
        true
    }

    /// One randomized descent with backtracking; `None` if the level admits
    /// no type at all.
    fn random_type(&self, rng: &mut ChaCha8Rng) -> Option<MetricType> {
        let mut prefix = Vec::with_capacity(self.level.len());
        self.random_descend(&mut prefix, rng).then(|| MetricType::new(prefix))
    }

    fn random_descend(&self, prefix: &mut Vec<Rat>, rng: &mut ChaCha8Rng) -> bool {
        if prefix.len() == self.level.len() {
            return true;
        }
        let mut choices: Vec<usize> = self.admissible(prefix).collect();
        choices.shuffle(rng);
        for k in choices {
            prefix.push(self.values[k].clone());
            if self.random_descend(prefix, rng) {
                return true;
            }
            prefix.pop();
        }
        false
    }
}

/// Every type over `level` with values in [`candidate_values`], in
/// lexicographic order. The empty level has exactly one (empty) type.
pub fn enumerate_rational_types(level: &FiniteMetricSpace, value_bound: &Rat, denom_bound: u64) -> Vec<MetricType> {
    enumerate_rational_types_limited(level, value_bound, denom_bound, usize::MAX)
        .expect("unbounded enumeration cannot exceed its limit")
}

/// As [`enumerate_rational_types`], failing with a budget error as soon as
/// more than `limit` types exist.
pub fn enumerate_rational_types_limited(
    level: &FiniteMetricSpace,
    value_bound: &Rat,
    denom_bound: u64,
    limit: usize,
) -> Result<Vec<MetricType>> {
    let values = candidate_values(value_bound, denom_bound);
    let search = TypeSearch { level, values: &values };
    let mut out = Vec::new();
    if search.enumerate(limit, &mut out) {
        Ok(out)
    } else {
        Err(Error::Budget {
            what: "rational type enumeration",
            needed: format!("more than {limit} types"),
            budget: limit,
        })
    }
}

/// The growing sequence of levels. Only the largest space is stored; level
/// `n` is its first `sizes[n]` points.
#[derive(Clone, Debug)]
pub struct UrysohnLevels {
    space: FiniteMetricSpace,
    sizes: Vec<usize>,
    faithful: Vec<bool>,
}

impl UrysohnLevels {
    /// `A_0`, a single point.
    pub fn singleton() -> Self {
        UrysohnLevels { space: FiniteMetricSpace::singleton("p0"), sizes: vec![1], faithful: vec![true] }
    }

    /// Assembles levels from explicit spaces, each of which must be a prefix
    /// of the next. All levels are assumed faithful.
    pub fn from_levels(levels: Vec<FiniteMetricSpace>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::malformed("no levels given"));
        }
        for (n, w) in levels.windows(2).enumerate() {
            if !w[0].is_prefix_of(&w[1]) {
                return Err(Error::malformed(format!("level {n} is not a prefix of level {}", n + 1)));
            }
        }
        let sizes = levels.iter().map(FiniteMetricSpace::len).collect();
        let faithful = vec![true; levels.len()];
        Ok(UrysohnLevels { space: levels.into_iter().next_back().unwrap(), sizes, faithful })
    }

    /// Number of levels `A_0..A_n` held.
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn level(&self, n: usize) -> FiniteMetricSpace {
        self.space.subspace(&(0..self.sizes[n]).collect::<Vec<_>>())
    }

    pub fn level_size(&self, n: usize) -> usize {
        self.sizes[n]
    }

    pub fn top(&self) -> &FiniteMetricSpace {
        &self.space
    }

    /// Whether level `n` was built from the complete type enumeration.
    pub fn is_faithful(&self, n: usize) -> bool {
        self.faithful[n]
    }

    /// Value and denominator bound used to grow level `n` (both `n + 1`).
    pub fn bounds(n: usize) -> (Rat, u64) {
        (Rat::from_int(n as u64 + 1), n as u64 + 1)
    }

    fn push_level(&self, types: &[MetricType], faithful: bool) -> Result<UrysohnLevels> {
        let base = &self.space;
        let n_old = base.len();
        let n_new = types.len();
        let next_index = self.len();
        // Rows for the new points; row a holds distances to old points then to
        // the other new points.
        let new_rows: Vec<Vec<Rat>> = types
            .par_iter()
            .enumerate()
            .map(|(a, ta)| {
                let mut row = ta.p.clone();
                for (b, tb) in types.iter().enumerate() {
                    if a == b {
                        row.push(Rat::zero());
                        continue;
                    }
                    let d = ta.p.iter().zip(&tb.p).map(|(x, y)| x + y).min();
                    // Distinct types always give a positive minimum; an empty
                    // base cannot hold two distinct types.
                    let d = d.expect("two distinct types over an empty level");
                    assert!(!d.is_zero(), "distinct types at distance zero");
                    row.push(d);
                }
                row
            })
            .collect();
        let mut d: Vec<Vec<Rat>> = base.matrix().to_vec();
        for (i, row) in d.iter_mut().enumerate() {
            row.extend(new_rows.iter().map(|r| r[i].clone()));
        }
        d.extend(new_rows);
        let mut labels = base.labels().to_vec();
        labels.extend((0..n_new).map(|a| format!("L{next_index}.{a}")));
        let space = FiniteMetricSpace::new(labels, d)?;

        let mut sizes = self.sizes.clone();
        sizes.push(n_old + n_new);
        let mut flags = self.faithful.clone();
        flags.push(faithful && self.faithful.iter().all(|&f| f));
        Ok(UrysohnLevels { space, sizes, faithful: flags })
    }

    fn check_budget(&self, needed: usize, budget: usize) -> Result<()> {
        if needed > budget {
            return Err(Error::Budget { what: "Urysohn level", needed: format!("{needed} points"), budget });
        }
        Ok(())
    }
}

/// Faithfully grows the sequence by one level, failing if the new level
/// would exceed `budget` points.
pub fn build_level(levels: &UrysohnLevels, budget: usize) -> Result<UrysohnLevels> {
    let n = levels.len() - 1;
    let old = levels.top().len();
    levels.check_budget(old, budget)?;
    let (vb, db) = UrysohnLevels::bounds(n);
    let room = budget - old;
    let types = enumerate_rational_types_limited(levels.top(), &vb, db, room).map_err(|_| Error::Budget {
        what: "Urysohn level",
        needed: format!("more than {budget} points"),
        budget,
    })?;
    let next = levels.push_level(&types, true)?;
    debug_assert!(require_metric(next.top()).is_ok());
    Ok(next)
}

/// Grows the sequence by one level realizing at most `sample` distinct types
/// drawn by seeded random descent. The result is flagged as not faithful.
pub fn build_level_sampled(levels: &UrysohnLevels, sample: usize, seed: u64, budget: usize) -> Result<UrysohnLevels> {
    let n = levels.len() - 1;
    levels.check_budget(levels.top().len() + sample, budget)?;
    let (vb, db) = UrysohnLevels::bounds(n);
    let values = candidate_values(&vb, db);
    let search = TypeSearch { level: levels.top(), values: &values };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found = BTreeSet::new();
    // Small levels may have fewer than `sample` types; give up after a
    // generous number of repeats.
    let mut misses = 0usize;
    while found.len() < sample && misses < 64 * sample.max(1) {
        match search.random_type(&mut rng) {
            Some(t) if found.insert(t.clone()) => misses = 0,
            Some(_) => misses += 1,
            None => break,
        }
    }
    let types: Vec<MetricType> = found.into_iter().collect();
    levels.push_level(&types, false)
}

/// Builds `A_0..A_levels` faithfully.
pub fn build_levels(levels: usize, budget: usize) -> Result<UrysohnLevels> {
    let mut out = UrysohnLevels::singleton();
    for _ in 0..levels {
        out = build_level(&out, budget)?;
    }
    Ok(out)
}

/// Checks that every type over level `n` (with the level-`n` bounds) is
/// realized exactly by some point of level `n + 1`. Returns the first
/// unrealized type in canonical order.
pub fn check_level_property(levels: &UrysohnLevels, n: usize, enumeration_budget: usize) -> Result<Option<MetricType>> {
    if n + 1 >= levels.len() {
        return Err(Error::Precondition(format!("level {} does not exist ({} levels held)", n + 1, levels.len())));
    }
    let size = levels.level_size(n);
    let base = levels.level(n);
    let (vb, db) = UrysohnLevels::bounds(n);
    let types = enumerate_rational_types_limited(&base, &vb, db, enumeration_budget)?;
    let space = levels.top();
    let mut realized: HashMap<Vec<Rat>, usize> = HashMap::new();
    for y in 0..levels.level_size(n + 1) {
        let profile: Vec<Rat> = (0..size).map(|x| space.dist(y, x).clone()).collect();
        realized.entry(profile).or_insert(y);
    }
    Ok(types.into_iter().find(|t| !realized.contains_key(&t.p)))
}

/// Largest denominator over all distances, handy for reports.
pub fn max_denominator(space: &FiniteMetricSpace) -> BigInt {
    space.matrix().iter().flatten().map(|r| r.denom().clone()).max().unwrap_or_default()
}
