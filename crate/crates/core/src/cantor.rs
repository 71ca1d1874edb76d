//! Truncated Cantor-tree subspaces `D_A`, gap conditions between integer
//! sets, and spectrum-gap incomparability certificates.
//!
//! A branch space over a level set `A` keeps, at depth `N`, every bit string
//! of length `N` whose ones occur only at positions in `A`. Two branches that
//! first differ at position `i` are `base^-i` apart, so the distances that
//! occur are exactly `{base^-a : a ∈ A, a < N}`.
//!
//! Everything here is certified "at depth `N`" only.

use std::collections::BTreeSet;

use num::bigint::BigUint;
use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{distortion, Distortion, FiniteMetricSpace, PartialMap};
use crate::rational::Rat;

pub const DEFAULT_BRANCH_BUDGET: usize = 1 << 12;
pub const DEFAULT_MAGNITUDE_BITS: u64 = 1 << 16;

pub type LevelSet = BTreeSet<usize>;
pub type IntSet = BTreeSet<BigUint>;

/// The branches of a truncated `T_A`, lexicographically ordered.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchSpace {
    levels: Vec<usize>,
    depth: usize,
    base: u32,
    branches: Vec<Vec<bool>>,
}

impl BranchSpace {
    /// Branching positions below the depth, ascending.
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn branches(&self) -> &[Vec<bool>] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    /// Length of the longest common prefix of two branches (`depth` if equal).
    pub fn common_prefix(&self, i: usize, j: usize) -> usize {
        let (a, b) = (&self.branches[i], &self.branches[j]);
        a.iter().zip(b).position(|(x, y)| x != y).unwrap_or(self.depth)
    }

    pub fn dist(&self, i: usize, j: usize) -> Rat {
        if i == j {
            Rat::zero()
        } else {
            Rat::from_int(self.base).pow(-(self.common_prefix(i, j) as i32))
        }
    }

    pub fn to_space(&self) -> FiniteMetricSpace {
        let labels = self.branches.iter().map(|b| b.iter().map(|&bit| if bit { '1' } else { '0' }).collect()).collect();
        let n = self.len();
        let d = (0..n).map(|i| (0..n).map(|j| self.dist(i, j)).collect()).collect();
        FiniteMetricSpace::new(labels, d).expect("branch distances are well formed")
    }
}

/// Builds the depth-`depth` truncation of `D_A` with `d = base^-Δ`.
pub fn branch_space(levels: &LevelSet, depth: usize, base: u32, budget: usize) -> Result<BranchSpace> {
    if base < 2 {
        return Err(Error::malformed(format!("base {base} must be at least 2")));
    }
    if depth == 0 {
        return Err(Error::malformed("depth must be at least 1"));
    }
    let active: Vec<usize> = levels.range(..depth).copied().collect();
    let k = active.len();
    if k >= usize::BITS as usize || (1usize << k) > budget {
        return Err(Error::Budget { what: "branch space", needed: format!("2^{k} points"), budget });
    }
    let branches = (0..1usize << k)
        .map(|code| {
            let mut bits = vec![false; depth];
            // The smallest level is the most significant bit, which makes
            // numeric order lexicographic order.
            for (t, &pos) in active.iter().enumerate() {
                bits[pos] = (code >> (k - 1 - t)) & 1 == 1;
            }
            bits
        })
        .collect();
    Ok(BranchSpace { levels: active, depth, base, branches })
}

/// The two readings of the gap condition between integer sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GapForm {
    /// `a/b > n` or `b/a > n`.
    Ratio,
    /// `|a - b| > n`.
    Difference,
}

fn pair_separated(a: &BigUint, b: &BigUint, n: &BigUint, form: GapForm) -> bool {
    match form {
        GapForm::Ratio => *a > n * b || *b > n * a,
        GapForm::Difference => {
            let diff = if a >= b { a - b } else { b - a };
            diff > *n
        }
    }
}

/// Least `k <= search_bound` such that every `a ∈ A`, `b ∈ B` with
/// `a, b > k` are separated in the given form, and both sets still have an
/// element above `k` (a `k` past the truncation tests nothing and is not
/// accepted). `None` when no such `k` exists.
pub fn check_gap_condition(a: &IntSet, b: &IntSet, n: u64, form: GapForm, search_bound: &BigUint) -> Option<BigUint> {
    let n = BigUint::from(n);
    // Every failing pair forces k >= min(a, b); separation is monotone in k.
    let mut k = BigUint::zero();
    for x in a {
        for y in b {
            if !pair_separated(x, y, &n, form) {
                let m = std::cmp::min(x, y);
                if *m > k {
                    k = m.clone();
                }
            }
        }
    }
    let alive = |s: &IntSet| s.range((std::ops::Bound::Excluded(&k), std::ops::Bound::Unbounded)).next().is_some();
    (k <= *search_bound && alive(a) && alive(b)).then_some(k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Raw,
    Square,
    Factorial,
}

/// `{a^2}` or `{a!}` of every member, refusing results wider than
/// `max_bits`.
pub fn gap_transform(set: &IntSet, kind: Transform, max_bits: u64) -> Result<IntSet> {
    let too_big = |bits: u64| Error::Budget {
        what: "transformed element",
        needed: format!("{bits} bits"),
        budget: max_bits as usize,
    };
    match kind {
        Transform::Raw => Ok(set.clone()),
        Transform::Square => set
            .iter()
            .map(|a| {
                let sq = a * a;
                if sq.bits() > max_bits {
                    Err(too_big(sq.bits()))
                } else {
                    Ok(sq)
                }
            })
            .collect(),
        Transform::Factorial => {
            let mut out = IntSet::new();
            let mut acc = BigUint::one();
            let mut at = BigUint::zero();
            // Ascending walk shares the running product.
            for a in set {
                while at < *a {
                    at += 1u32;
                    acc *= &at;
                    if acc.bits() > max_bits {
                        return Err(too_big(acc.bits()));
                    }
                }
                out.insert(acc.clone());
            }
            Ok(out)
        }
    }
}

/// A family of integer sets with their pairwise intersections.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapFamily {
    #[serde(serialize_with = "ser_int_sets")]
    pub members: Vec<IntSet>,
    pub transform: Transform,
    pub intersections: Vec<Intersection>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Intersection {
    pub i: usize,
    pub j: usize,
    #[serde(serialize_with = "ser_int_set")]
    pub common: IntSet,
}

// Integers go out as decimal strings; JSON numbers would lose precision.
fn ser_int_set<S: serde::Serializer>(set: &IntSet, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(set.iter().map(|x| x.to_string()))
}

fn ser_int_sets<S: serde::Serializer>(sets: &[IntSet], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(sets.iter().map(|set| set.iter().map(|x| x.to_string()).collect::<Vec<_>>()))
}

impl GapFamily {
    fn from_members(members: Vec<IntSet>, transform: Transform) -> Self {
        let mut intersections = Vec::new();
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                let common = members[i].intersection(&members[j]).cloned().collect();
                intersections.push(Intersection { i, j, common });
            }
        }
        GapFamily { members, transform, intersections }
    }

    /// Applies a transform to every member; only raw families transform.
    pub fn transformed(&self, kind: Transform, max_bits: u64) -> Result<GapFamily> {
        if self.transform != Transform::Raw {
            return Err(Error::Precondition("family is already transformed".into()));
        }
        let members = self.members.iter().map(|m| gap_transform(m, kind, max_bits)).collect::<Result<_>>()?;
        Ok(GapFamily::from_members(members, kind))
    }
}

/// `count` pairwise almost disjoint sets of positive integers `<= element_bound`.
///
/// Member `j` is the set of codes `2^L + value(prefix)` of all prefixes of an
/// infinite binary branch that starts with `j` written in `ceil(log2 count)`
/// bits and continues with seeded random bits. Distinct branches share only
/// the prefixes before they split, so intersections have at most
/// `ceil(log2 count)` elements.
pub fn ad_family(count: usize, element_bound: u64, seed: u64) -> Result<GapFamily> {
    if count < 2 {
        return Err(Error::malformed("an almost disjoint family needs at least 2 members"));
    }
    let width = usize::BITS - (count - 1).leading_zeros();
    let max_len = 63 - element_bound.max(1).leading_zeros();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = Vec::with_capacity(count);
    for j in 0..count {
        let mut code: u64 = 1;
        let mut set = IntSet::new();
        for len in 0..=max_len {
            if code <= element_bound {
                set.insert(BigUint::from(code));
            }
            if len == max_len {
                break;
            }
            let bit = if len < width { (j >> (width - 1 - len)) & 1 == 1 } else { rng.gen::<bool>() };
            code = 2 * code + u64::from(bit);
        }
        members.push(set);
    }
    for i in 0..count {
        for j in i + 1..count {
            if members[i] == members[j] {
                return Err(Error::Precondition(format!(
                    "members {i} and {j} coincide below element bound {element_bound}"
                )));
            }
        }
    }
    Ok(GapFamily::from_members(members, Transform::Raw))
}

/// Exhaustive check behind a certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossRatioReport {
    pub source_points: usize,
    pub target_points: usize,
    /// Pairs of `D_A` at distance `<= base^-k`.
    pub small_source_pairs: usize,
    /// Distinct pairs of `D_B`.
    pub target_pairs: usize,
    pub comparisons: usize,
    /// Minimum over compared pairs of `max(r, 1/r)`; must exceed `n`.
    pub tightest_ratio: Option<Rat>,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Incomparability {
    Certificate {
        a: Vec<usize>,
        b: Vec<usize>,
        n: u64,
        base: u32,
        depth: usize,
        k: usize,
        check: CrossRatioReport,
    },
    Refuted {
        a: Vec<usize>,
        b: Vec<usize>,
        n: u64,
        base: u32,
        depth: usize,
        /// A level of `A` with a level of `B` too close to it, the last one
        /// that forces the threshold past every level of `A`.
        blocking: Option<(usize, usize)>,
    },
}

/// Searches the least `k` such that every `D_A` distance `base^-a <= base^-k`
/// is more than a factor `n` away from every `D_B` distance, then verifies it
/// over all point pairs of both truncations.
pub fn incomparability_certificate(
    a: &LevelSet,
    b: &LevelSet,
    n: u64,
    base: u32,
    depth: usize,
    budget: usize,
) -> Result<Incomparability> {
    if n < 2 {
        return Err(Error::malformed("n must be at least 2"));
    }
    if base < 2 {
        return Err(Error::malformed(format!("base {base} must be at least 2")));
    }
    let a_levels: Vec<usize> = a.range(..depth).copied().collect();
    let b_levels: Vec<usize> = b.range(..depth).copied().collect();
    let base_big = BigUint::from(base);
    let n_big = BigUint::from(n);
    // base^|a-b| > n, with equal levels never separated.
    let separated = |x: usize, y: usize| x != y && base_big.pow(x.abs_diff(y) as u32) > n_big;

    let mut k = 0usize;
    let mut blocking = None;
    for &x in &a_levels {
        if let Some(&y) = b_levels.iter().find(|&&y| !separated(x, y)) {
            k = x + 1;
            blocking = Some((x, y));
        }
    }
    if !a_levels.iter().any(|&x| x >= k) {
        return Ok(Incomparability::Refuted { a: a_levels, b: b_levels, n, base, depth, blocking });
    }
    let space_a = branch_space(a, depth, base, budget)?;
    let space_b = branch_space(b, depth, base, budget)?;
    let check = verify_cross_ratios(&space_a, &space_b, n, k);
    Ok(Incomparability::Certificate { a: a_levels, b: b_levels, n, base, depth, k, check })
}

/// For every pair of `D_A` at distance `<= base^-k` and every distinct pair
/// of `D_B`, the distance ratio must lie outside `[1/n, n]`.
pub fn verify_cross_ratios(space_a: &BranchSpace, space_b: &BranchSpace, n: u64, k: usize) -> CrossRatioReport {
    let threshold = Rat::from_int(space_a.base()).pow(-(k as i32));
    let small: Vec<Rat> = pairs(space_a.len()).map(|(i, j)| space_a.dist(i, j)).filter(|d| *d <= threshold).collect();
    let target: Vec<Rat> = pairs(space_b.len()).map(|(i, j)| space_b.dist(i, j)).collect();
    let n_rat = Rat::from_int(n);
    let mut tightest: Option<Rat> = None;
    for s in &small {
        for t in &target {
            let r = t / s;
            let r = if r < Rat::one() { r.recip() } else { r };
            if tightest.as_ref().is_none_or(|cur| r < *cur) {
                tightest = Some(r);
            }
        }
    }
    let ok = !small.is_empty() && tightest.as_ref().is_none_or(|t| *t > n_rat);
    CrossRatioReport {
        source_points: space_a.len(),
        target_points: space_b.len(),
        small_source_pairs: small.len(),
        target_pairs: target.len(),
        comparisons: small.len() * target.len(),
        tightest_ratio: tightest,
        ok,
    }
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// Image of a base-3 branch space in the middle-third Cantor set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LineEmbedding {
    pub points: Vec<Rat>,
    pub distortion: Distortion,
}

/// Maps branch `η` to `Σ 2η_i / 3^(i+1)` and measures the exact distortion
/// against `|x - y|`.
pub fn embed_cantor_into_line(space: &BranchSpace) -> Result<LineEmbedding> {
    if space.base() != 3 {
        return Err(Error::malformed(format!("line embedding needs base 3, got {}", space.base())));
    }
    let points: Vec<Rat> = space
        .branches()
        .iter()
        .map(|bits| {
            bits.iter()
                .enumerate()
                .filter(|(_, &bit)| bit)
                .map(|(i, _)| Rat::from_int(2) * Rat::from_int(3).pow(-(i as i32 + 1)))
                .sum()
        })
        .collect();
    let line = FiniteMetricSpace::from_fn(points.len(), |i, j| (&points[i] - &points[j]).abs())?;
    let source = std::sync::Arc::new(space.to_space());
    let map = PartialMap::identity(source, space.len());
    let map = PartialMap::new(map.source.clone(), std::sync::Arc::new(line), map.pairs().to_vec())?;
    Ok(LineEmbedding { distortion: distortion(&map), points })
}

/// Even integers below `bound`.
pub fn evens_below(bound: u64) -> IntSet {
    (0..bound).filter(|x| x % 2 == 0).map(BigUint::from).collect()
}

pub fn odds_below(bound: u64) -> IntSet {
    (0..bound).filter(|x| x % 2 == 1).map(BigUint::from).collect()
}

/// Elements of an integer set that fit a level index, for use as `A` in
/// [`branch_space`].
pub fn as_levels(set: &IntSet, below: usize) -> LevelSet {
    set.iter()
        .filter(|x| **x < BigUint::from(below))
        .map(|x| x.to_u64_digits().first().copied().unwrap_or(0) as usize)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{is_ultrametric, spectrum};
    use crate::rational::rat;

    fn levels(xs: &[usize]) -> LevelSet {
        xs.iter().copied().collect()
    }

    fn ints(xs: &[u64]) -> IntSet {
        xs.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn no_levels_gives_one_point() {
        let s = branch_space(&levels(&[]), 4, 2, 16).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.branches()[0], vec![false; 4]);
    }

    #[test]
    fn dyadic_example() {
        let s = branch_space(&levels(&[1, 3]), 5, 2, 16).unwrap();
        assert_eq!(s.len(), 4);
        let m = s.to_space();
        assert_eq!(spectrum(&m), vec![rat(1, 8), rat(1, 2)]);
        assert!(is_ultrametric(&m));
        assert_eq!(m.labels(), ["00000", "00010", "01000", "01010"]);
    }

    #[test]
    fn ternary_example() {
        let s = branch_space(&levels(&[0, 1, 2]), 3, 3, 16).unwrap();
        assert_eq!(s.len(), 8);
        assert_eq!(spectrum(&s.to_space()), vec![rat(1, 9), rat(1, 3), rat(1, 1)]);
    }

    #[test]
    fn levels_beyond_depth_are_ignored_and_budget_enforced() {
        let s = branch_space(&levels(&[0, 7]), 5, 2, 16).unwrap();
        assert_eq!(s.levels(), [0]);
        assert!(matches!(branch_space(&levels(&[0, 1, 2, 3, 4]), 5, 2, 16), Err(Error::Budget { .. })));
        assert!(branch_space(&levels(&[0]), 0, 2, 16).is_err());
        assert!(branch_space(&levels(&[0]), 3, 1, 16).is_err());
    }

    #[test]
    fn gap_transforms() {
        let max = DEFAULT_MAGNITUDE_BITS;
        assert_eq!(gap_transform(&ints(&[1, 2, 3]), Transform::Square, max).unwrap(), ints(&[1, 4, 9]));
        assert_eq!(gap_transform(&ints(&[]), Transform::Square, max).unwrap(), ints(&[]));
        assert_eq!(gap_transform(&ints(&[]), Transform::Factorial, max).unwrap(), ints(&[]));
        assert_eq!(gap_transform(&ints(&[3, 4]), Transform::Factorial, max).unwrap(), ints(&[6, 24]));
        assert_eq!(gap_transform(&ints(&[0, 1, 5]), Transform::Factorial, max).unwrap(), ints(&[1, 120]));
        assert!(matches!(gap_transform(&ints(&[100]), Transform::Factorial, 64), Err(Error::Budget { .. })));
    }

    #[test]
    fn powers_of_ten_against_halves() {
        let a = ints(&[1, 10, 100, 1000]);
        let b = ints(&[5, 50, 500]);
        let bound = BigUint::from(10_000u32);
        // 10/5 = 2 is not > 2, and the same boundary ratio repeats at every scale.
        assert_eq!(check_gap_condition(&a, &b, 2, GapForm::Ratio, &bound), None);
        assert_eq!(check_gap_condition(&a, &b, 1, GapForm::Ratio, &bound), Some(BigUint::zero()));
    }

    #[test]
    fn ad_family_basics() {
        let fam = ad_family(2, 1000, 3).unwrap();
        assert_eq!(fam.members.len(), 2);
        assert_eq!(fam.intersections.len(), 1);
        assert_eq!(fam.intersections[0].common, ints(&[1]));
        assert!(ad_family(1, 1000, 3).is_err());
        // Bound 1 keeps only the root code, so members coincide.
        assert!(ad_family(2, 1, 3).is_err());
    }

    #[test]
    fn line_embedding_two_points() {
        let s = branch_space(&levels(&[0]), 2, 3, 16).unwrap();
        let e = embed_cantor_into_line(&s).unwrap();
        assert_eq!(e.points, vec![rat(0, 1), rat(2, 3)]);
        assert_eq!(e.distortion, Distortion::Finite(rat(3, 2)));
    }

    #[test]
    fn line_embedding_single_point_and_base_check() {
        let s = branch_space(&levels(&[]), 2, 3, 16).unwrap();
        let e = embed_cantor_into_line(&s).unwrap();
        assert_eq!(e.distortion, Distortion::Finite(Rat::one()));
        let s2 = branch_space(&levels(&[0]), 2, 2, 16).unwrap();
        assert!(embed_cantor_into_line(&s2).is_err());
    }

    #[test]
    fn identical_sets_are_refuted() {
        let a = levels(&[0, 4, 16, 36]);
        assert!(matches!(
            incomparability_certificate(&a, &a, 10, 2, 64, DEFAULT_BRANCH_BUDGET).unwrap(),
            Incomparability::Refuted { .. }
        ));
    }
}
