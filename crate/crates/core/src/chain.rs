//! Distances of a distinguished point to an increasing chain of subspaces,
//! their ratio profiles, and the coding of finite index sets into tree
//! ultrametrics that survives K-bi-Lipschitz transfer.

use std::collections::BTreeSet;
use std::sync::Arc;

use num::bigint::BigInt;
use num::One;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{path_completion, WeightedGraph};
use crate::metric::{FiniteMetricSpace, PartialMap};
use crate::rational::Rat;

pub const DEFAULT_DEPTH_BUDGET: usize = 64;

pub type IndexSet = BTreeSet<usize>;

/// On-disk chain descriptor, stored next to a space file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainDescriptor {
    pub chain: Vec<Vec<usize>>,
    pub beta: usize,
}

/// A space with stages `X_0 ⊆ X_1 ⊆ ... ⊆ X_m` and a point `beta ∉ X_m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainedSpace {
    space: FiniteMetricSpace,
    chain: Vec<Vec<usize>>,
    beta: usize,
}

impl ChainedSpace {
    pub fn new(space: FiniteMetricSpace, chain: Vec<Vec<usize>>, beta: usize) -> Result<Self> {
        let n = space.len();
        if beta >= n {
            return Err(Error::malformed(format!("beta = {beta} is out of range")));
        }
        if chain.is_empty() {
            return Err(Error::malformed("chain has no stages"));
        }
        let mut normalized = Vec::with_capacity(chain.len());
        let mut prev: Option<IndexSet> = None;
        for (s, stage) in chain.into_iter().enumerate() {
            let set: IndexSet = stage.iter().copied().collect();
            if set.is_empty() {
                return Err(Error::malformed(format!("chain stage {s} is empty")));
            }
            if let Some(&bad) = set.iter().find(|&&i| i >= n) {
                return Err(Error::malformed(format!("chain stage {s} has out-of-range point {bad}")));
            }
            if set.contains(&beta) {
                return Err(Error::malformed(format!("beta = {beta} lies in chain stage {s}")));
            }
            if let Some(p) = &prev {
                if !p.is_subset(&set) {
                    return Err(Error::malformed(format!("chain stage {} is not contained in stage {s}", s - 1)));
                }
            }
            normalized.push(set.iter().copied().collect());
            prev = Some(set);
        }
        Ok(ChainedSpace { space, chain: normalized, beta })
    }

    pub fn from_descriptor(space: FiniteMetricSpace, desc: ChainDescriptor) -> Result<Self> {
        Self::new(space, desc.chain, desc.beta)
    }

    pub fn descriptor(&self) -> ChainDescriptor {
        ChainDescriptor { chain: self.chain.clone(), beta: self.beta }
    }

    pub fn space(&self) -> &FiniteMetricSpace {
        &self.space
    }

    /// Stages as sorted index lists.
    pub fn chain(&self) -> &[Vec<usize>] {
        &self.chain
    }

    pub fn beta(&self) -> usize {
        self.beta
    }
}

/// `eps[n] = min_{x ∈ X_n} d(beta, x)`.
pub fn epsilon_sequence(cs: &ChainedSpace) -> Vec<Rat> {
    cs.chain
        .iter()
        .map(|stage| stage.iter().map(|&x| cs.space.dist(cs.beta, x).clone()).min().expect("stages are nonempty"))
        .collect()
}

/// Consecutive ratios `eps[n] / eps[n+1]`.
pub fn ratios(eps: &[Rat]) -> Vec<Rat> {
    eps.windows(2).map(|w| &w[0] / &w[1]).collect()
}

fn above(eps: &[Rat], threshold: &Rat) -> IndexSet {
    ratios(eps).iter().enumerate().filter(|(_, r)| *r > threshold).map(|(n, _)| n).collect()
}

pub fn source_threshold(k: u64) -> Rat {
    Rat::from_int(2 * k * k)
}

pub fn image_threshold(k: u64) -> Rat {
    Rat::from_int(4 * k.pow(4))
}

/// `{n : eps[n]/eps[n+1] > 2K²}`.
pub fn phi_set(eps: &[Rat], k: u64) -> IndexSet {
    above(eps, &source_threshold(k))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThetaCheck {
    /// Every ratio is exactly 1 or exceeds 4K⁴.
    pub strict_form: bool,
    pub theta_set: IndexSet,
}

pub fn theta_check(eps: &[Rat], k: u64) -> ThetaCheck {
    let t = image_threshold(k);
    let strict_form = ratios(eps).iter().all(|r| *r == Rat::one() || *r > t);
    ThetaCheck { strict_form, theta_set: above(eps, &t) }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeMode {
    /// Threshold 2K².
    Source,
    /// Threshold 4K⁴.
    Image,
}

pub fn decode_set(cs: &ChainedSpace, k: u64, mode: DecodeMode) -> IndexSet {
    let eps = epsilon_sequence(cs);
    match mode {
        DecodeMode::Source => phi_set(&eps, k),
        DecodeMode::Image => theta_check(&eps, k).theta_set,
    }
}

/// Default escape gap `16K⁶`.
pub fn default_gap(k: u64) -> Rat {
    Rat::from_int(16 * k.pow(6))
}

/// Codes `a ⊆ {0..m-1}` as a chained tree ultrametric.
///
/// Points are words over an unbounded alphabet with
/// `d(η₁, η₂) = 1/(n+1)` for common prefix length `n`. `beta` is a long
/// word; stage point `p_j` follows `beta` for `L_j` symbols and then leaves it
/// with a symbol of its own, so `d(beta, p_j) = 1/(L_j + 1)`. Starting from
/// `L_0 = 0`, `L_j + 1` is multiplied by `ceil(gap)` when `j - 1 ∈ a` and kept
/// otherwise. Stage `X_j` is `{p_0, ..., p_j}`, making every ε-ratio either
/// `ceil(gap)` (on `a`) or exactly 1.
///
/// Points `0..=m` are `p_0..p_m`; point `m + 1` is `beta`.
pub fn encode_set(a: &IndexSet, m: usize, k: u64, gap: &Rat, depth_budget: usize) -> Result<ChainedSpace> {
    if k == 0 {
        return Err(Error::malformed("K must be at least 1"));
    }
    let floor = Rat::from_int(8 * k.pow(6));
    if *gap <= floor {
        return Err(Error::Precondition(format!("gap {gap} must exceed 8K^6 = {floor}")));
    }
    if m > depth_budget {
        return Err(Error::Budget { what: "chain encoding", needed: format!("{m} stages"), budget: depth_budget });
    }
    if let Some(&bad) = a.iter().find(|&&n| n >= m) {
        return Err(Error::malformed(format!("index {bad} is outside 0..{m}")));
    }
    let factor = gap.ceil_int();
    // prefix[j] + 1, the reciprocal of d(beta, p_j)
    let mut scale = Vec::with_capacity(m + 1);
    scale.push(BigInt::one());
    for n in 0..m {
        let last = scale[n].clone();
        scale.push(if a.contains(&n) { last * &factor } else { last });
    }
    let beta = m + 1;
    let dist_to_beta = |j: usize| Rat::from_int(scale[j].clone()).recip();
    let space = FiniteMetricSpace::from_fn(m + 2, |i, j| {
        if i == beta {
            dist_to_beta(j)
        } else if j == beta {
            dist_to_beta(i)
        } else {
            dist_to_beta(i.min(j))
        }
    })?;
    let mut labels: Vec<String> = (0..=m).map(|j| format!("p{j}@{}", &scale[j] - BigInt::one())).collect();
    labels.push("beta".into());
    let space = FiniteMetricSpace::new(labels, space.matrix().to_vec())?;
    let chain = (0..=m).map(|j| (0..=j).collect()).collect();
    ChainedSpace::new(space, chain, beta)
}

/// One checked inequality with its exact sides.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Bound {
    pub index: usize,
    pub lower: Rat,
    pub value: Rat,
    pub upper: Rat,
    pub holds: bool,
}

impl Bound {
    fn new(index: usize, lower: Rat, value: Rat, upper: Rat) -> Self {
        let holds = lower <= value && value <= upper;
        Bound { index, lower, value, upper, holds }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransferReport {
    pub k: u64,
    pub eps_source: Vec<Rat>,
    pub eps_image: Vec<Rat>,
    /// `(2K)^-1 eps_n <= eps'_n <= K eps_n` per stage.
    pub distance_bounds: Vec<Bound>,
    /// `(2K²)^-1 r_n <= r'_n <= 2K² r_n` per consecutive pair.
    pub ratio_bounds: Vec<Bound>,
    pub all_hold: bool,
}

/// Checks that `f` is total on `src`, maps `beta` to `beta`, sends every
/// source stage onto the matching target stage, and satisfies
/// `d/K <= d' <= K·d` on all pairs.
fn check_transfer_preconditions(src: &ChainedSpace, dst: &ChainedSpace, f: &PartialMap, k: u64) -> Result<Vec<usize>> {
    if *f.source != src.space || *f.target != dst.space {
        return Err(Error::Precondition("map does not run between the two chained spaces".into()));
    }
    let n = src.space.len();
    let mut image = vec![usize::MAX; n];
    for &(x, y) in f.pairs() {
        image[x] = y;
    }
    if let Some(x) = image.iter().position(|&y| y == usize::MAX) {
        return Err(Error::Precondition(format!("map is not defined at source point {x}")));
    }
    if image[src.beta] != dst.beta {
        return Err(Error::Precondition("map does not send beta to beta".into()));
    }
    if src.chain.len() != dst.chain.len() {
        return Err(Error::Precondition("chains have different lengths".into()));
    }
    for (s, (a, b)) in src.chain.iter().zip(&dst.chain).enumerate() {
        let mapped: IndexSet = a.iter().map(|&x| image[x]).collect();
        let target: IndexSet = b.iter().copied().collect();
        if mapped != target {
            return Err(Error::Precondition(format!("stage {s} is not mapped onto its counterpart")));
        }
    }
    let kr = Rat::from_int(k);
    for x in 0..n {
        for y in x + 1..n {
            let d = src.space.dist(x, y);
            let e = dst.space.dist(image[x], image[y]);
            if e * &kr < *d || *e > d * &kr {
                return Err(Error::Precondition(format!("pair ({x}, {y}) is not {k}-bi-Lipschitz: {d} -> {e}")));
            }
        }
    }
    Ok(image)
}

/// Checks the stagewise distance bounds and the consecutive-ratio bounds
/// for a chain-respecting K-bi-Lipschitz map.
pub fn verify_transfer(src: &ChainedSpace, dst: &ChainedSpace, f: &PartialMap, k: u64) -> Result<TransferReport> {
    if k == 0 {
        return Err(Error::malformed("K must be at least 1"));
    }
    check_transfer_preconditions(src, dst, f, k)?;
    let eps = epsilon_sequence(src);
    let eps2 = epsilon_sequence(dst);
    let kr = Rat::from_int(k);
    let distance_bounds: Vec<Bound> = eps
        .iter()
        .zip(&eps2)
        .enumerate()
        .map(|(n, (e, e2))| Bound::new(n, e / (Rat::from_int(2) * &kr), e2.clone(), e * &kr))
        .collect();
    let two_k2 = source_threshold(k);
    let ratio_bounds: Vec<Bound> = ratios(&eps)
        .into_iter()
        .zip(ratios(&eps2))
        .enumerate()
        .map(|(n, (r, r2))| Bound::new(n, &r / &two_k2, r2, r * &two_k2))
        .collect();
    let all_hold = distance_bounds.iter().chain(&ratio_bounds).all(|b| b.holds);
    Ok(TransferReport { k, eps_source: eps, eps_image: eps2, distance_bounds, ratio_bounds, all_hold })
}

/// Seeded chain-respecting K-bi-Lipschitz image of `src`.
///
/// Every pair weight is stretched by a random factor in `[1, K]`, the result
/// closed under shortest paths (which keeps it between `d` and `K·d`), then
/// scaled by a random factor in `[1/K, 1]` and relabelled by a random
/// permutation. The bound is re-verified exactly before returning.
pub fn random_transfer(src: &ChainedSpace, k: u64, seed: u64) -> Result<(ChainedSpace, PartialMap)> {
    const STEPS: i64 = 16;
    const ATTEMPTS: usize = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = src.space.len();
    let kr = Rat::from_int(k);
    let step = |rng: &mut ChaCha8Rng| Rat::new(rng.gen_range(0..=STEPS), STEPS);
    let mut last_err = None;
    for _ in 0..ATTEMPTS {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let stretch = Rat::one() + (&kr - Rat::one()) * step(&mut rng);
                edges.push((i, j, src.space.dist(i, j) * stretch));
            }
        }
        let stretched = path_completion(&WeightedGraph::unlabeled(n, edges)?)?;
        let shrink = kr.recip() + (Rat::one() - kr.recip()) * step(&mut rng);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let mut d = vec![vec![Rat::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                d[perm[i]][perm[j]] = stretched.dist(i, j) * &shrink;
            }
        }
        let mut labels = vec![String::new(); n];
        for i in 0..n {
            labels[perm[i]] = format!("f({})", src.space.labels()[i]);
        }
        let dst_space = FiniteMetricSpace::new(labels, d)?;
        let chain = src.chain.iter().map(|stage| stage.iter().map(|&x| perm[x]).collect()).collect();
        let dst = ChainedSpace::new(dst_space, chain, perm[src.beta])?;
        let map = PartialMap::new(
            Arc::new(src.space.clone()),
            Arc::new(dst.space.clone()),
            (0..n).map(|i| (i, perm[i])).collect(),
        )?;
        match check_transfer_preconditions(src, &dst, &map, k) {
            Ok(_) => return Ok((dst, map)),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}
