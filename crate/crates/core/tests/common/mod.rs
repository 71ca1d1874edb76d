//! Brute-force oracles and seeded generators shared by the integration tests
//! and the acceptance runner. Nothing here calls into the code it checks.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeSet;
use std::sync::Arc;

use num::bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use urykit::{FiniteMetricSpace, PartialMap, Rat};

pub fn r(num: i64, den: i64) -> Rat {
    Rat::new(num, den)
}

/// Random connected graph on `2..=max_n` vertices: a random spanning tree
/// plus extra edges, weights `a/b` with `1 <= a <= 12`, `1 <= b <= 4`.
pub fn connected_graph(rng: &mut impl Rng, max_n: usize) -> (usize, Vec<(usize, usize, Rat)>) {
    let n = rng.gen_range(2..=max_n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut present = BTreeSet::new();
    let mut edges = Vec::new();
    let weight = |rng: &mut dyn rand::RngCore| r(rng.gen_range(1..=12), rng.gen_range(1..=4));
    for k in 1..n {
        let u = order[k];
        let v = order[rng.gen_range(0..k)];
        present.insert((u.min(v), u.max(v)));
        edges.push((u, v, weight(rng)));
    }
    for _ in 0..rng.gen_range(0..=n * (n - 1) / 2) {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v && present.insert((u.min(v), u.max(v))) {
            edges.push((u, v, weight(rng)));
        }
    }
    (n, edges)
}

/// Shortest-path distances by enumerating every simple path.
pub fn all_simple_paths(n: usize, edges: &[(usize, usize, Rat)]) -> Option<Vec<Vec<Rat>>> {
    let mut adj: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); n];
    for (u, v, w) in edges {
        adj[*u].push((*v, w.clone()));
        adj[*v].push((*u, w.clone()));
    }
    fn walk(adj: &[Vec<(usize, Rat)>], at: usize, len: Rat, seen: &mut Vec<bool>, best: &mut [Option<Rat>]) {
        if best[at].as_ref().is_none_or(|b| len < *b) {
            best[at] = Some(len.clone());
        }
        for (next, w) in &adj[at] {
            if !seen[*next] {
                seen[*next] = true;
                walk(adj, *next, &len + w, seen, best);
                seen[*next] = false;
            }
        }
    }
    let mut out = Vec::with_capacity(n);
    for s in 0..n {
        let mut best = vec![None; n];
        let mut seen = vec![false; n];
        seen[s] = true;
        walk(&adj, s, Rat::zero(), &mut seen, &mut best);
        out.push(best.into_iter().collect::<Option<Vec<Rat>>>()?);
    }
    Some(out)
}

/// Metric axioms by the plain triple loop over all ordered triples.
pub fn is_metric(d: &[Vec<Rat>]) -> bool {
    let n = d.len();
    for i in 0..n {
        for j in 0..n {
            if (i == j) != d[i][j].is_zero() || d[i][j] != d[j][i] || d[i][j].is_negative() {
                return false;
            }
            for k in 0..n {
                if d[i][k] > &d[i][j] + &d[j][k] {
                    return false;
                }
            }
        }
    }
    true
}

/// Strong triangle inequality over all ordered triples.
pub fn is_ultra(d: &[Vec<Rat>]) -> bool {
    let n = d.len();
    (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| d[i][k] <= d[i][j] || d[i][k] <= d[j][k])))
}

/// `max(d'/d, d/d')` over all pairs by direct division.
pub fn distortion_of(src: &FiniteMetricSpace, dst: &FiniteMetricSpace, pairs: &[(usize, usize)]) -> Rat {
    let mut worst = Rat::one();
    for (a, &(x1, y1)) in pairs.iter().enumerate() {
        for &(x2, y2) in &pairs[a + 1..] {
            let q = dst.dist(y1, y2) / src.dist(x1, x2);
            let q = if q < Rat::one() { q.recip() } else { q };
            if q > worst {
                worst = q;
            }
        }
    }
    worst
}

/// Random metric whose distances lie in `[1, 2]`, so every triangle holds.
pub fn banded_space(rng: &mut impl Rng, n: usize) -> FiniteMetricSpace {
    let q = rng.gen_range(1..=6);
    let mut d = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = r(rng.gen_range(q..=2 * q), q);
            d[i][j] = v.clone();
            d[j][i] = v;
        }
    }
    FiniteMetricSpace::from_matrix(d).unwrap()
}

/// `n` distinct integer points of the plane, in random order.
pub fn l1_points(rng: &mut impl Rng, n: usize) -> Vec<(i64, i64)> {
    let mut pts = BTreeSet::new();
    while pts.len() < n {
        pts.insert((rng.gen_range(-6..=6), rng.gen_range(-6..=6)));
    }
    let mut pts: Vec<_> = pts.into_iter().collect();
    pts.shuffle(rng);
    pts
}

/// L1 distances with the axes stretched by `sx` and `sy`.
pub fn l1_space(pts: &[(i64, i64)], sx: &Rat, sy: &Rat) -> FiniteMetricSpace {
    FiniteMetricSpace::from_fn(pts.len(), |i, j| {
        sx * Rat::from_int((pts[i].0 - pts[j].0).abs()) + sy * Rat::from_int((pts[i].1 - pts[j].1).abs())
    })
    .unwrap()
}

/// A partial map from a random L1 space into an axis-stretched copy, with
/// one unmapped source point left over. The stretch ratio stays below
/// `theta`, which bounds the distortion.
pub struct ExtensionInstance {
    pub map: PartialMap,
    pub x_new: usize,
}

pub fn extension_instance(rng: &mut impl Rng, theta: &Rat) -> ExtensionInstance {
    let n = rng.gen_range(2..=8);
    let pts = l1_points(rng, n);
    let src = Arc::new(l1_space(&pts, &Rat::one(), &Rat::one()));
    // stretch in [1, theta) on a grid of 16 steps
    let t = rng.gen_range(0..16);
    let stretch = Rat::one() + (theta - Rat::one()) * r(t, 16);
    let (sx, sy) = if rng.gen_bool(0.5) { (stretch, Rat::one()) } else { (Rat::one(), stretch) };
    let extra = rng.gen_range(0..=2);
    let mut tpts = pts.clone();
    tpts.extend(l1_points(rng, n + extra).into_iter().filter(|p| !pts.contains(p)).take(extra));
    let dst = Arc::new(l1_space(&tpts, &sx, &sy));
    let x_new = rng.gen_range(0..n);
    let mut pairs: Vec<(usize, usize)> = (0..n).filter(|&x| x != x_new && rng.gen_bool(0.75)).map(|x| (x, x)).collect();
    pairs.shuffle(rng);
    ExtensionInstance { map: PartialMap::new(src, dst, pairs).unwrap(), x_new }
}

/// All pairs `(p0, p1)` over values `a/b` (`b <= 2`, value in
/// `(0, 2]`) satisfying the two-sided type inequality against distance 1.
pub fn two_point_types() -> Vec<(Rat, Rat)> {
    let values: BTreeSet<Rat> = (1..=2).flat_map(|b| (1..=2 * b).map(move |a| r(a, b))).collect();
    let mut out = Vec::new();
    for p in &values {
        for q in &values {
            let diff = if p > q { p - q } else { q - p };
            if diff <= Rat::one() && Rat::one() <= p + q {
                out.push((p.clone(), q.clone()));
            }
        }
    }
    out
}

/// Least `k <= bound` by plain scan: every `a in A`, `b in B` with
/// `a, b > k` are separated and both sets still have an element above `k`.
pub fn gap_scan(a: &BTreeSet<u64>, b: &BTreeSet<u64>, n: u64, ratio: bool, bound: u64) -> Option<u64> {
    (0..=bound).find(|&k| {
        let big_a: Vec<u64> = a.iter().copied().filter(|&x| x > k).collect();
        let big_b: Vec<u64> = b.iter().copied().filter(|&y| y > k).collect();
        !big_a.is_empty()
            && !big_b.is_empty()
            && big_a
                .iter()
                .all(|&x| big_b.iter().all(|&y| if ratio { x > n * y || y > n * x } else { x.abs_diff(y) > n }))
    })
}

pub fn to_big(set: &BTreeSet<u64>) -> BTreeSet<BigUint> {
    set.iter().map(|&x| BigUint::from(x)).collect()
}

/// Spectrum of the truncated branch space by direct enumeration of bit
/// masks: two masks over `levels` differ first at their lowest differing
/// level `a`, giving `2^-a`.
pub fn branch_spectrum(levels: &[usize], base: i64) -> BTreeSet<Rat> {
    let k = levels.len();
    let mut out = BTreeSet::new();
    for u in 0..1u64 << k {
        for v in u + 1..1u64 << k {
            let diff = u ^ v;
            // mask bit t is level index t; lower index is smaller level
            let first = (0..k).find(|&t| diff >> t & 1 == 1).unwrap();
            let mut den = Rat::one();
            for _ in 0..levels[first] {
                den = den * Rat::from_int(base);
            }
            out.insert(den.recip());
        }
    }
    out
}
