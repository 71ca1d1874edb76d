//! Finite metric spaces with exact distances, axiom checking, distortion of
//! partial maps, distance spectra and the ultrametric test.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::Rat;

/// Points are indices `0..n`; labels are carried along but have no meaning.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    d: Vec<Vec<Rat>>,
}

impl fmt::Debug for FiniteMetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteMetricSpace").field("labels", &self.labels).field("d", &self.d).finish()
    }
}

impl FiniteMetricSpace {
    /// Checks shape and sign only. The metric axioms are the business of
    /// [`validate_metric`], which reports every violation instead of failing
    /// on the first.
    pub fn new(labels: Vec<String>, d: Vec<Vec<Rat>>) -> Result<Self> {
        let n = labels.len();
        if d.len() != n {
            return Err(Error::malformed(format!("distance matrix has {} rows but there are {n} labels", d.len())));
        }
        for (i, row) in d.iter().enumerate() {
            if row.len() != n {
                return Err(Error::malformed(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            if let Some(j) = row.iter().position(Rat::is_negative) {
                return Err(Error::malformed(format!("negative distance at ({i}, {j})")));
            }
        }
        Ok(FiniteMetricSpace { labels, d })
    }

    /// Same as [`FiniteMetricSpace::new`] with labels `"0", "1", ...`.
    pub fn from_matrix(d: Vec<Vec<Rat>>) -> Result<Self> {
        let labels = (0..d.len()).map(|i| i.to_string()).collect();
        Self::new(labels, d)
    }

    /// Builds a space from a distance function over `0..n`.
    pub fn from_fn(n: usize, mut dist: impl FnMut(usize, usize) -> Rat) -> Result<Self> {
        let d = (0..n).map(|i| (0..n).map(|j| if i == j { Rat::zero() } else { dist(i, j) }).collect()).collect();
        Self::from_matrix(d)
    }

    pub fn empty() -> Self {
        FiniteMetricSpace { labels: Vec::new(), d: Vec::new() }
    }

    pub fn singleton(label: impl Into<String>) -> Self {
        FiniteMetricSpace { labels: vec![label.into()], d: vec![vec![Rat::zero()]] }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dist(&self, i: usize, j: usize) -> &Rat {
        &self.d[i][j]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &[Vec<Rat>] {
        &self.d
    }

    /// Restriction to `points`, in the given order.
    pub fn subspace(&self, points: &[usize]) -> FiniteMetricSpace {
        FiniteMetricSpace {
            labels: points.iter().map(|&i| self.labels[i].clone()).collect(),
            d: points.iter().map(|&i| points.iter().map(|&j| self.d[i][j].clone()).collect()).collect(),
        }
    }

    /// All distances multiplied by `factor`.
    pub fn scaled(&self, factor: &Rat) -> FiniteMetricSpace {
        FiniteMetricSpace {
            labels: self.labels.clone(),
            d: self.d.iter().map(|row| row.iter().map(|x| x * factor).collect()).collect(),
        }
    }

    /// Appends a point at the given distances from the existing points.
    pub fn with_point(&self, label: impl Into<String>, to_old: &[Rat]) -> FiniteMetricSpace {
        assert_eq!(to_old.len(), self.len());
        let mut d: Vec<Vec<Rat>> = self
            .d
            .iter()
            .zip(to_old)
            .map(|(row, x)| {
                let mut row = row.clone();
                row.push(x.clone());
                row
            })
            .collect();
        let mut last = to_old.to_vec();
        last.push(Rat::zero());
        d.push(last);
        let mut labels = self.labels.clone();
        labels.push(label.into());
        FiniteMetricSpace { labels, d }
    }

    /// True iff `self` is an initial segment of `other` with the same
    /// distances on the shared points.
    pub fn is_prefix_of(&self, other: &FiniteMetricSpace) -> bool {
        self.len() <= other.len() && (0..self.len()).all(|i| (0..self.len()).all(|j| self.d[i][j] == other.d[i][j]))
    }

    pub fn diameter(&self) -> Rat {
        self.d.iter().flatten().cloned().max().unwrap_or_else(Rat::zero)
    }
}

/// One failed metric axiom with the witnessing indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "axiom", rename_all = "snake_case")]
pub enum Violation {
    NonzeroDiagonal { i: usize, value: Rat },
    Asymmetric { i: usize, j: usize, dij: Rat, dji: Rat },
    ZeroDistance { i: usize, j: usize },
    Triangle { i: usize, j: usize, k: usize, dik: Rat, via: Rat },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// Lists every violated metric axiom. `Triangle { i, j, k }` means
/// `d(i,k) > d(i,j) + d(j,k)`; pairs are reported with `i < j` and triples
/// over ordered `i < k`, every `j` distinct from both.
pub fn validate_metric(space: &FiniteMetricSpace) -> ValidationReport {
    let n = space.len();
    let d = &space.d;
    let mut violations = Vec::new();
    for i in 0..n {
        if !d[i][i].is_zero() {
            violations.push(Violation::NonzeroDiagonal { i, value: d[i][i].clone() });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if d[i][j] != d[j][i] {
                violations.push(Violation::Asymmetric { i, j, dij: d[i][j].clone(), dji: d[j][i].clone() });
            }
            if d[i][j].is_zero() || d[j][i].is_zero() {
                violations.push(Violation::ZeroDistance { i, j });
            }
        }
    }
    for i in 0..n {
        for k in i + 1..n {
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                let via = &d[i][j] + &d[j][k];
                if d[i][k] > via {
                    violations.push(Violation::Triangle { i, j, k, dik: d[i][k].clone(), via });
                }
            }
        }
    }
    ValidationReport { ok: violations.is_empty(), violations }
}

/// Convenience wrapper turning a failed report into an error.
pub fn require_metric(space: &FiniteMetricSpace) -> Result<()> {
    let report = validate_metric(space);
    match report.violations.first() {
        None => Ok(()),
        Some(v) => {
            Err(Error::malformed(format!("not a metric ({} violations, first: {v:?})", report.violations.len())))
        }
    }
}

/// `d(i,k) <= max(d(i,j), d(j,k))` for all triples.
pub fn is_ultrametric(space: &FiniteMetricSpace) -> bool {
    let n = space.len();
    let d = &space.d;
    // Only order matters, so compare ranks instead of rationals.
    let values: BTreeSet<&Rat> = d.iter().flatten().collect();
    let rank: HashMap<&Rat, u32> = values.into_iter().zip(0..).collect();
    let ranked: Vec<Vec<u32>> = d.iter().map(|row| row.iter().map(|x| rank[x]).collect()).collect();
    (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| ranked[i][k] <= ranked[i][j].max(ranked[j][k]))))
}

/// Sorted distinct distances `d(i,j)`, `i < j`.
pub fn spectrum(space: &FiniteMetricSpace) -> Vec<Rat> {
    let n = space.len();
    let set: BTreeSet<Rat> =
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| space.d[i][j].clone()).collect();
    set.into_iter().collect()
}

/// Exact distortion of a map, or `Infinite` when one side collapses a pair
/// the other keeps apart.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Distortion {
    Finite(Rat),
    Infinite,
}

impl Distortion {
    pub fn finite(&self) -> Option<&Rat> {
        match self {
            Distortion::Finite(r) => Some(r),
            Distortion::Infinite => None,
        }
    }

    /// Strict comparison `self < bound`.
    pub fn is_below(&self, bound: &Rat) -> bool {
        matches!(self, Distortion::Finite(r) if r < bound)
    }
}

impl fmt::Display for Distortion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distortion::Finite(r) => write!(f, "{r}"),
            Distortion::Infinite => f.write_str("INFINITE"),
        }
    }
}

impl Serialize for Distortion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Two-sided ratio `max(a/b, b/a)` of a source and target distance.
pub fn pair_ratio(source: &Rat, target: &Rat) -> Distortion {
    match (source.is_zero(), target.is_zero()) {
        (true, true) => Distortion::Finite(Rat::one()),
        (true, false) | (false, true) => Distortion::Infinite,
        _ => {
            let r = target / source;
            if r < Rat::one() {
                Distortion::Finite(r.recip())
            } else {
                Distortion::Finite(r)
            }
        }
    }
}

/// An injection between point subsets of two spaces.
#[derive(Clone, Debug)]
pub struct PartialMap {
    pub source: Arc<FiniteMetricSpace>,
    pub target: Arc<FiniteMetricSpace>,
    pairs: Vec<(usize, usize)>,
}

impl PartialMap {
    /// Fails if an index is out of range or the pairs are not injective in
    /// either coordinate.
    pub fn new(
        source: Arc<FiniteMetricSpace>,
        target: Arc<FiniteMetricSpace>,
        pairs: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let mut dom = BTreeSet::new();
        let mut ran = BTreeSet::new();
        for &(x, y) in &pairs {
            if x >= source.len() || y >= target.len() {
                return Err(Error::malformed(format!("pair ({x}, {y}) is out of range")));
            }
            if !dom.insert(x) {
                return Err(Error::malformed(format!("source point {x} is mapped twice")));
            }
            if !ran.insert(y) {
                return Err(Error::malformed(format!("target point {y} is hit twice")));
            }
        }
        Ok(PartialMap { source, target, pairs })
    }

    pub fn identity(space: Arc<FiniteMetricSpace>, points: usize) -> Self {
        let pairs = (0..points.min(space.len())).map(|i| (i, i)).collect();
        PartialMap { source: space.clone(), target: space, pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn image_of(&self, x: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == x).map(|p| p.1)
    }

    pub fn preimage_of(&self, y: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.1 == y).map(|p| p.0)
    }

    pub fn inverse(&self) -> PartialMap {
        PartialMap {
            source: self.target.clone(),
            target: self.source.clone(),
            pairs: self.pairs.iter().map(|&(x, y)| (y, x)).collect(),
        }
    }

    /// The same map restricted to the pairs at the given positions.
    pub fn restrict(&self, keep: &[usize]) -> PartialMap {
        PartialMap {
            source: self.source.clone(),
            target: self.target.clone(),
            pairs: keep.iter().map(|&k| self.pairs[k]).collect(),
        }
    }

    /// Adds a pair; injectivity is re-checked.
    pub fn with_pair(&self, x: usize, y: usize) -> Result<PartialMap> {
        let mut pairs = self.pairs.clone();
        pairs.push((x, y));
        PartialMap::new(self.source.clone(), self.target.clone(), pairs)
    }

    /// Worst two-sided ratio over matched pairs, with the positions in
    /// `pairs` that attain it. `None` when fewer than two pairs exist.
    pub fn worst_pair(&self) -> Option<(usize, usize, Distortion)> {
        let mut best: Option<(usize, usize, Distortion)> = None;
        for a in 0..self.pairs.len() {
            for b in a + 1..self.pairs.len() {
                let (x1, y1) = self.pairs[a];
                let (x2, y2) = self.pairs[b];
                let r = pair_ratio(self.source.dist(x1, x2), self.target.dist(y1, y2));
                if best.as_ref().is_none_or(|(_, _, cur)| r > *cur) {
                    best = Some((a, b, r));
                }
            }
        }
        best
    }
}

/// Max over matched pairs of `max(dY/dX, dX/dY)`; 1 for maps with fewer than
/// two pairs. The map is λ-bi-Lipschitz (strict) iff the result is `< λ`.
pub fn distortion(m: &PartialMap) -> Distortion {
    m.worst_pair().map_or(Distortion::Finite(Rat::one()), |(_, _, r)| r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn triangle(a: i64, b: i64, c: i64) -> FiniteMetricSpace {
        // d(0,1)=a, d(1,2)=b, d(0,2)=c
        FiniteMetricSpace::from_matrix(vec![
            vec![rat(0, 1), rat(a, 1), rat(c, 1)],
            vec![rat(a, 1), rat(0, 1), rat(b, 1)],
            vec![rat(c, 1), rat(b, 1), rat(0, 1)],
        ])
        .unwrap()
    }

    #[test]
    fn singleton_is_valid() {
        assert!(validate_metric(&FiniteMetricSpace::singleton("a")).ok);
    }

    #[test]
    fn triangle_violation_is_reported_with_witness() {
        let report = validate_metric(&triangle(1, 1, 3));
        assert!(!report.ok);
        assert_eq!(report.violations, vec![Violation::Triangle { i: 0, j: 1, k: 2, dik: rat(3, 1), via: rat(2, 1) }]);
    }

    #[test]
    fn malformed_matrices_are_input_errors() {
        assert!(FiniteMetricSpace::from_matrix(vec![vec![rat(0, 1), rat(1, 1)]]).is_err());
        assert!(FiniteMetricSpace::from_matrix(vec![vec![rat(0, 1), rat(-1, 1)], vec![rat(-1, 1), rat(0, 1)]]).is_err());
        assert!(FiniteMetricSpace::new(vec!["a".into()], vec![]).is_err());
    }

    #[test]
    fn asymmetry_and_zero_distance_reported() {
        let s = FiniteMetricSpace::from_matrix(vec![vec![rat(0, 1), rat(1, 1)], vec![rat(2, 1), rat(0, 1)]]).unwrap();
        let r = validate_metric(&s);
        assert!(r.violations.iter().any(|v| matches!(v, Violation::Asymmetric { .. })));
        let z = FiniteMetricSpace::from_matrix(vec![vec![rat(0, 1); 2]; 2]).unwrap();
        assert_eq!(validate_metric(&z).violations, vec![Violation::ZeroDistance { i: 0, j: 1 }]);
    }

    #[test]
    fn spectrum_examples() {
        assert!(spectrum(&FiniteMetricSpace::singleton("a")).is_empty());
        assert_eq!(spectrum(&triangle(2, 2, 2)), vec![rat(2, 1)]);
        assert_eq!(spectrum(&triangle(3, 4, 5)), vec![rat(3, 1), rat(4, 1), rat(5, 1)]);
    }

    #[test]
    fn ultrametric_examples() {
        let two = FiniteMetricSpace::from_fn(2, |_, _| rat(7, 3)).unwrap();
        assert!(is_ultrametric(&two));
        assert!(!is_ultrametric(&triangle(3, 4, 5)));
        assert!(is_ultrametric(&triangle(1, 2, 2)));
    }

    #[test]
    fn distortion_examples() {
        let s = Arc::new(triangle(3, 4, 5));
        assert_eq!(distortion(&PartialMap::identity(s.clone(), 3)), Distortion::Finite(rat(1, 1)));

        let x = Arc::new(FiniteMetricSpace::from_fn(2, |_, _| rat(1, 1)).unwrap());
        let y = Arc::new(FiniteMetricSpace::from_fn(2, |_, _| rat(3, 2)).unwrap());
        let m = PartialMap::new(x, y, vec![(0, 0), (1, 1)]).unwrap();
        assert_eq!(distortion(&m), Distortion::Finite(rat(3, 2)));
        assert_eq!(distortion(&m.inverse()), Distortion::Finite(rat(3, 2)));
    }

    #[test]
    fn short_maps_have_unit_distortion() {
        let s = Arc::new(triangle(3, 4, 5));
        let m = PartialMap::new(s.clone(), s, vec![(0, 2)]).unwrap();
        assert_eq!(distortion(&m), Distortion::Finite(Rat::one()));
    }

    #[test]
    fn collapsed_pair_is_infinite() {
        let x = Arc::new(FiniteMetricSpace::from_fn(2, |_, _| rat(1, 1)).unwrap());
        let y = Arc::new(FiniteMetricSpace::from_matrix(vec![vec![Rat::zero(); 2]; 2]).unwrap());
        let m = PartialMap::new(x, y, vec![(0, 0), (1, 1)]).unwrap();
        assert_eq!(distortion(&m), Distortion::Infinite);
        assert!(!distortion(&m).is_below(&rat(1000, 1)));
    }

    #[test]
    fn non_injective_maps_are_rejected() {
        let s = Arc::new(triangle(3, 4, 5));
        assert!(PartialMap::new(s.clone(), s.clone(), vec![(0, 1), (1, 1)]).is_err());
        assert!(PartialMap::new(s.clone(), s.clone(), vec![(0, 1), (0, 2)]).is_err());
        assert!(PartialMap::new(s.clone(), s, vec![(0, 3)]).is_err());
    }
}
