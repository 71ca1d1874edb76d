//! Shortest-path completion of positively weighted connected graphs.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::rational::Rat;

/// Undirected graph on vertices `0..n` with positive rational edge weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGraph {
    labels: Vec<String>,
    edges: BTreeMap<(usize, usize), Rat>,
}

impl WeightedGraph {
    /// Rejects self loops, non-positive weights, out-of-range endpoints and
    /// the same unordered pair given twice. Connectivity is checked by
    /// [`path_completion`].
    pub fn new(labels: Vec<String>, edges: impl IntoIterator<Item = (usize, usize, Rat)>) -> Result<Self> {
        let n = labels.len();
        let mut map = BTreeMap::new();
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::malformed(format!("edge ({u}, {v}) is out of range")));
            }
            if u == v {
                return Err(Error::malformed(format!("self loop at vertex {u}")));
            }
            if !w.is_positive() {
                return Err(Error::malformed(format!("edge ({u}, {v}) has non-positive weight {w}")));
            }
            if map.insert((u.min(v), u.max(v)), w).is_some() {
                return Err(Error::malformed(format!("edge ({u}, {v}) given twice")));
            }
        }
        Ok(WeightedGraph { labels, edges: map })
    }

    pub fn unlabeled(n: usize, edges: impl IntoIterator<Item = (usize, usize, Rat)>) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()).collect(), edges)
    }

    /// The complete graph carrying the distances of `space`.
    pub fn complete(space: &FiniteMetricSpace) -> Result<Self> {
        let n = space.len();
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        Self::new(space.labels().to_vec(), edges.map(|(i, j)| (i, j, space.dist(i, j).clone())).collect::<Vec<_>>())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Edges as `((u, v), w)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (&(usize, usize), &Rat)> {
        self.edges.iter()
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<&Rat> {
        self.edges.get(&(u.min(v), u.max(v)))
    }
}

/// Shortest-path metric of a connected graph (Floyd–Warshall over exact
/// rationals). When every edge is itself a shortest path the result agrees
/// with the edge weights.
pub fn path_completion(g: &WeightedGraph) -> Result<FiniteMetricSpace> {
    let n = g.len();
    let mut d: Vec<Vec<Option<Rat>>> = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(Rat::zero());
    }
    for (&(u, v), w) in g.edges() {
        d[u][v] = Some(w.clone());
        d[v][u] = Some(w.clone());
    }
    for k in 0..n {
        for i in 0..n {
            let Some(dik) = d[i][k].clone() else { continue };
            for j in 0..n {
                let Some(dkj) = &d[k][j] else { continue };
                let via = &dik + dkj;
                if d[i][j].as_ref().is_none_or(|cur| via < *cur) {
                    d[i][j] = Some(via);
                }
            }
        }
    }
    let mut rows = Vec::with_capacity(n);
    for row in d {
        let mut out = Vec::with_capacity(n);
        for (j, entry) in row.into_iter().enumerate() {
            out.push(entry.ok_or(Error::Disconnected { unreachable: j })?);
        }
        rows.push(out);
    }
    FiniteMetricSpace::new(g.labels().to_vec(), rows)
}
